import numpy as np
import pytest

from qee.model import QubitState, analyze_environment, build_random_model, random_qubit


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    x = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def plus():
    return QubitState(1 / np.sqrt(2), 1 / np.sqrt(2))


@pytest.fixture
def generic3():
    """Seeded generic model, N=3: the regression anchor used across modules."""
    model, rho = build_random_model(3, "generic", 42)
    return model, analyze_environment(rho)


def seeded_case(model_class, n, seed):
    model, rho = build_random_model(n, model_class, seed)
    qubit = random_qubit(np.random.default_rng([seed, 1]))
    return model, analyze_environment(rho), qubit
