import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qee import linalg
from qee.errors import ContractError, DimensionError
from qee.evolution import conditional_evolution
from qee.model import (
    MODEL_CLASSES,
    PureDephasingModel,
    QubitState,
    analyze_environment,
    build_ising_bath,
    build_random_model,
    build_thermal,
    completely_mixed,
)

from conftest import random_density


def test_mixed_state_is_one_subspace():
    env = analyze_environment(completely_mixed(4))
    assert env.partition == ((0, 1, 2, 3),)
    assert env.zero_subspace == ()
    assert env.rank == 4


def test_distinct_eigenvalues_are_singletons():
    env = analyze_environment(np.diag([0.2, 0.5, 0.3]))
    np.testing.assert_allclose(env.eigenvalues, [0.5, 0.3, 0.2])
    assert env.partition == ((0,), (1,), (2,))
    assert env.rank == 3


def test_exact_degeneracy_with_zeros():
    env = analyze_environment(np.diag([0.5, 0.5, 0.0, 0.0]))
    assert env.partition == ((0, 1),)
    assert env.zero_subspace == (2, 3)
    assert env.n_zero == 2
    assert list(env.labels) == [0, 0, 1, 1]


def test_grouping_tolerance_is_a_gap_threshold():
    c = np.array([0.4, 0.4 - 5e-9, 0.2, 0.2 - 1e-7])
    c /= c.sum()
    env = analyze_environment(np.diag(c))
    assert env.partition == ((0, 1), (2,), (3,))


@pytest.mark.parametrize(
    "rho, match",
    [
        (np.eye(2), "trace"),
        (np.diag([1.2, -0.2]), "positive"),
        (np.array([[0.5, 0.1], [0.3, 0.5]]), "Hermitian"),
    ],
)
def test_analyze_rejects_invalid(rho, match):
    with pytest.raises(ContractError, match=match):
        analyze_environment(rho)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
def test_analyze_reassembles(seed, n):
    rho = random_density(np.random.default_rng(seed), n)
    env = analyze_environment(rho)
    assert linalg.trace_norm(env.reassemble() - rho) <= 1e-9
    assert np.all(np.diff(env.eigenvalues) <= 0)
    assert env.eigenvalues.sum() == pytest.approx(1, abs=1e-10)


def test_thermal_infinite_temperature():
    h = np.diag([0.0, 1.0, 3.0])
    np.testing.assert_allclose(build_thermal(h, 0.0), np.eye(3) / 3)


def test_thermal_ground_state_limit():
    e, beta = 2.0, 20.0
    rho = build_thermal(np.diag([0.0, e]), beta)
    np.testing.assert_allclose(rho, np.diag([1.0, 0.0]), atol=np.exp(-beta * e))


def test_thermal_two_level_closed_form():
    # sigma_z = diag(+1, -1): the -1 level carries weight e
    z = np.e + np.exp(-1)
    np.testing.assert_allclose(build_thermal(linalg.PAULI_Z, 1.0), np.diag([np.exp(-1), np.e]) / z, atol=1e-15)
    np.testing.assert_allclose(build_thermal(-linalg.PAULI_Z, 1.0), np.diag([np.e, np.exp(-1)]) / z, atol=1e-15)


def test_thermal_rejects_negative_beta():
    with pytest.raises(ContractError):
        build_thermal(np.eye(2), -1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), beta=st.floats(0, 5))
def test_thermal_commutes_with_hamiltonian(seed, beta):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = x + x.conj().T
    rho = build_thermal(h, beta)
    assert linalg.frobenius(linalg.commutator(rho, h)) <= 1e-10 * linalg.frobenius(h)
    linalg.validate_density_matrix(rho)


@pytest.mark.parametrize("model_class", MODEL_CLASSES)
def test_random_model_is_deterministic(model_class):
    m1, r1 = build_random_model(4, model_class, 11)
    m2, r2 = build_random_model(4, model_class, 11)
    for a, b in [(m1.h_env, m2.h_env), (m1.v0, m2.v0), (m1.v1, m2.v1), (r1, r2)]:
        assert a.tobytes() == b.tobytes()


def test_random_model_rejects_small_dim():
    with pytest.raises(DimensionError):
        build_random_model(1, "generic", 0)


@pytest.mark.parametrize("seed", range(5))
def test_random_unitary_class_commutes(seed):
    model, rho = build_random_model(4, "random_unitary", seed)
    for v in (model.v0, model.v1):
        assert linalg.frobenius(linalg.commutator(model.h_env, v)) <= 1e-10
    assert linalg.frobenius(linalg.commutator(rho, model.h_env)) <= 1e-10
    env = analyze_environment(rho)
    for t in (0.5, 2.0):
        w_e = conditional_evolution(model, env, t).w_eigenbasis()
        assert np.max(np.abs(w_e - np.diag(np.diag(w_e)))) < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_block_preserving_class_has_no_cross_elements(seed):
    model, rho = build_random_model(5, "block_preserving", seed)
    env = analyze_environment(rho)
    assert len(env.partition) >= 2
    for t in (0.1, 1.0, 3.0):
        w_e = np.abs(conditional_evolution(model, env, t).w_eigenbasis())
        cross = env.labels[:, None] != env.labels[None, :]
        assert w_e[cross].max() < 1e-10


def test_generic_regression_anchor(generic3):
    model, env = generic3
    w = conditional_evolution(model, env, 1.0).w
    assert linalg.frobenius(linalg.commutator(env.rho, w)) > 1e-6


def test_ising_single_spin_closed_form():
    g, t = 0.8, 1.3
    model = build_ising_bath(1, [g], 0.0)
    env = analyze_environment(completely_mixed(2))
    w = conditional_evolution(model, env, t).w
    np.testing.assert_allclose(w, np.diag([np.exp(-1j * g * t), np.exp(1j * g * t)]), atol=1e-14)


def test_ising_zero_couplings_give_identity():
    model = build_ising_bath(3, [0.0, 0.0, 0.0], 0.7)
    env = analyze_environment(completely_mixed(8))
    for t in (0.4, 2.0):
        np.testing.assert_allclose(conditional_evolution(model, env, t).w, np.eye(8), atol=1e-13)


def test_ising_dimensions():
    assert build_ising_bath(2, [1.0, 0.5], 0.3).env_dim == 4
    with pytest.raises(DimensionError):
        build_ising_bath(9, [0.1] * 9, 0.0)
    with pytest.raises(DimensionError):
        build_ising_bath(2, [0.1], 0.0)


def test_model_validation():
    with pytest.raises(ContractError):
        PureDephasingModel(0, 0, np.array([[0, 1], [0, 0]]), np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        PureDephasingModel(0, 0, np.eye(2), np.eye(3), np.eye(2))


def test_qubit_normalization():
    with pytest.raises(ContractError):
        QubitState(1.0, 1.0)
    q = QubitState.from_angles(np.pi / 3, 0.4)
    assert abs(q.a) ** 2 + abs(q.b) ** 2 == pytest.approx(1)
    assert not QubitState(1.0, 0.0).is_superposition(1e-9)
