import numpy as np
import pytest

from qee import linalg
from qee.criterion import ppt_negativity
from qee.errors import DimensionError
from qee.evolution import (
    conditional_evolution,
    joint_state,
    qubit_coherence,
    reduced_env,
    reduced_env_closed_form,
)
from qee.model import (
    MODEL_CLASSES,
    PureDephasingModel,
    QubitState,
    analyze_environment,
    build_ising_bath,
    build_random_model,
    completely_mixed,
)

from conftest import seeded_case


def test_w_is_identity_at_zero(generic3):
    model, env = generic3
    cond = conditional_evolution(model, env, 0.0)
    np.testing.assert_allclose(cond.w, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(cond.y, np.eye(3), atol=1e-14)


def test_w_is_identity_for_equal_couplings(rng):
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    v = x + x.conj().T
    model = PureDephasingModel(0.0, 1.0, np.diag([0.0, 1.0, 2.0]), v, v)
    env = analyze_environment(completely_mixed(3))
    for t in (0.5, 4.0):
        np.testing.assert_allclose(conditional_evolution(model, env, t).w, np.eye(3), atol=1e-13)


def test_w_ising_single_spin():
    g, t = 0.6, 2.1
    env = analyze_environment(completely_mixed(2))
    w = conditional_evolution(build_ising_bath(1, [g], 0.0), env, t).w
    np.testing.assert_allclose(w, np.diag([np.exp(-1j * g * t), np.exp(1j * g * t)]), atol=1e-14)


def test_w_factor_order(generic3):
    model, env = generic3
    t = 0.9
    expected = linalg.unitary_exp(model.h0, -t) @ linalg.unitary_exp(model.h1, t)
    np.testing.assert_allclose(conditional_evolution(model, env, t).w, expected)


@pytest.mark.parametrize("model_class", MODEL_CLASSES)
def test_conditional_evolution_invariants(model_class):
    model, env, _ = seeded_case(model_class, 4, 3)
    cond = conditional_evolution(model, env, 1.7)
    assert np.linalg.norm(cond.w.conj().T @ cond.w - np.eye(4)) <= 1e-10 * 4
    np.testing.assert_allclose(np.linalg.norm(cond.y, axis=0), 1, atol=1e-10)
    np.testing.assert_allclose(np.linalg.norm(cond.y, axis=1), 1, atol=1e-10)
    v = env.eigenvectors
    # y[n, i] = <n| w^dagger |i>
    assert cond.y[1, 2] == pytest.approx(v[:, 1].conj() @ cond.w.conj().T @ v[:, 2])


def test_dimension_mismatch(generic3):
    model, _ = generic3
    with pytest.raises(DimensionError):
        conditional_evolution(model, analyze_environment(completely_mixed(2)), 1.0)


@pytest.mark.parametrize("frame", ["rotated", "lab"])
def test_joint_state_at_zero_is_product(generic3, plus, frame):
    model, env = generic3
    sigma = joint_state(model, plus, env, 0.0, frame).matrix
    np.testing.assert_allclose(sigma, np.kron(plus.density, env.rho), atol=1e-14)


def test_joint_state_without_superposition(generic3):
    model, env = generic3
    q = QubitState(1.0, 0.0)
    for t in (0.5, 2.0):
        sigma = joint_state(model, q, env, t).matrix
        np.testing.assert_allclose(sigma, np.kron(np.diag([1, 0]), env.rho), atol=1e-15)


@pytest.mark.parametrize("model_class", MODEL_CLASSES)
@pytest.mark.parametrize("frame", ["rotated", "lab"])
def test_joint_state_is_density_matrix(model_class, frame):
    model, env, qubit = seeded_case(model_class, 3, 8)
    for t in (0.1, 0.5, 1.0, 3.0):
        j = joint_state(model, qubit, env, t, frame)
        linalg.validate_density_matrix(j.matrix)
        rho_q = linalg.partial_trace(j.matrix, 3, "qubit")
        # populations are conserved
        np.testing.assert_allclose(np.diag(rho_q).real, [abs(qubit.a) ** 2, abs(qubit.b) ** 2], atol=1e-12)


def test_frames_have_equal_negativity():
    model, rho = build_random_model(3, "generic", 42)
    env = analyze_environment(rho)
    q = QubitState.from_angles(1.1, 0.3)
    n_rot, _ = ppt_negativity(joint_state(model, q, env, 1.0, "rotated"))
    n_lab, _ = ppt_negativity(joint_state(model, q, env, 1.0, "lab"))
    assert n_rot > 1e-3
    assert abs(n_rot - n_lab) <= 1e-9


def test_reduced_env_at_zero(generic3, plus):
    model, env = generic3
    np.testing.assert_allclose(reduced_env(model, plus, env, 0.0), env.rho, atol=1e-15)


def test_reduced_env_mixed_stays_mixed(generic3, plus):
    model, _ = generic3
    env = analyze_environment(completely_mixed(3))
    for t in (0.3, 2.0):
        np.testing.assert_allclose(reduced_env(model, plus, env, t), np.eye(3) / 3, atol=1e-14)


@pytest.mark.parametrize("model_class", MODEL_CLASSES)
def test_reduced_env_closed_form_matches_trace(model_class):
    model, env, qubit = seeded_case(model_class, 4, 21)
    for t in (0.5, 2.5):
        cond = conditional_evolution(model, env, t)
        traced = reduced_env(model, qubit, env, t)
        assert linalg.trace_norm(traced - reduced_env_closed_form(env, cond, qubit)) <= 1e-10


def test_coherence_at_zero(generic3):
    model, env = generic3
    q = QubitState.from_angles(0.7, 1.2)
    assert qubit_coherence(model, q, env, 0.0) == pytest.approx(q.a * np.conj(q.b))


def test_coherence_single_spin_mixed_bath():
    g = 0.9
    model = build_ising_bath(1, [g], 0.0)
    env = analyze_environment(completely_mixed(2))
    q = QubitState.from_angles(0.8, 0.5)
    for t in (0.2, 1.0, 2.5):
        coh = qubit_coherence(model, q, env, t)
        assert abs(coh) == pytest.approx(abs(q.a * q.b) * abs(np.cos(g * t)), abs=1e-14)


def test_coherence_without_superposition(generic3):
    model, env = generic3
    assert qubit_coherence(model, QubitState(1.0, 0.0), env, 1.4) == 0


def test_coherence_is_block_trace(generic3, plus):
    model, env = generic3
    sigma = joint_state(model, plus, env, 1.2).matrix
    assert qubit_coherence(model, plus, env, 1.2) == pytest.approx(linalg.partial_trace(sigma, 3, "qubit")[0, 1])
