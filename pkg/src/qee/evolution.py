"""
Time evolution of the qubit-environment system.

In the rotated frame the joint evolution is
``|0><0| (x) 1 + |1><1| (x) w(t)`` with ``w(t) = exp(i H_0 t) exp(-i H_1 t)``,
so the joint state is fixed entirely by ``rho_E(0)``, ``w(t)`` and the qubit
amplitudes.  The lab frame differs from it by local unitaries only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import linalg
from .errors import DimensionError
from .model import EnvironmentState, PureDephasingModel, QubitState

Frame = Literal["rotated", "lab"]


@dataclass(frozen=True)
class ConditionalEvolution:
    """``w(t)`` in the original basis and ``y[n, i] = <n| w^dagger |i>`` in the eigenbasis of ``rho_E(0)``."""

    w: np.ndarray
    time: float
    y: np.ndarray

    @property
    def env_dim(self) -> int:
        return self.w.shape[0]

    def w_eigenbasis(self) -> np.ndarray:
        """``<n| w |m>`` in the eigenbasis of ``rho_E(0)``."""
        return self.y.conj().T


@dataclass(frozen=True)
class JointState:
    matrix: np.ndarray
    frame: Frame
    time: float

    @property
    def env_dim(self) -> int:
        return self.matrix.shape[0] // 2


def _check_dims(model: PureDephasingModel, env: EnvironmentState):
    if model.env_dim != env.env_dim:
        raise DimensionError(f"model has env_dim {model.env_dim} but environment state has {env.env_dim}")


def conditional_evolution(model: PureDephasingModel, env: EnvironmentState, t: float) -> ConditionalEvolution:
    _check_dims(model, env)
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    w = linalg.unitary_exp(model.h0, -t) @ linalg.unitary_exp(model.h1, t)
    v = env.eigenvectors
    y = v.conj().T @ w.conj().T @ v
    return ConditionalEvolution(w=w, time=float(t), y=y)


def rotated_joint_matrix(rho: np.ndarray, w: np.ndarray, qubit: QubitState) -> np.ndarray:
    """Block formula for the rotated-frame joint state."""
    a, b = qubit.a, qubit.b
    rho_wd = rho @ w.conj().T
    w_rho = w @ rho
    top = np.hstack([abs(a) ** 2 * rho, a * np.conj(b) * rho_wd])
    bottom = np.hstack([np.conj(a) * b * w_rho, abs(b) ** 2 * (w_rho @ w.conj().T)])
    return np.vstack([top, bottom])


def lab_propagator(model: PureDephasingModel, t: float) -> np.ndarray:
    return linalg.unitary_exp(model.full_hamiltonian(), t)


def joint_state(model: PureDephasingModel, qubit: QubitState, env: EnvironmentState, t: float,
                frame: Frame = "rotated", cond: ConditionalEvolution | None = None) -> JointState:
    """
    Joint density matrix at time ``t``.

    ``frame="rotated"`` uses the block formula in ``w(t)``; ``frame="lab"``
    conjugates the initial product state with ``exp(-i H t)`` built from the
    full ``2N x 2N`` Hamiltonian.  ``cond`` may be passed to reuse an
    already computed ``w(t)``.
    """
    _check_dims(model, env)
    if frame == "rotated":
        if cond is None:
            cond = conditional_evolution(model, env, t)
        m = rotated_joint_matrix(env.rho, cond.w, qubit)
    elif frame == "lab":
        u = lab_propagator(model, t)
        sigma0 = linalg.kron(qubit.density, env.rho)
        m = u @ sigma0 @ u.conj().T
    else:
        raise ValueError(f"frame must be 'rotated' or 'lab', got {frame!r}")
    return JointState(matrix=m, frame=frame, time=float(t))


def reduced_env_closed_form(env: EnvironmentState, cond: ConditionalEvolution, qubit: QubitState) -> np.ndarray:
    """``|a|^2 rho_E(0) + |b|^2 w rho_E(0) w^dagger``."""
    w = cond.w
    return abs(qubit.a) ** 2 * env.rho + abs(qubit.b) ** 2 * (w @ env.rho @ w.conj().T)


def reduced_env(model: PureDephasingModel, qubit: QubitState, env: EnvironmentState, t: float,
                frame: Frame = "rotated") -> np.ndarray:
    """Environment state with the qubit traced out."""
    joint = joint_state(model, qubit, env, t, frame)
    return linalg.partial_trace(joint.matrix, model.env_dim, keep="environment")


def qubit_coherence(model: PureDephasingModel, qubit: QubitState, env: EnvironmentState, t: float,
                    cond: ConditionalEvolution | None = None) -> complex:
    """Rotated-frame coherence ``<0| rho_Q(t) |1> = a b* Tr[rho_E(0) w^dagger(t)]``."""
    if cond is None:
        cond = conditional_evolution(model, env, t)
    return complex(qubit.a * np.conj(qubit.b) * np.trace(env.rho @ cond.w.conj().T))
