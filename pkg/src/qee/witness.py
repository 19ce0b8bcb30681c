"""
Detecting qubit-environment entanglement from the environment alone.

If ``rho_E(0)`` commutes with ``H_0`` (or with ``H_1``) the lab-frame
environment state can only change when entanglement has been generated,
so the trace distance ``||rho_E(t) - rho_E(0)||_1`` is an entanglement
witness that needs no access to the qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import evolution, linalg
from .criterion import DECISION_TOL
from .evolution import ConditionalEvolution
from .model import EnvironmentState, PureDephasingModel, QubitState

Precondition = Literal["h0_commutes", "h1_commutes", "both", "neither"]


@dataclass(frozen=True)
class WitnessReport:
    precondition: Precondition
    env_change: float
    env_change_lab: float | None = None
    witnessed_entangled: bool | None = None

    @property
    def precondition_holds(self) -> bool:
        return self.precondition != "neither"


def _relative_commutator(h: np.ndarray, rho: np.ndarray) -> float:
    scale = linalg.frobenius(h) * linalg.frobenius(rho)
    if scale == 0.0:
        return 0.0
    return linalg.frobenius(linalg.commutator(h, rho)) / scale


def witness_precondition(model: PureDephasingModel, env: EnvironmentState,
                         tol: float = DECISION_TOL) -> Precondition:
    """Classify which conditional Hamiltonian commutes with ``rho_E(0)``."""
    h0 = _relative_commutator(model.h0, env.rho) <= tol
    h1 = _relative_commutator(model.h1, env.rho) <= tol
    if h0 and h1:
        return "both"
    if h0:
        return "h0_commutes"
    if h1:
        return "h1_commutes"
    return "neither"


def env_change_witness(model: PureDephasingModel, qubit: QubitState, env: EnvironmentState, t: float,
                       tol: float = DECISION_TOL, cond: ConditionalEvolution | None = None) -> WitnessReport:
    """
    Measure how far the environment has moved from ``rho_E(0)``.

    The rotated-frame change is always reported.  The lab-frame change and
    the witness decision are only filled in when a commutation
    precondition holds, since otherwise free evolution alone can move the
    environment.
    """
    if cond is None:
        cond = evolution.conditional_evolution(model, env, t)
    rotated = evolution.reduced_env_closed_form(env, cond, qubit)
    change = linalg.trace_norm(rotated - env.rho)
    pre = witness_precondition(model, env, tol)
    if pre == "neither":
        return WitnessReport(pre, change)
    lab = evolution.reduced_env(model, qubit, env, t, frame="lab")
    change_lab = linalg.trace_norm(lab - env.rho)
    return WitnessReport(pre, change, change_lab, change_lab > tol)
