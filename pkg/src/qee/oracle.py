"""
Brute-force cross-checks and fixed fixtures.

Nothing here reuses the fast paths it is meant to verify: minors are taken
as determinants of explicitly assembled submatrices, the rotated joint
state is obtained by conjugating with the full lab propagator, and the
battery compares three separately computed entanglement tests.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import linalg
from .criterion import (
    RECONSTRUCTION_TOL,
    EntanglementVerdict,
    Tolerances,
    commutator_criterion,
    find_negative_minor,
    ppt_negativity,
    verdict,
)
from .errors import DimensionError, InconsistencyError
from .evolution import ConditionalEvolution, JointState, conditional_evolution
from .model import (
    MODEL_CLASSES,
    EnvironmentState,
    PureDephasingModel,
    QubitState,
    analyze_environment,
    build_random_model,
    random_qubit,
)
from .witness import env_change_witness

BATTERY_TIMES = (0.1, 0.5, 1.0, 3.0)


def minor_direct(env: EnvironmentState, cond: ConditionalEvolution, qubit: QubitState, i: int,
                 crossed_out: Iterable[int] = ()) -> complex:
    """
    Determinant of a principal submatrix of the partially transposed joint state.

    The joint state is assembled in the eigenbasis of ``rho_E(0)`` from the
    branch propagator ``|0><0| (x) 1 + |1><1| (x) w``.  The kept rows are the
    qubit-0 rows except ``crossed_out`` plus the single qubit-1 row ``i``.
    """
    n = env.env_dim
    crossed = set(int(k) for k in crossed_out)
    if not 0 <= i < n or any(not 0 <= k < n for k in crossed):
        raise IndexError(f"indices out of range for N={n}")
    v = env.eigenvectors
    w_e = v.conj().T @ cond.w @ v
    branch = np.zeros((2 * n, 2 * n), dtype=complex)
    branch[:n, :n] = np.eye(n)
    branch[n:, n:] = w_e
    sigma0 = np.kron(qubit.density, np.diag(env.eigenvalues).astype(complex))
    sigma = branch @ sigma0 @ branch.conj().T
    pt = linalg.partial_transpose_qubit(sigma, n)
    keep = [k for k in range(n) if k not in crossed] + [n + i]
    return linalg.determinant(pt[np.ix_(keep, keep)])


def conjugation_path_joint(model: PureDephasingModel, qubit: QubitState, env: EnvironmentState,
                           t: float) -> JointState:
    """Rotated-frame joint state from ``exp(i(H_Q + H_0)t) exp(-iHt)`` acting on the product state."""
    n = model.env_dim
    u_lab = linalg.unitary_exp(model.full_hamiltonian(), t)
    local = linalg.kron(np.diag([model.eps0, model.eps1]), np.eye(n)) + linalg.kron(np.eye(2), model.h0)
    u_rot = linalg.unitary_exp(local, -t) @ u_lab
    sigma0 = linalg.kron(qubit.density, env.rho)
    return JointState(u_rot @ sigma0 @ u_rot.conj().T, "rotated", float(t))


def appendix_unitary() -> np.ndarray:
    """Entangling two-qubit gate with ``|psi> = |0>`` and ``|psi_perp> = |1>``."""
    s = 1 / np.sqrt(2)
    u = np.zeros((4, 4), dtype=complex)
    # columns: images of |00>, |01>, |10>, |11>
    u[:, 0] = [0, 1, 0, 0]
    u[:, 1] = [s, 0, 0, s]
    u[:, 2] = [s, 0, 0, -s]
    u[:, 3] = [0, 0, 1, 0]
    return u


APPENDIX_STATE = np.array(
    [
        [0.25, 0, 0, 0.25],
        [0, 0.5, 0, 0],
        [0, 0, 0, 0],
        [0.25, 0, 0, 0.25],
    ],
    dtype=complex,
)
APPENDIX_CONCURRENCE = 0.5


def appendix_fixture() -> tuple[np.ndarray, float]:
    """Apply the appendix gate to ``|0><0| (x) 1/2``; return the state and its known concurrence."""
    u = appendix_unitary()
    rho = np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2).astype(complex)
    return u @ rho @ u.conj().T, APPENDIX_CONCURRENCE


def reduced_qubit_channel(u: np.ndarray, env_dim: int = 2):
    """
    Bloch-vector form ``r -> T r + c`` of ``rho -> Tr_E[U (rho (x) 1/d) U^dagger]``.
    """
    paulis = (linalg.PAULI_X, linalg.PAULI_Y, linalg.PAULI_Z)
    mixed = np.eye(env_dim) / env_dim

    def channel(rho_q):
        out = u @ np.kron(rho_q, mixed) @ u.conj().T
        return linalg.partial_trace(out, env_dim, keep="qubit")

    image_of_identity = channel(np.eye(2) / 2)
    c = np.array([np.trace(p @ image_of_identity).real for p in paulis])
    t_mat = np.array([[0.5 * np.trace(p @ channel(q)).real for q in paulis] for p in paulis])
    return t_mat, c


def admits_dephasing_form(u: np.ndarray, env_dim: int = 2, *, full_search: bool = False,
                          tol: float = 1e-9) -> bool:
    """
    Whether ``u`` could be a pure-dephasing evolution up to local qubit unitaries.

    A pure-dephasing unitary keeps some qubit basis state pure for a
    maximally mixed environment, so the reduced channel must map some unit
    Bloch vector to a unit Bloch vector.  The default test checks the
    necessary bound ``sigma_max(T) + |c| >= 1``.  With ``full_search`` the
    output purity is scanned over the Bloch sphere on a 1 degree grid.
    """
    t_mat, c = reduced_qubit_channel(u, env_dim)
    if not full_search:
        return np.linalg.norm(t_mat, 2) + np.linalg.norm(c) >= 1.0 - tol
    theta = np.deg2rad(np.arange(0, 181))
    phi = np.deg2rad(np.arange(0, 360))
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    r = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    out = r @ t_mat.T + c
    best = float(np.max(np.linalg.norm(out, axis=-1)))
    # 1 degree grid: Bloch length can fall short of the optimum by ~(pi/360)^2
    return best >= 1.0 - 1e-3


def rank_deficient_fixture(env_dim: int, n_zero: int, seed: int) -> tuple[PureDephasingModel, np.ndarray]:
    """Generic model paired with an environment state having exactly ``n_zero`` zero eigenvalues."""
    if not 1 <= n_zero < env_dim:
        raise DimensionError(f"need 1 <= n_zero < env_dim, got n_zero={n_zero}, env_dim={env_dim}")
    model, _ = build_random_model(env_dim, "generic", seed)
    rng = np.random.default_rng([seed, 2])
    weights = np.zeros(env_dim)
    weights[: env_dim - n_zero] = rng.uniform(0.1, 1.0, size=env_dim - n_zero)
    weights /= weights.sum()
    u = rng.permutation(np.eye(env_dim)) @ _haar(rng, env_dim)
    rho = (u * weights) @ u.conj().T
    return model, 0.5 * (rho + rho.conj().T)


def _haar(rng: np.random.Generator, n: int) -> np.ndarray:
    x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(x)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class TrialFailure:
    trial_seed: int
    model_class: str
    env_dim: int
    time: float
    message: str
    details: dict = field(default_factory=dict)


@dataclass
class BatterySummary:
    separable: int = 0
    entangled: int = 0
    inconsistent: int = 0
    failures: list[TrialFailure] = field(default_factory=list)
    by_class: dict[str, dict[str, int]] = field(default_factory=dict)
    max_reconstruction_error: float = 0.0
    witness_checks: int = 0

    @property
    def total(self) -> int:
        return self.separable + self.entangled + self.inconsistent


def trial_plan(count: int, seed: int, dims: Sequence[int],
               classes: Sequence[str] = MODEL_CLASSES) -> list[tuple[int, str, int]]:
    """``(trial_seed, class, N)`` for every trial; classes cycle fastest, then dims."""
    plan = []
    for k in range(count):
        model_class = classes[k % len(classes)]
        n = dims[(k // len(classes)) % len(dims)]
        plan.append((seed * 1_000_000 + k, model_class, n))
    return plan


def _check_trial(trial_seed: int, model_class: str, n: int, times: Sequence[float],
                 tolerances: Tolerances, verdict_fn: Callable[..., EntanglementVerdict]):
    tol = tolerances.decision
    model, rho = build_random_model(n, model_class, trial_seed)
    env = analyze_environment(rho, tolerances.grouping, tolerances.zero)
    rng = np.random.default_rng([trial_seed, 1])
    qubits = [random_qubit(rng), random_qubit(rng)]
    outcomes = []
    for t in times:
        problems = []
        details: dict = {}
        try:
            v = verdict_fn(model, qubits[0], env, t, tolerances)
        except InconsistencyError as exc:
            outcomes.append((t, None, str(exc), exc.details, 0.0, 0))
            continue
        cond = conditional_evolution(model, env, t)
        comm_sep, comm_norm = commutator_criterion(env, cond, tol)
        search = find_negative_minor(env, cond, qubits[0], tol)
        # negativity recomputed from the full-propagator path, not taken from the verdict
        negativity, _ = ppt_negativity(conjugation_path_joint(model, qubits[0], env, t))
        details.update(commutator_norm=comm_norm, negativity=negativity, verdict_negativity=v.negativity,
                       minor=None if search.minor is None else search.minor.scaled)
        minor_sep = search.minor is None
        neg_sep = negativity <= tol
        if not (comm_sep == minor_sep == neg_sep == v.separable):
            problems.append(
                f"tests disagree: commutator={comm_sep} minor={minor_sep} negativity={neg_sep} verdict={v.separable}"
            )
        recon = 0.0
        if v.separable:
            d = v.decomposition
            recon = v.reconstruction_error if v.reconstruction_error is not None else np.inf
            if d is None or recon > RECONSTRUCTION_TOL or not d.factors_valid():
                problems.append(f"bad separable decomposition (reconstruction error {recon:.3e})")
        n_witness = 0
        for q in qubits:
            report = env_change_witness(model, q, env, t, tol, cond=cond)
            n_witness += 1
            if (report.env_change > tol) == v.separable:
                problems.append(f"rotated-frame environment change {report.env_change:.3e} contradicts verdict")
            if report.witnessed_entangled is not None and report.witnessed_entangled == v.separable:
                problems.append(f"lab-frame witness {report.env_change_lab:.3e} contradicts verdict")
        outcomes.append((t, v.separable, "; ".join(problems), details, recon, n_witness))
    return outcomes


def equivalence_battery(count: int, seed: int, dims: Sequence[int], *,
                        classes: Sequence[str] = MODEL_CLASSES, times: Sequence[float] = BATTERY_TIMES,
                        tolerances: Tolerances = Tolerances(), threads: int = 1,
                        verdict_fn: Callable[..., EntanglementVerdict] | None = None) -> BatterySummary:
    """
    Cross-check all entanglement tests on seeded random models.

    Every trial draws a model and a pair of qubit states, and at each time
    checks that the commutator test, the minor search and the negativity
    agree with the verdict, that separable verdicts come with a valid
    decomposition, and that the environment-change witness agrees for both
    qubit states.  Trials are independent, so ``threads > 1`` only changes
    wall time; results are gathered in plan order.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if not dims or any(n < 2 for n in dims):
        raise DimensionError(f"dims must be non-empty with every N >= 2, got {list(dims)}")
    plan = trial_plan(count, seed, list(dims), list(classes))
    if verdict_fn is None:
        verdict_fn = verdict

    def run(item):
        return _check_trial(*item, times, tolerances, verdict_fn)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, plan))
    else:
        results = [run(item) for item in plan]

    summary = BatterySummary()
    for (trial_seed, model_class, n), outcomes in zip(plan, results):
        counts = summary.by_class.setdefault(model_class, {"separable": 0, "entangled": 0, "inconsistent": 0})
        for t, separable, problem, details, recon, n_witness in outcomes:
            summary.witness_checks += n_witness
            summary.max_reconstruction_error = max(summary.max_reconstruction_error, recon)
            if separable is None or problem:
                summary.inconsistent += 1
                counts["inconsistent"] += 1
                summary.failures.append(TrialFailure(trial_seed, model_class, n, t, problem, details))
            elif separable:
                summary.separable += 1
                counts["separable"] += 1
            else:
                summary.entangled += 1
                counts["entangled"] += 1
    return summary


def _pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def format_failure(failure: TrialFailure) -> str:
    """JSON failure report with the seed and every matrix needed to reproduce it."""
    model, rho = build_random_model(failure.env_dim, failure.model_class, failure.trial_seed)

    def plain(x):
        if isinstance(x, (np.floating, np.integer)):
            return x.item()
        if hasattr(x, "__dict__"):
            return {k: plain(v) for k, v in vars(x).items()}
        if isinstance(x, (list, tuple)):
            return [plain(v) for v in x]
        return x

    report = {
        "trial_seed": failure.trial_seed,
        "model_class": failure.model_class,
        "env_dim": failure.env_dim,
        "time": failure.time,
        "message": failure.message,
        "details": {k: plain(v) for k, v in failure.details.items()},
        "eps0": model.eps0,
        "eps1": model.eps1,
        "h_env": _pairs(model.h_env),
        "v0": _pairs(model.v0),
        "v1": _pairs(model.v1),
        "rho_env": _pairs(rho),
    }
    return json.dumps(report, indent=2, default=str)
