"""
Deciding and certifying qubit-environment entanglement under pure dephasing.

Three independent tests are available and must agree:

* the commutator test ``[rho_E(0), w(t)] = 0`` (separable iff it holds),
* a search for a negative principal minor of the partially transposed
  joint state, using closed forms for the bordered minors,
* the negativity of the partial transpose.

When the state is separable an explicit decomposition
``sum_k p_k rho_k (x) R_k`` is built block by block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

from . import linalg
from .errors import ContractError, DimensionError, InconsistencyError
from .evolution import ConditionalEvolution, JointState, conditional_evolution, joint_state
from .model import GROUPING_TOL, ZERO_TOL, EnvironmentState, PureDephasingModel, QubitState

DECISION_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-8

Regime = Literal["full_rank", "one_zero", "many_zero", "reduced"]


@dataclass(frozen=True)
class Tolerances:
    decision: float = DECISION_TOL
    grouping: float = GROUPING_TOL
    zero: float = ZERO_TOL


@dataclass(frozen=True)
class Minor:
    """
    A bordered principal minor of the partially transposed joint state.

    The value factorizes as ``prefactor * scaled`` with a strictly positive
    prefactor (``|a|^(2m) |b|^2`` times a product of occupations), so the
    sign is carried by ``scaled`` alone.  The prefactor is kept as a
    logarithm because it underflows for environments of a few tens of
    levels.
    """

    index: int
    scaled: float
    log_prefactor: float
    regime: Regime
    zero_index: int | None = None

    @property
    def value(self) -> float:
        if self.scaled == 0.0:
            return 0.0
        return self.scaled * float(np.exp(self.log_prefactor))


class MinorSearch(NamedTuple):
    minor: Minor | None
    superposition: bool


@dataclass(frozen=True)
class DecompositionTerm:
    weight: float
    qubit: np.ndarray
    env: np.ndarray
    phase: float | None = None


@dataclass(frozen=True)
class SeparableDecomposition:
    terms: tuple[DecompositionTerm, ...]

    def __len__(self) -> int:
        return len(self.terms)

    def reconstruct(self) -> np.ndarray:
        return sum(t.weight * np.kron(t.qubit, t.env) for t in self.terms)

    def reconstruction_error(self, target: np.ndarray) -> float:
        return linalg.trace_norm(self.reconstruct() - target)

    def factors_valid(self) -> bool:
        weights = np.array([t.weight for t in self.terms])
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-10:
            return False
        return all(
            linalg.is_density_matrix(t.qubit) and linalg.is_density_matrix(t.env) for t in self.terms
        )


@dataclass(frozen=True)
class EntanglementVerdict:
    time: float
    separable: bool
    superposition: bool
    commutator_norm: float
    cross_block_elements: list[tuple[int, int, float]]
    negative_minor: Minor | None
    negativity: float
    min_pt_eigenvalue: float
    decomposition: SeparableDecomposition | None = None
    reconstruction_error: float | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)


def _check_shared_dim(env: EnvironmentState, cond: ConditionalEvolution):
    if env.env_dim != cond.env_dim:
        raise DimensionError(f"environment has dimension {env.env_dim}, w(t) has {cond.env_dim}")


def commutator_criterion(env: EnvironmentState, cond: ConditionalEvolution,
                         tol: float = DECISION_TOL) -> tuple[bool, float]:
    """Return ``(separable, ||[rho_E(0), w]||_F)``; separable iff the norm is at most ``tol * ||w||_F``."""
    _check_shared_dim(env, cond)
    norm = linalg.frobenius(linalg.commutator(env.rho, cond.w))
    return norm <= tol * linalg.frobenius(cond.w), norm


def cross_block_elements(env: EnvironmentState, cond: ConditionalEvolution,
                         tol: float = DECISION_TOL) -> list[tuple[int, int, float]]:
    """
    Matrix elements ``<n| w |i>`` joining different occupation subspaces.

    Returns ``(i, n, |<n|w|i>|)`` for every pair in different subspaces whose
    magnitude exceeds ``tol``, largest first.
    """
    _check_shared_dim(env, cond)
    w_eig = np.abs(cond.w_eigenbasis())
    labels = env.labels
    mask = (labels[:, None] != labels[None, :]) & (w_eig > tol)
    rows, cols = np.nonzero(mask)
    out = [(int(i), int(n), float(w_eig[n, i])) for n, i in zip(rows, cols)]
    out.sort(key=lambda item: (-item[2], item[0], item[1]))
    return out


def _log_abs(x: float) -> float:
    with np.errstate(divide="ignore"):
        return float(np.log(abs(x)))


def _full_rank_scaled(c: np.ndarray, y: np.ndarray, i: int) -> float:
    y2 = np.abs(y) ** 2
    gain = float(np.dot(c, y2[:, i]))
    loss = float(c[i] ** 2 * np.sum(y2[i, :] / c))
    return gain - loss


def full_rank_minor(i: int, env: EnvironmentState, cond: ConditionalEvolution, qubit: QubitState) -> Minor:
    """Closed-form bordered minor for an environment state without zero eigenvalues."""
    _check_shared_dim(env, cond)
    n = env.env_dim
    if not 0 <= i < n:
        raise IndexError(f"minor index {i} out of range for N={n}")
    if env.rank < n:
        raise ContractError(
            f"full-rank minor requested but rho_E(0) has {env.n_zero} zero eigenvalue(s)"
        )
    c = env.eigenvalues
    log_pref = 2 * n * _log_abs(qubit.a) + 2 * _log_abs(qubit.b) + float(np.sum(np.log(c)))
    return Minor(i, _full_rank_scaled(c, cond.y, i), log_pref, "full_rank")


def minor(i: int, env: EnvironmentState, cond: ConditionalEvolution, qubit: QubitState,
          zero_index: int | None = None) -> Minor:
    """
    Bordered minor ``M_i``, dispatching on the rank of ``rho_E(0)``.

    With no zero eigenvalues this is the full-rank closed form.  With one
    zero eigenvalue at ``p`` it is ``-|a|^(2N) |b|^2 (prod_{k!=p} c_k)
    c_i^2 |y_ip|^2`` (and zero for ``i = p``).  With ``K >= 2`` zero
    eigenvalues the other ``K - 1`` zero rows are deleted as well, leaving
    ``zero_index`` (default: the first zero index) as the only zero
    diagonal entry.
    """
    _check_shared_dim(env, cond)
    n = env.env_dim
    if not 0 <= i < n:
        raise IndexError(f"minor index {i} out of range for N={n}")
    k = env.n_zero
    if k == 0:
        if zero_index is not None:
            raise ContractError("zero_index given but rho_E(0) is full rank")
        return full_rank_minor(i, env, cond, qubit)

    zeros = env.zero_subspace
    if k == 1:
        r = zeros[0]
        if zero_index not in (None, r):
            raise ContractError(f"zero_index {zero_index} is not the zero eigenvalue index {r}")
        kept = n
        regime: Regime = "one_zero"
    else:
        r = zeros[0] if zero_index is None else zero_index
        if r not in zeros:
            raise ContractError(f"zero_index {r} is not among the zero eigenvalue indices {zeros}")
        kept = n - k + 1
        regime = "many_zero"

    c = env.eigenvalues
    log_pref = (2 * kept * _log_abs(qubit.a) + 2 * _log_abs(qubit.b)
                + float(np.sum(np.log(c[c > 0]))))
    if i in zeros:
        scaled = 0.0
    else:
        scaled = -float(c[i] ** 2 * abs(cond.y[i, r]) ** 2)
    return Minor(i, scaled, log_pref, regime, r)


def minor_value(i: int, env: EnvironmentState, cond: ConditionalEvolution, qubit: QubitState,
                zero_index: int | None = None) -> float:
    return minor(i, env, cond, qubit, zero_index).value


def find_negative_minor(env: EnvironmentState, cond: ConditionalEvolution, qubit: QubitState,
                        tol: float = DECISION_TOL) -> MinorSearch:
    """
    Look for a negative bordered minor, largest occupation first.

    Indices are visited in descending ``c_i``; the first minor with scaled
    value below ``-tol`` is returned.  If the zero-occupation states are not
    reached by ``w(t)`` the environment is reduced to the support of
    ``rho_E(0)`` and the full-rank minors of the reduced problem are used.
    Without a superposition (``a = 0`` or ``b = 0``) no search is made and
    ``superposition`` is ``False``.
    """
    _check_shared_dim(env, cond)
    if not qubit.is_superposition(tol):
        return MinorSearch(None, False)

    c, y = env.eigenvalues, cond.y
    n = env.env_dim
    zeros = list(env.zero_subspace)
    support = [k for k in range(n) if k not in env.zero_subspace]

    if not zeros:
        for i in range(n):
            m = full_rank_minor(i, env, cond, qubit)
            if m.scaled < -tol:
                return MinorSearch(m, True)
        return MinorSearch(None, True)

    coupling = np.abs(y[np.ix_(support, zeros)])
    if coupling.size == 0 or coupling.max() <= tol:
        c_red = c[support]
        y_red = y[np.ix_(support, support)]
        log_pref = (2 * len(support) * _log_abs(qubit.a) + 2 * _log_abs(qubit.b)
                    + float(np.sum(np.log(c_red))))
        for j, i in enumerate(support):
            scaled = _full_rank_scaled(c_red, y_red, j)
            if scaled < -tol:
                return MinorSearch(Minor(i, scaled, log_pref, "reduced"), True)
        return MinorSearch(None, True)

    for i in support:
        for r in zeros:
            m = minor(i, env, cond, qubit, zero_index=r)
            if m.scaled < -tol:
                return MinorSearch(m, True)
    return MinorSearch(None, True)


def ppt_negativity(joint: JointState | np.ndarray, env_dim: int | None = None) -> tuple[float, float]:
    """Return ``(negativity, min eigenvalue)`` of the qubit partial transpose."""
    if isinstance(joint, JointState):
        matrix, env_dim = joint.matrix, joint.env_dim
    else:
        matrix = np.asarray(joint, dtype=complex)
        if env_dim is None:
            env_dim = matrix.shape[0] // 2
    pt = linalg.partial_transpose_qubit(matrix, env_dim)
    lam = linalg.hermitian_eig(pt).eigenvalues
    return float(np.sum(np.clip(-lam, 0.0, None))), float(lam[0])


def _principal_phase(eigenvalue: complex) -> float:
    chi = -float(np.angle(eigenvalue))
    return np.pi if chi <= -np.pi else chi


def separable_decomposition(env: EnvironmentState, cond: ConditionalEvolution, qubit: QubitState,
                            tol: float = DECISION_TOL) -> SeparableDecomposition:
    """
    Explicit product-state decomposition of a separable rotated-frame state.

    On each equal-occupation subspace ``s`` the restriction of ``w`` is a
    unitary ``exp(-i h_s)``.  Every eigenvector ``|k>`` of it (eigenphase
    ``chi_k`` in ``(-pi, pi]``) contributes the term
    ``c_s * |psi_k><psi_k| (x) |k><k|`` with ``|psi_k> = a|0> + b e^(-i chi_k)|1>``.

    Raises
    ------
    ContractError
        If ``[rho_E(0), w(t)]`` does not vanish within ``tol``.
    """
    _check_shared_dim(env, cond)
    if not qubit.is_superposition(tol):
        rho_q = qubit.density
        w = cond.w
        rho_e = env.rho if abs(qubit.b) <= tol else w @ env.rho @ w.conj().T
        return SeparableDecomposition((DecompositionTerm(1.0, rho_q, 0.5 * (rho_e + rho_e.conj().T)),))

    separable, norm = commutator_criterion(env, cond, tol)
    if not separable:
        raise ContractError(f"state is entangled (||[rho_E, w]||_F = {norm:.3e}); no separable decomposition")

    terms = []
    w = cond.w
    for idx in env.partition:
        c_s = float(np.mean(env.eigenvalues[list(idx)]))
        basis = env.eigenvectors[:, list(idx)]
        w_s = basis.conj().T @ w @ basis
        t_form, z = scipy.linalg.schur(w_s, output="complex")
        for k, lam in enumerate(np.diagonal(t_form)):
            chi = _principal_phase(lam)
            psi = np.array([qubit.a, qubit.b * np.exp(-1j * chi)])
            vec = basis @ z[:, k]
            terms.append(
                DecompositionTerm(
                    weight=c_s,
                    qubit=np.outer(psi, psi.conj()),
                    env=np.outer(vec, vec.conj()),
                    phase=chi,
                )
            )
    return SeparableDecomposition(tuple(terms))


def concurrence_two_qubit(state) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = linalg.as_matrix(state, "state")
    if rho.shape[0] != 4:
        raise DimensionError(f"concurrence needs a 4x4 state, got {rho.shape[0]}x{rho.shape[0]}")
    rho = linalg.validate_density_matrix(rho, "two-qubit state")
    yy = np.kron(linalg.PAULI_Y, linalg.PAULI_Y)
    eig = linalg.hermitian_eig(rho)
    # Subnormalized eigenvectors; the singular values of v^T (Y (x) Y) v are
    # the square roots of the eigenvalues of rho * flip(rho).  Dropping
    # negligible weights keeps sqrt from inflating rounding noise.
    p = np.where(eig.eigenvalues > 1e-14, eig.eigenvalues, 0.0)
    v = eig.eigenvectors * np.sqrt(p)
    lam = np.linalg.svd(v.T @ yy @ v, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def verdict(model: PureDephasingModel, qubit: QubitState, env: EnvironmentState, t: float,
            tolerances: Tolerances = Tolerances(), cond: ConditionalEvolution | None = None) -> EntanglementVerdict:
    """
    Run every test on one ``(model, qubit, env, t)`` and cross-check them.

    Raises
    ------
    InconsistencyError
        If the commutator test, the cross-block scan, the minor search, the
        negativity and the decomposition do not tell the same story.  The
        error's ``details`` hold every raw value.
    """
    tol = tolerances.decision
    if cond is None:
        cond = conditional_evolution(model, env, t)
    comm_separable, comm_norm = commutator_criterion(env, cond, tol)
    cross = cross_block_elements(env, cond, tol)
    search = find_negative_minor(env, cond, qubit, tol)
    joint = joint_state(model, qubit, env, t, "rotated", cond=cond)
    negativity, min_eig = ppt_negativity(joint)

    separable = comm_separable or not search.superposition
    decomposition = None
    recon = None
    if separable:
        decomposition = separable_decomposition(env, cond, qubit, tol)
        recon = decomposition.reconstruction_error(joint.matrix)

    result = EntanglementVerdict(
        time=float(t),
        separable=separable,
        superposition=search.superposition,
        commutator_norm=comm_norm,
        cross_block_elements=cross,
        negative_minor=search.minor,
        negativity=negativity,
        min_pt_eigenvalue=min_eig,
        decomposition=decomposition,
        reconstruction_error=recon,
        tolerances=tolerances,
    )

    problems = []
    if search.superposition:
        if comm_separable != (not cross):
            problems.append("commutator test and cross-block scan disagree")
        if comm_separable and search.minor is not None:
            problems.append("commutator vanishes but a negative minor was found")
        if not comm_separable and (search.minor is None or search.minor.scaled >= -tol):
            problems.append("commutator nonzero but no negative minor was found")
    if separable:
        if negativity > tol:
            problems.append("separable verdict with nonzero negativity")
        if recon is None or recon > RECONSTRUCTION_TOL:
            problems.append("separable decomposition does not reconstruct the state")
    if problems:
        raise InconsistencyError(
            "; ".join(problems),
            {
                "time": t,
                "commutator_norm": comm_norm,
                "commutator_separable": comm_separable,
                "cross_block_elements": cross,
                "negative_minor": search.minor,
                "negativity": negativity,
                "min_pt_eigenvalue": min_eig,
                "reconstruction_error": recon,
                "eigenvalues": env.eigenvalues.tolist(),
            },
        )
    return result
