"""
Pure-dephasing qubit-environment models and initial states.

The Hamiltonian is

    H = sum_i eps_i |i><i|  +  H_E  +  |0><0| (x) V_0  +  |1><1| (x) V_1

and ``H_i = H_E + V_i`` is the environment Hamiltonian seen in qubit branch
``i``.  Random models are drawn from ``numpy.random.Generator`` backed by
PCG64 (``numpy.random.default_rng(seed)``), so a given ``(class, N, seed)``
always produces the same matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import linalg
from .errors import ContractError, DimensionError

GROUPING_TOL = 1e-8
ZERO_TOL = 1e-12

ModelClass = Literal["generic", "random_unitary", "block_preserving"]
MODEL_CLASSES: tuple[str, ...] = ("generic", "random_unitary", "block_preserving")


@dataclass(frozen=True)
class PureDephasingModel:
    eps0: float
    eps1: float
    h_env: np.ndarray
    v0: np.ndarray
    v1: np.ndarray

    def __post_init__(self):
        n = None
        for name in ("h_env", "v0", "v1"):
            m = linalg.as_matrix(getattr(self, name), name)
            if n is None:
                n = m.shape[0]
            elif m.shape[0] != n:
                raise DimensionError(f"{name} is {m.shape[0]}x{m.shape[0]}, expected {n}x{n}")
            defect = linalg.hermiticity_defect(m)
            if defect > linalg.HERMITIAN_TOL:
                raise ContractError(f"{name} is not Hermitian (relative defect {defect:.3e})")
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def env_dim(self) -> int:
        return self.h_env.shape[0]

    @property
    def h0(self) -> np.ndarray:
        return self.h_env + self.v0

    @property
    def h1(self) -> np.ndarray:
        return self.h_env + self.v1

    def full_hamiltonian(self) -> np.ndarray:
        """The ``2N x 2N`` Hamiltonian with the qubit as the slow index."""
        n = self.env_dim
        eye = np.eye(n)
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        return (
            linalg.kron(np.diag([self.eps0, self.eps1]), eye)
            + linalg.kron(np.eye(2), self.h_env)
            + linalg.kron(p0, self.v0)
            + linalg.kron(p1, self.v1)
        )


@dataclass(frozen=True)
class QubitState:
    """Pure qubit state ``a|0> + b|1>``."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ContractError(f"qubit amplitudes are not normalized: |a|^2 + |b|^2 = {norm!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> QubitState:
        return cls(np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)

    @property
    def density(self) -> np.ndarray:
        v = self.vector
        return np.outer(v, v.conj())

    def is_superposition(self, tol: float) -> bool:
        return abs(self.a) > tol and abs(self.b) > tol


@dataclass(frozen=True)
class EnvironmentState:
    """
    Spectral form of the initial environment state.

    ``eigenvalues`` are sorted descending and ``eigenvectors[:, n]`` is the
    matching eigenvector, so index ``n`` throughout the library means the
    n-th largest occupation.  ``partition`` groups the indices of non-zero
    eigenvalues into equal-occupation subspaces (largest first);
    ``zero_subspace`` holds the indices treated as exactly zero.
    """

    rho: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    partition: tuple[tuple[int, ...], ...]
    zero_subspace: tuple[int, ...]
    grouping_tol: float = GROUPING_TOL
    zero_tol: float = ZERO_TOL
    labels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        labels = np.empty(len(self.eigenvalues), dtype=int)
        for s, idx in enumerate(self.all_subspaces):
            labels[list(idx)] = s
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def env_dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def rank(self) -> int:
        return self.env_dim - len(self.zero_subspace)

    @property
    def n_zero(self) -> int:
        """Number of zero eigenvalues (``K``)."""
        return len(self.zero_subspace)

    @property
    def all_subspaces(self) -> tuple[tuple[int, ...], ...]:
        """Equal-occupation subspaces with the zero subspace appended when present."""
        if self.zero_subspace:
            return self.partition + (self.zero_subspace,)
        return self.partition

    def reassemble(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def analyze_environment(rho, grouping_tol: float = GROUPING_TOL,
                        zero_tol: float = ZERO_TOL) -> EnvironmentState:
    """
    Diagonalize ``rho`` and group its eigenvalues into equal-occupation subspaces.

    Sorted eigenvalues are split wherever two neighbours differ by more than
    ``grouping_tol``; eigenvalues below ``zero_tol`` are set to zero and
    collected in ``zero_subspace``.

    Raises
    ------
    ContractError
        If ``rho`` is not Hermitian, has negative eigenvalues beyond
        ``-1e-12`` or does not have unit trace.
    """
    rho = linalg.validate_density_matrix(rho, "rho_E(0)", psd_tol=1e-12)
    eig = linalg.hermitian_eig(rho)
    order = np.argsort(-eig.eigenvalues, kind="stable")
    c = eig.eigenvalues[order].copy()
    vecs = eig.eigenvectors[:, order]

    zero = tuple(int(k) for k in np.flatnonzero(c < zero_tol))
    c[list(zero)] = 0.0
    rank = len(c) - len(zero)

    partition: list[tuple[int, ...]] = []
    current: list[int] = []
    for k in range(rank):
        if current and c[k - 1] - c[k] > grouping_tol:
            partition.append(tuple(current))
            current = []
        current.append(k)
    if current:
        partition.append(tuple(current))

    for arr in (c, vecs):
        arr.setflags(write=False)
    return EnvironmentState(
        rho=rho,
        eigenvalues=c,
        eigenvectors=vecs,
        partition=tuple(partition),
        zero_subspace=zero,
        grouping_tol=grouping_tol,
        zero_tol=zero_tol,
    )


def build_thermal(h, beta: float) -> np.ndarray:
    """Gibbs state ``exp(-beta h) / Tr exp(-beta h)``."""
    if beta < 0:
        raise ContractError(f"beta must be non-negative, got {beta}")
    eig = linalg.hermitian_eig(h)
    e = eig.eigenvalues
    # shift by the ground energy so large beta does not overflow
    weights = np.exp(-beta * (e - e[0]))
    weights /= weights.sum()
    v = eig.eigenvectors
    return (v * weights) @ v.conj().T


def completely_mixed(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex) / n


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    """Hermitian part of a matrix with standard complex normal entries."""
    x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    return 0.5 * (x + x.conj().T)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-random unitary via QR with the diagonal phase fix."""
    x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(x)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_qubit(rng: np.random.Generator, min_weight: float = 0.05) -> QubitState:
    """Random superposition with ``|a|^2`` and ``|b|^2`` both at least ``min_weight``."""
    p = rng.uniform(min_weight, 1.0 - min_weight)
    phi = rng.uniform(0.0, 2 * np.pi)
    return QubitState(np.sqrt(p), np.exp(1j * phi) * np.sqrt(1.0 - p))


def random_partition(rng: np.random.Generator, n: int) -> list[list[int]]:
    """Split ``range(n)`` into at least two contiguous non-empty groups."""
    n_groups = int(rng.integers(2, n + 1))
    cuts = np.sort(rng.choice(np.arange(1, n), size=n_groups - 1, replace=False))
    bounds = [0, *cuts.tolist(), n]
    return [list(range(bounds[k], bounds[k + 1])) for k in range(n_groups)]


def build_random_model(env_dim: int, model_class: ModelClass, seed: int,
                       beta: float | None = None) -> tuple[PureDephasingModel, np.ndarray]:
    """
    Draw a seeded model of the requested class together with ``rho_E(0)``.

    ``generic``
        ``H_E``, ``V_0``, ``V_1`` independent random Hermitian matrices;
        ``rho_E`` thermal in ``H_E`` at ``beta ~ U[0.1, 2]``.
    ``random_unitary``
        ``H_E``, ``V_0``, ``V_1`` diagonal in one random basis and ``rho_E``
        thermal in ``H_E``, so nothing the qubit does moves the occupations.
    ``block_preserving``
        ``H_0`` and ``H_1`` block-diagonal on a random partition with at
        least two blocks, ``rho_E`` constant on each block with distinct
        values, everything rotated by one random basis change.

    ``beta`` overrides the drawn inverse temperature of the thermal classes
    without changing any other matrix.
    """
    if env_dim < 2:
        raise DimensionError(f"env_dim must be at least 2, got {env_dim}")
    rng = np.random.default_rng(seed)
    n = env_dim
    eps0, eps1 = rng.uniform(-1.0, 1.0, size=2)

    if model_class == "generic":
        h_env, v0, v1 = (random_hermitian(rng, n) for _ in range(3))
        drawn = rng.uniform(0.1, 2.0)
        rho = build_thermal(h_env, drawn if beta is None else beta)
    elif model_class == "random_unitary":
        u = random_unitary(rng, n)
        e, d0, d1 = (rng.standard_normal(n) for _ in range(3))
        h_env, v0, v1 = (u @ np.diag(x) @ u.conj().T for x in (e, d0, d1))
        drawn = rng.uniform(0.1, 2.0)
        rho = build_thermal(h_env, drawn if beta is None else beta)
    elif model_class == "block_preserving":
        groups = random_partition(rng, n)
        mats = []
        for _ in range(3):
            m = np.zeros((n, n), dtype=complex)
            for g in groups:
                m[np.ix_(g, g)] = random_hermitian(rng, len(g))
            mats.append(m)
        levels = np.arange(1, len(groups) + 1) + rng.uniform(0.0, 0.5, size=len(groups))
        levels = rng.permutation(levels)
        diag = np.empty(n)
        for g, level in zip(groups, levels):
            diag[g] = level
        diag /= diag.sum()
        u = random_unitary(rng, n)
        h_env, v0, v1 = (u @ m @ u.conj().T for m in mats)
        rho = u @ np.diag(diag) @ u.conj().T
    else:
        raise ValueError(f"unknown model class {model_class!r}")

    herm = [0.5 * (m + m.conj().T) for m in (h_env, v0, v1)]
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return PureDephasingModel(float(eps0), float(eps1), *herm), rho


def _site_operator(op: np.ndarray, site: int, n_spins: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for k in range(n_spins):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def build_ising_bath(n_spins: int, couplings, field: float,
                     eps0: float = 0.0, eps1: float = 0.0) -> PureDephasingModel:
    """
    Non-interacting spin bath in a transverse field.

    ``V_0 = 0``, ``V_1 = sum_k g_k sigma_z^(k)`` and
    ``H_E = field * sum_k sigma_x^(k)``.
    """
    if not 1 <= n_spins <= 8:
        raise DimensionError(f"n_spins must be in [1, 8], got {n_spins}")
    couplings = list(couplings)
    if len(couplings) != n_spins:
        raise DimensionError(f"expected {n_spins} couplings, got {len(couplings)}")
    dim = 2**n_spins
    h_env = np.zeros((dim, dim), dtype=complex)
    v1 = np.zeros((dim, dim), dtype=complex)
    for k, g in enumerate(couplings):
        h_env += field * _site_operator(linalg.PAULI_X, k, n_spins)
        v1 += g * _site_operator(linalg.PAULI_Z, k, n_spins)
    return PureDephasingModel(eps0, eps1, h_env, np.zeros((dim, dim), dtype=complex), v1)
