"""
Dense complex linear algebra for qubit-environment systems.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Joint
qubit-environment operators use the index convention

    joint index = qubit_index * N + env_index

so a ``2N x 2N`` matrix splits into four ``N x N`` blocks ``[[A, B], [C, D]]``
labelled by the qubit indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ContractError, DimensionError

#: Largest joint dimension any constructor is allowed to produce.
MAX_DIM = 4096

HERMITIAN_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class HermitianEig:
    """Spectral decomposition ``H = V diag(eigenvalues) V^dagger``.

    Eigenvalues are ascending; eigenvectors are the columns of ``V``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a square, finite complex128 array or raise."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if arr.shape[0] > MAX_DIM:
        raise DimensionError(f"{name} dimension {arr.shape[0]} exceeds MAX_DIM={MAX_DIM}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, "fro"))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_defect(h: np.ndarray) -> float:
    """Relative Frobenius distance from ``h`` to ``h^dagger``."""
    scale = frobenius(h)
    if scale == 0.0:
        return 0.0
    return frobenius(h - dagger(h)) / scale


def kron(a, b) -> np.ndarray:
    """Kronecker product with the slow index on ``a``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise DimensionError(f"kron dimension {dim} exceeds MAX_DIM={MAX_DIM}")
    return np.kron(a, b)


def hermitian_eig(h, tol: float = HERMITIAN_TOL) -> HermitianEig:
    """
    Eigendecompose a Hermitian matrix.

    Parameters
    ----------
    h : array_like
        Square matrix with ``||h - h^dagger||_F <= tol * ||h||_F``.
    tol : float
        Relative Hermiticity tolerance.

    Returns
    -------
    HermitianEig
        Ascending real eigenvalues and orthonormal eigenvectors.

    Raises
    ------
    ContractError
        If ``h`` is not Hermitian within ``tol``; the message carries the
        measured defect.
    """
    h = as_matrix(h, "h")
    defect = hermiticity_defect(h)
    if defect > tol:
        raise ContractError(
            f"matrix is not Hermitian: ||h - h^dagger||_F / ||h||_F = {defect:.3e} > {tol:.1e}"
        )
    # LAPACK only reads one triangle; symmetrize so both halves contribute.
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return HermitianEig(eigenvalues=w, eigenvectors=v)


def unitary_exp(h, t: float) -> np.ndarray:
    """Return ``exp(-i h t)`` computed through the spectral decomposition of ``h``."""
    eig = hermitian_eig(h)
    v = eig.eigenvectors
    phases = np.exp(-1j * eig.eigenvalues * t)
    return (v * phases) @ dagger(v)


def _check_bipartite(s, env_dim: int) -> np.ndarray:
    s = as_matrix(s, "state")
    if env_dim < 1 or s.shape[0] != 2 * env_dim:
        raise DimensionError(f"state dimension {s.shape[0]} is not 2 * env_dim = {2 * env_dim}")
    return s


def blocks(s: np.ndarray, env_dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a ``2N x 2N`` matrix into its qubit blocks ``A, B, C, D``."""
    n = env_dim
    return s[:n, :n], s[:n, n:], s[n:, :n], s[n:, n:]


def partial_transpose_qubit(s, env_dim: int) -> np.ndarray:
    """Transpose the qubit indices: ``[[A, B], [C, D]] -> [[A, C], [B, D]]``."""
    s = _check_bipartite(s, env_dim)
    a, b, c, d = blocks(s, env_dim)
    return np.block([[a, c], [b, d]])


def partial_transpose_env(s, env_dim: int) -> np.ndarray:
    """Transpose the environment indices: every block is transposed in place."""
    s = _check_bipartite(s, env_dim)
    a, b, c, d = blocks(s, env_dim)
    return np.block([[a.T, b.T], [c.T, d.T]])


def partial_trace(s, env_dim: int, keep: Literal["qubit", "environment"]) -> np.ndarray:
    """Trace out one side of a qubit-environment operator."""
    s = _check_bipartite(s, env_dim)
    a, b, c, d = blocks(s, env_dim)
    if keep == "environment":
        return a + d
    if keep == "qubit":
        return np.array([[np.trace(a), np.trace(b)], [np.trace(c), np.trace(d)]], dtype=complex)
    raise ValueError(f"keep must be 'qubit' or 'environment', got {keep!r}")


def norms_and_psd(s, tol: float = HERMITIAN_TOL) -> dict[str, float]:
    """Frobenius norm, trace norm and smallest eigenvalue of a Hermitian matrix."""
    s = as_matrix(s, "s")
    eig = hermitian_eig(s, tol)
    lam = eig.eigenvalues
    return {
        "frobenius": frobenius(s),
        "trace_norm": float(np.sum(np.abs(lam))),
        "min_eigenvalue": float(lam[0]),
    }


def trace_norm(s) -> float:
    """Sum of singular values; valid for any square matrix."""
    return float(np.sum(np.linalg.svd(as_matrix(s, "s"), compute_uv=False)))


def determinant(s) -> complex:
    """Determinant by Gaussian elimination with partial pivoting."""
    m = as_matrix(s, "s").copy()
    n = m.shape[0]
    det = 1.0 + 0.0j
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if m[p, k] == 0:
            return 0.0 + 0.0j
        if p != k:
            m[[k, p]] = m[[p, k]]
            det = -det
        pivot = m[k, k]
        det *= pivot
        if k + 1 < n:
            factors = m[k + 1 :, k] / pivot
            m[k + 1 :, k:] -= np.outer(factors, m[k, k:])
    return complex(det)


def validate_density_matrix(rho, name: str = "density matrix", *, psd_tol: float = 1e-9,
                            trace_tol: float = 1e-10, herm_tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return the array."""
    rho = as_matrix(rho, name)
    defect = hermiticity_defect(rho)
    if defect > herm_tol:
        raise ContractError(f"{name} is not Hermitian (relative defect {defect:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ContractError(f"{name} has trace {tr.real:.12g}, expected 1")
    lam_min = float(np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0])
    if lam_min < -psd_tol:
        raise ContractError(f"{name} is not positive semidefinite (min eigenvalue {lam_min:.3e})")
    return rho


def is_density_matrix(rho, **kwargs) -> bool:
    try:
        validate_density_matrix(rho, **kwargs)
    except (ContractError, DimensionError):
        return False
    return True
