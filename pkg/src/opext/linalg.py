"""Dense complex matrix kernels shared by every other module.

Vectorization uses column stacking throughout, so that

    vec(A @ X @ B) == kron(B.T, A) @ vec(X)

holds for every solver in the package.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

RANK_TOL = 1e-9
KERNEL_TOL = 1e-10


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis stored as the columns of ``vectors``."""

    ambient_dim: int
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def projector(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T

    def residual(self, v: np.ndarray) -> float:
        """Distance from ``v`` to the span."""
        v = np.asarray(v, dtype=complex).reshape(self.ambient_dim)
        return float(np.linalg.norm(v - self.projector() @ v))


def as_cmatrix(A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def adjoint(A: np.ndarray) -> np.ndarray:
    return np.asarray(A).conj().T


def op_norm(A: np.ndarray) -> float:
    """Largest singular value (0 for empty matrices)."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def psd_sqrt(Q: np.ndarray, tol: float = KERNEL_TOL) -> np.ndarray:
    """Square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are clipped to zero; anything more negative,
    or a Hermitian defect above ``tol``, raises ``ValueError``.
    """
    Q = np.asarray(Q, dtype=complex)
    if Q.size == 0:
        return Q.copy()
    scale = max(1.0, op_norm(Q))
    if op_norm(Q - Q.conj().T) > tol * scale:
        raise ValueError("psd_sqrt: matrix is not Hermitian")
    w, V = np.linalg.eigh((Q + Q.conj().T) / 2)
    if w.min() < -tol * scale:
        raise ValueError(f"psd_sqrt: matrix is indefinite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    S = (V * np.sqrt(w)) @ V.conj().T
    return (S + S.conj().T) / 2


def range_basis(A: np.ndarray, rank_tol: float = RANK_TOL) -> SubspaceBasis:
    """Left singular vectors with singular value above ``rank_tol * sigma_max``."""
    A = np.asarray(A, dtype=complex)
    rows = A.shape[0]
    if A.size == 0:
        return SubspaceBasis(rows, np.zeros((rows, 0), dtype=complex))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return SubspaceBasis(rows, np.zeros((rows, 0), dtype=complex))
    r = int(np.sum(s > rank_tol * s[0]))
    return SubspaceBasis(rows, U[:, :r])


def numerical_rank(A: np.ndarray, rank_tol: float = RANK_TOL) -> int:
    return range_basis(A, rank_tol).dim


def null_space(L: np.ndarray, tol: float = KERNEL_TOL) -> SubspaceBasis:
    """Right singular vectors with singular value at most ``tol * max(1, sigma_max)``."""
    L = np.asarray(L, dtype=complex)
    cols = L.shape[1]
    if L.shape[0] == 0:
        return SubspaceBasis(cols, np.eye(cols, dtype=complex))
    _, s, Vh = np.linalg.svd(L, full_matrices=True)
    cutoff = tol * max(1.0, s[0] if s.size else 0.0)
    sig = np.zeros(cols)
    sig[: s.size] = s
    keep = sig <= cutoff
    return SubspaceBasis(cols, Vh.conj().T[:, keep])


def nearest_unitary(A: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Unitary polar factor of a square full-rank matrix."""
    A = np.asarray(A, dtype=complex)
    if A.shape[0] != A.shape[1]:
        raise ValueError("nearest_unitary: matrix must be square")
    U, s, Vh = np.linalg.svd(A)
    if s.size and s[-1] <= rank_tol * s[0]:
        raise ValueError("nearest_unitary: matrix is rank deficient")
    return U @ Vh


def vec(A: np.ndarray) -> np.ndarray:
    return np.asarray(A).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValueError(f"unvec: {v.size} entries cannot form a {rows}x{cols} matrix")
    return v.reshape((rows, cols), order="F")


def orthonormalize(M: np.ndarray, rank_tol: float = RANK_TOL) -> SubspaceBasis:
    return range_basis(M, rank_tol)


def principal_angles(A: SubspaceBasis, B: SubspaceBasis) -> np.ndarray:
    """Principal angles (radians) between two subspaces; empty if either is trivial."""
    if A.dim == 0 or B.dim == 0:
        return np.zeros(0)
    return scipy.linalg.subspace_angles(A.vectors, B.vectors)


def same_subspace(A: SubspaceBasis, B: SubspaceBasis, tol: float = 1e-7) -> tuple[bool, float]:
    """Equality test via dimensions and the largest principal angle."""
    if A.dim != B.dim:
        return False, float("inf")
    angles = principal_angles(A, B)
    worst = float(angles.max()) if angles.size else 0.0
    return worst <= tol, worst


def min_eig(H: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of ``H`` (0 for empty input)."""
    H = np.asarray(H, dtype=complex)
    if H.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((H + H.conj().T) / 2)[0])


def spectral_radius(A: np.ndarray) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def block_norm(blocks) -> float:
    """Operator norm of a square block matrix given as a nested list."""
    return op_norm(np.block([[np.asarray(b) for b in row] for row in blocks]))
