"""Toeplitz spaces and commutants as null spaces of vectorized linear maps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .asymptotics import PURITY_TOL, asymptotic_limit
from .errors import InconsistentCertificateError
from .linalg import SubspaceBasis, null_space, op_norm, orthonormalize, unvec, vec
from .tuples import OperatorTuple, product_contraction

NULL_TOL = 1e-9


@dataclass(frozen=True)
class OperatorSubspace:
    """Linear space of n x n matrices, as an orthonormal basis of vec coordinates."""

    n: int
    basis: SubspaceBasis
    kind: str
    cols: int | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.n if self.cols is None else self.cols

    @property
    def dim(self) -> int:
        return self.basis.dim

    def matrices(self) -> list[np.ndarray]:
        return [unvec(v, *self.shape) for v in self.basis.vectors.T]

    def coords(self, A: np.ndarray) -> np.ndarray:
        return self.basis.vectors.conj().T @ vec(A)

    def from_coords(self, c: np.ndarray) -> np.ndarray:
        return unvec(self.basis.vectors @ np.asarray(c), *self.shape)

    def residual(self, A: np.ndarray) -> float:
        """Distance (Hilbert-Schmidt) from A to the subspace."""
        return self.basis.residual(vec(A))

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return self.from_coords(c / max(np.linalg.norm(c), 1e-300))


def _stacked(maps: list[np.ndarray], size: int) -> np.ndarray:
    if not maps:
        return np.zeros((0, size), dtype=complex)
    return np.vstack(maps)


def toeplitz_basis(t: OperatorTuple, tol: float = NULL_TOL) -> OperatorSubspace:
    """Joint solutions of T_i* A T_i = A (Brown-Halmos relations).

    vec(T* A T) = (T^T kron T*) vec(A), so the space is the null space of the
    stacked maps (T_i^T kron T_i*) - I.
    """
    n = t.n
    eye = np.eye(n * n)
    L = _stacked([np.kron(T.T, T.conj().T) - eye for T in t], n * n)
    return OperatorSubspace(n, null_space(L, tol), "toeplitz")


def intertwiner_basis(A_ops, B_ops, tol: float = NULL_TOL) -> OperatorSubspace:
    """Solutions X (an nb x na matrix) of X A_i = B_i X for all i."""
    A_ops = [np.asarray(A, dtype=complex) for A in A_ops]
    B_ops = [np.asarray(B, dtype=complex) for B in B_ops]
    na, nb = A_ops[0].shape[0], B_ops[0].shape[0]
    # vec(X A) = (A^T kron I) vec X ; vec(B X) = (I kron B) vec X
    maps = [np.kron(A.T, np.eye(nb)) - np.kron(np.eye(na), B) for A, B in zip(A_ops, B_ops)]
    return OperatorSubspace(nb, null_space(_stacked(maps, na * nb), tol), "intertwiner", cols=na)


def commutant_basis(ops, tol: float = NULL_TOL) -> OperatorSubspace:
    """Joint solutions of T_i X = X T_i via the Sylvester maps (I kron T) - (T^T kron I)."""
    ops = [np.asarray(A, dtype=complex) for A in ops]
    n = ops[0].shape[0]
    eye = np.eye(n)
    L = _stacked([np.kron(eye, T) - np.kron(T.T, eye) for T in ops], n * n)
    return OperatorSubspace(n, null_space(L, tol), "commutant")


def is_toeplitz(A: np.ndarray, t: OperatorTuple, tol: float = 1e-8) -> tuple[bool, float]:
    res = max((op_norm(T.conj().T @ A @ T - A) for T in t), default=0.0)
    return res <= tol, res


def adjoint_closure_residual(S: OperatorSubspace) -> float:
    """Largest distance from B* to the span, over basis elements B."""
    return max((S.residual(B.conj().T) for B in S.matrices()), default=0.0)


def span_of(mats, n: int, kind: str, rank_tol: float = 1e-9) -> OperatorSubspace:
    M = np.column_stack([vec(A) for A in mats]) if len(mats) else np.zeros((n * n, 0))
    return OperatorSubspace(n, orthonormalize(M, rank_tol), kind)


def nontriviality_certificate(t: OperatorTuple, purity_tol: float = PURITY_TOL,
                              tol: float = NULL_TOL) -> dict:
    """dim T(T) > 0 must agree with ||Q|| > purity_tol; disagreement raises."""
    P = product_contraction(t)
    limit = asymptotic_limit(P, purity_tol=purity_tol)
    dim = toeplitz_basis(t, tol).dim
    q_norm = op_norm(limit.Q)
    cert = {
        "dim_toeplitz": dim,
        "norm_Q": q_norm,
        "spectral_radius": limit.spectral_radius,
        "nontrivial": dim > 0,
        "non_pure": q_norm > purity_tol,
        "consistent": (dim > 0) == (q_norm > purity_tol),
    }
    if not cert["consistent"]:
        from .io import tuple_to_json

        raise InconsistentCertificateError(
            f"dim T = {dim} but ||Q|| = {q_norm:.3e}", artifact=tuple_to_json(t))
    return cert
