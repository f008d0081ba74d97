"""Commuting contraction tuples, their product contraction, and instance generators."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .errors import InvalidTupleError
from .linalg import op_norm
from .report import ValidationReport

STRICT_MARGIN = 0.9
POLY_NORM = 0.95


@dataclass(frozen=True)
class OperatorTuple:
    """A d-tuple of n x n complex matrices (no validation beyond shapes)."""

    T: tuple

    def __post_init__(self):
        mats = tuple(np.array(A, dtype=complex) for A in self.T)
        if not mats:
            raise InvalidTupleError("tuple must contain at least one operator")
        n = mats[0].shape[0] if mats[0].ndim == 2 else -1
        for A in mats:
            if A.ndim != 2 or A.shape != (n, n):
                raise InvalidTupleError(f"operators must all be square of size {n}, got {A.shape}")
            if not np.all(np.isfinite(A)):
                raise InvalidTupleError("operator has non-finite entries")
            A.setflags(write=False)
        object.__setattr__(self, "T", mats)

    @property
    def n(self) -> int:
        return self.T[0].shape[0]

    @property
    def d(self) -> int:
        return len(self.T)

    def __iter__(self):
        return iter(self.T)

    def __getitem__(self, j):
        return self.T[j]


def validate(t: OperatorTuple, val_tol: float = 1e-10) -> ValidationReport:
    rep = ValidationReport()
    for i in range(t.d):
        for j in range(i + 1, t.d):
            res = op_norm(t[i] @ t[j] - t[j] @ t[i])
            rep.add(f"commute[{i},{j}]", res, val_tol, tag="standing-hypothesis")
    for i in range(t.d):
        rep.add(f"contractive[{i}]", max(0.0, op_norm(t[i]) - 1.0), val_tol, tag="standing-hypothesis")
    if t.d == 1:
        rep.notes.append("d = 1: the polydisk setting assumes d >= 2; all constructions still apply")
    return rep


def product_contraction(t: OperatorTuple) -> np.ndarray:
    """Ordered product T_1 T_2 ... T_d."""
    return reduce(np.matmul, t.T)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix with phase fix."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Qm, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Qm * ph


def conjugate(t: OperatorTuple, V: np.ndarray) -> OperatorTuple:
    """The tuple (V T_j V*) for a unitary V."""
    V = np.asarray(V, dtype=complex)
    return OperatorTuple(tuple(V @ A @ V.conj().T for A in t))


def _joint_unimodular_points(p: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """p joint eigenvalue points on the d-torus whose products are well separated.

    The product phases sit on a jittered grid (gap >= pi / p), which keeps the
    Cesaro averages of the conjugation map away from slow near-resonance.
    """
    offset = rng.uniform(0, 2 * np.pi)
    prod_phase = offset + 2 * np.pi * (np.arange(p) + 0.5 * rng.uniform(size=p)) / max(p, 1)
    theta = rng.uniform(0, 2 * np.pi, size=(d, p))
    theta[-1] = prod_phase - theta[:-1].sum(axis=0)
    return np.exp(1j * theta)


def gen_commuting_normal(n: int, d: int, unimodular_count: int, seed: int,
                         distinct: int | None = None) -> OperatorTuple:
    """Commuting normal contractions T_j = V D_j V* with V Haar random.

    The first ``unimodular_count`` diagonal coordinates are unimodular in every
    D_j; the rest have modulus at most 0.9 in every D_j. ``distinct`` limits the
    number of distinct joint unimodular eigenvalues, giving repeated eigenvalues
    (and non-abelian commutants) when it is smaller than ``unimodular_count``.
    """
    if n < 0 or d < 1 or not 0 <= unimodular_count <= n:
        raise ValueError(f"bad counts n={n}, d={d}, unimodular_count={unimodular_count}")
    p = unimodular_count if distinct is None else distinct
    if unimodular_count and not 1 <= p <= unimodular_count:
        raise ValueError(f"distinct must lie in [1, {unimodular_count}]")
    rng = np.random.default_rng(seed)
    V = haar_unitary(n, rng)
    D = np.zeros((d, n), dtype=complex)
    if unimodular_count:
        pts = _joint_unimodular_points(p, d, rng)
        assign = np.concatenate([np.arange(p), rng.integers(0, p, size=unimodular_count - p)])
        D[:, :unimodular_count] = pts[:, assign]
    k = n - unimodular_count
    radii = STRICT_MARGIN * rng.uniform(size=(d, k))
    D[:, unimodular_count:] = radii * np.exp(2j * np.pi * rng.uniform(size=(d, k)))
    return OperatorTuple(tuple((V * D[j]) @ V.conj().T for j in range(d)))


def gen_poly_tuple(n: int, d: int, seed: int, nilpotent: bool = False) -> OperatorTuple:
    """T_j = c_j p_j(M) with M random upper triangular and deg p_j <= 2, ||T_j|| = 0.95."""
    if n < 0 or d < 1:
        raise ValueError(f"bad counts n={n}, d={d}")
    rng = np.random.default_rng(seed)
    M = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), k=1 if nilpotent else 0)
    if n:
        M /= max(op_norm(M), 1e-12)
    ops = []
    for _ in range(d):
        while True:
            c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            A = c[0] * np.eye(n) + c[1] * M + c[2] * (M @ M)
            nrm = op_norm(A)
            if n == 0 or nrm > 1e-6:
                break
        ops.append(A * (POLY_NORM / nrm) if n else A)
    return OperatorTuple(tuple(ops))


def gen_mixed_direct_sum(t_unitary: OperatorTuple, t_pure: OperatorTuple) -> OperatorTuple:
    """Blockwise direct sum T_j = T_j^unitary (+) T_j^pure."""
    if t_unitary.d != t_pure.d:
        raise ValueError(f"tuple lengths differ: {t_unitary.d} vs {t_pure.d}")
    return OperatorTuple(tuple(scipy.linalg.block_diag(A, B) for A, B in zip(t_unitary, t_pure)))


def empty_tuple(d: int) -> OperatorTuple:
    return OperatorTuple(tuple(np.zeros((0, 0), dtype=complex) for _ in range(d)))
