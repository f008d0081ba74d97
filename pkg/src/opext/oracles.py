"""Brute-force oracles for small instances.

None of these use repeated squaring or Kronecker-product identities, so they
share no code path with the main implementations they check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OracleResult:
    quantity: str
    oracle: object
    main: object
    discrepancy: float

    def ok(self, oracle_tol: float = 1e-5) -> bool:
        return self.discrepancy <= oracle_tol


def oracle_Q(P, N: int = 2 ** 16) -> np.ndarray:
    """P*^N P^N with P^N built one factor at a time."""
    P = np.asarray(P, dtype=complex)
    R = np.eye(P.shape[0], dtype=complex)
    for _ in range(N):
        R = R @ P
    return R.conj().T @ R


def oracle_toeplitz_dim(t, tol: float = 1e-9) -> int:
    """Null dimension of the Brown-Halmos constraints, assembled entry by entry.

    Row (i, p, q) holds the coefficient of a_rs in (T_i* A T_i - A)_pq, namely
    conj(T_i[r, p]) * T_i[s, q] - [p == r][q == s].
    """
    mats = [np.asarray(T, dtype=complex) for T in t]
    n = mats[0].shape[0]
    rows = []
    for T in mats:
        for p in range(n):
            for q in range(n):
                row = np.zeros(n * n, dtype=complex)
                for r in range(n):
                    for s in range(n):
                        c = np.conj(T[r, p]) * T[s, q]
                        if p == r and q == s:
                            c -= 1.0
                        row[r * n + s] = c
                rows.append(row)
    M = np.array(rows)
    if M.size == 0:
        return n * n
    s = np.linalg.svd(M, compute_uv=False)
    cutoff = tol * max(1.0, s[0])
    return int(n * n - np.sum(s > cutoff))


def oracle_phi(P, X, N: int = 2 ** 24) -> np.ndarray:
    """(1/N) sum_{k=1..N} P*^k X P^k, summed exactly in blocks.

    Writing k = bB + j (j = 1..B) gives
        sum_k P*^k X P^k = sum_j P*^j (sum_b P_B*^b X P_B^b) P^j,   P_B = P^B,
    so only N/B + 2B stepwise products are needed. Every power is formed by
    repeated multiplication with P (or with P_B), never by squaring.
    """
    P = np.asarray(P, dtype=complex)
    X = np.asarray(X, dtype=complex)
    B = max(1, int(np.sqrt(N)))
    while N % B:
        B -= 1
    PB = np.eye(P.shape[0], dtype=complex)
    for _ in range(B):
        PB = PB @ P
    inner = np.zeros_like(X)
    Z = X.copy()
    for _ in range(N // B):
        inner += Z
        Z = PB.conj().T @ Z @ PB
    total = np.zeros_like(X)
    Pj = np.eye(P.shape[0], dtype=complex)
    for _ in range(B):
        Pj = Pj @ P
        total += Pj.conj().T @ inner @ Pj
    return total / N
