"""Asymptotic limit Q = lim P*^n P^n, purity of P*, and the compression inequalities."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (IndeterminatePurityError, InconsistentCertificateError,
                     InvalidTupleError, NonConvergenceError)
from .linalg import min_eig, op_norm, spectral_radius
from .report import ValidationReport
from .tuples import OperatorTuple, product_contraction

log = logging.getLogger(__name__)

PURITY_TOL = 1e-6
FAST_PATH_MARGIN = 1e-4
# eigenvalues of a contraction with modulus this close to 1 are treated as unimodular
UNIMODULAR_TOL = 1e-9
MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class AsymptoticLimit:
    Q: np.ndarray
    iterations: int
    residual: float
    pure: bool
    spectral_radius: float
    indeterminate: bool = False


def asymptotic_limit(P: np.ndarray, tol: float = 1e-12, max_doublings: int = 60,
                     purity_tol: float = PURITY_TOL) -> AsymptoticLimit:
    """Limit of P*^n P^n by repeated squaring P -> P^2 -> P^4 -> ...

    Each iterate Q_k = (P^(2^k))* P^(2^k) must not increase in the PSD order;
    iteration stops once successive iterates agree to ``tol``.
    """
    P = np.asarray(P, dtype=complex)
    n = P.shape[0]
    if op_norm(P) > 1 + 1e-8:
        raise InvalidTupleError(f"product is not a contraction (norm {op_norm(P):.12g})")
    rho = spectral_radius(P)
    if n == 0 or rho <= 1 - FAST_PATH_MARGIN:
        return AsymptoticLimit(np.zeros((n, n), dtype=complex), 0, 0.0, True, rho)
    moduli = np.abs(np.linalg.eigvals(P))
    indeterminate = bool(np.any((moduli > 1 - FAST_PATH_MARGIN) & (moduli < 1 - UNIMODULAR_TOL)))

    R = P.copy()
    Q = R.conj().T @ R
    residual = np.inf
    for k in range(1, max_doublings + 1):
        R = R @ R
        Q_next = R.conj().T @ R
        drop = min_eig(Q - Q_next)
        if drop < -MONOTONE_TOL:
            raise NonConvergenceError(
                f"iterates not monotone at doubling {k} (min eigenvalue {drop:.3e})", drop, k)
        residual = op_norm(Q_next - Q)
        Q = Q_next
        if residual <= tol:
            break
    else:
        raise NonConvergenceError(
            f"no convergence after {max_doublings} doublings (residual {residual:.3e})",
            residual, max_doublings)
    Q = (Q + Q.conj().T) / 2
    log.debug("asymptotic limit: %d doublings, residual %.2e", k, residual)
    return AsymptoticLimit(Q, k, float(residual), op_norm(Q) <= purity_tol, rho, indeterminate)


def is_adjoint_pure(t: OperatorTuple, limit: AsymptoticLimit | None = None,
                    purity_tol: float = PURITY_TOL) -> bool:
    """True iff P* is pure; cross-checks the limit against the spectral radius."""
    P = product_contraction(t)
    if limit is None:
        limit = asymptotic_limit(P, purity_tol=purity_tol)
    if limit.indeterminate:
        raise IndeterminatePurityError(
            "product has eigenvalues in the band (1 - 1e-4, 1); purity is indeterminate")
    by_norm = op_norm(limit.Q) <= purity_tol
    by_radius = limit.spectral_radius < 1 - UNIMODULAR_TOL
    if by_norm != by_radius:
        raise InconsistentCertificateError(
            f"purity certificates disagree: ||Q|| = {op_norm(limit.Q):.3e}, "
            f"spectral radius = {limit.spectral_radius:.15f}")
    return by_norm


def verify_compression_inequality(t: OperatorTuple, Q: np.ndarray, tol: float = 1e-8) -> ValidationReport:
    """Q - T_j* Q T_j is PSD for every j, and P* Q P = Q."""
    rep = ValidationReport()
    for j, T in enumerate(t):
        rep.add(f"compression[{j}]", max(0.0, -min_eig(Q - T.conj().T @ Q @ T)), tol,
                tag="compression-inequality")
    P = product_contraction(t)
    rep.add("product-invariance", op_norm(P.conj().T @ Q @ P - Q), tol, tag="asymptotic-limit")
    return rep
