"""Canonical unitary pseudo-extensions: Douglas-lemma construction, uniqueness
intertwiner, factoring of arbitrary unitary pseudo-extensions, and commutant /
intertwiner extensions.

A pseudo-extension of T = (T_1..T_d) on C^n is (J, U) with J: C^n -> C^m a
nonzero contraction and U_j commuting unitaries on C^m with U_j J = J T_j. It is
canonical when J*J = lim P*^k P^k and the U-words applied to J C^n span C^m.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .asymptotics import AsymptoticLimit, asymptotic_limit
from .errors import ConstructionError, NoPseudoExtensionError, NotIntertwiningError
from .linalg import RANK_TOL, min_eig, nearest_unitary, op_norm, psd_sqrt, range_basis
from .report import ValidationReport
from .tuples import OperatorTuple, product_contraction

UNITARITY_TOL = 1e-8


@dataclass(frozen=True)
class PseudoExtension:
    J: np.ndarray
    U: tuple
    canonical: bool = False
    route: str = "user"
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "J", np.asarray(self.J, dtype=complex))
        object.__setattr__(self, "U", tuple(np.asarray(u, dtype=complex) for u in self.U))

    @property
    def m(self) -> int:
        return self.J.shape[0]

    @property
    def d(self) -> int:
        return len(self.U)

    def product(self) -> np.ndarray:
        out = np.eye(self.m, dtype=complex)
        for u in self.U:
            out = out @ u
        return out


def _no_extension(limit: AsymptoticLimit) -> NoPseudoExtensionError:
    return NoPseudoExtensionError(
        "no pseudo-extension exists: the product adjoint is pure, so every Toeplitz "
        "operator vanishes",
        certificate={"norm_Q": op_norm(limit.Q), "spectral_radius": limit.spectral_radius,
                     "pure": True})


def canonical_extension_douglas(t: OperatorTuple, limit: AsymptoticLimit | None = None,
                                unitarity_tol: float = UNITARITY_TOL, snap_unitary: bool = False,
                                rank_tol: float = RANK_TOL) -> PseudoExtension:
    """Canonical extension on Ran Q.

    With B an orthonormal basis of Ran Q, J = B* Q^{1/2} and X_j solves
    X_j J = J T_j (least squares through the pseudo-inverse of J). In finite
    dimensions the isometries X_j are already unitary, so U_j = X_j.
    """
    P = product_contraction(t)
    if limit is None:
        limit = asymptotic_limit(P)
    if limit.pure:
        raise _no_extension(limit)
    S = psd_sqrt(limit.Q, tol=1e-9)
    B = range_basis(limit.Q, rank_tol).vectors
    J = B.conj().T @ S
    J_pinv = np.linalg.pinv(J, rcond=rank_tol)
    X = [J @ T @ J_pinv for T in t]
    m = J.shape[0]
    eye = np.eye(m)
    defects = [op_norm(x.conj().T @ x - eye) for x in X]
    if max(defects) > unitarity_tol:
        raise ConstructionError(f"X_j not unitary (defects {max(defects):.3e})")
    if snap_unitary:
        X = [nearest_unitary(x) for x in X]
    prod = np.eye(m, dtype=complex)
    for x in X:
        prod = prod @ x
    info = {
        "rank_Q": m,
        "unitarity_defects": defects,
        "product_map_residual": op_norm(prod @ J - J @ P),
        "snapped": snap_unitary,
    }
    if snap_unitary:
        info["snap_intertwining_residual"] = max(op_norm(x @ J - J @ T) for x, T in zip(X, t))
    return PseudoExtension(J, tuple(X), canonical=True, route="douglas", info=info)


def word_span(U, J: np.ndarray, rank_tol: float = 1e-9, cap: int | None = None):
    """Breadth-first words in {U_j, U_j*} applied to the columns of J.

    A word is kept only if its columns raise the rank of the span; children of
    kept words are explored, which makes the final span invariant under every
    generator. Returns (words, orthonormal basis of the span). Words are tuples
    of generator indices; index j < d means U_j, index d + j means U_j*.
    """
    U = [np.asarray(u) for u in U]
    d = len(U)
    gens = U + [u.conj().T for u in U]
    m = J.shape[0]
    cap = 4 * max(m, 1) if cap is None else cap
    scale = max(op_norm(J), 1e-300)
    words = [()]
    basis = range_basis(J, rank_tol).vectors
    queue = [((), J)]
    while queue and len(words) < cap:
        word, block = queue.pop(0)
        for g in range(2 * d):
            new = gens[g] @ block
            resid = new - basis @ (basis.conj().T @ new)
            if op_norm(resid) <= rank_tol * scale * 10:
                continue
            basis = range_basis(np.hstack([basis, new]), rank_tol).vectors
            nw = (g,) + word
            words.append(nw)
            queue.append((nw, new))
            if len(words) >= cap:
                break
    return words, basis


def apply_word(word, U, J: np.ndarray) -> np.ndarray:
    d = len(U)
    out = J
    for g in reversed(word):
        out = (U[g] if g < d else U[g - d].conj().T) @ out
    return out


def word_family(words, U, J) -> np.ndarray:
    return np.hstack([apply_word(w, U, J) for w in words])


def verify_pseudo_extension(t: OperatorTuple, e: PseudoExtension, tol: float = 1e-8,
                            Q: np.ndarray | None = None) -> ValidationReport:
    rep = ValidationReport()
    J = e.J
    nJ = op_norm(J)
    rep.add("embedding-nonzero", max(0.0, tol - nJ), 0.0, tag="pseudo-extension")
    rep.add("embedding-contractive", max(0.0, nJ - 1.0), tol, tag="pseudo-extension")
    eye = np.eye(e.m)
    for j, u in enumerate(e.U):
        rep.add(f"unitary[{j}]", op_norm(u.conj().T @ u - eye), tol, tag="pseudo-extension")
    for i in range(e.d):
        for j in range(i + 1, e.d):
            rep.add(f"commute[{i},{j}]", op_norm(e.U[i] @ e.U[j] - e.U[j] @ e.U[i]), tol,
                    tag="pseudo-extension")
    for j, (u, T) in enumerate(zip(e.U, t)):
        rep.add(f"intertwine[{j}]", op_norm(u @ J - J @ T), tol, tag="pseudo-extension")
    if e.canonical:
        if Q is None:
            Q = asymptotic_limit(product_contraction(t)).Q
        rep.add("canonical-embedding", op_norm(J.conj().T @ J - Q), tol, tag="canonical-condition")
        _, basis = word_span(e.U, J)
        rep.add("minimality", e.m - basis.shape[1], 0, tag="canonical-condition")
    return rep


def equivalence_unitary(e1: PseudoExtension, e2: PseudoExtension, tol: float = 1e-6):
    """Unitary W with W U_j = U~_j W and W J = J~, matching word families.

    The Gram matrices of the two word families must coincide (they depend only
    on the tuple and Q); a mismatch signals a non-canonical input.
    """
    words, b1 = word_span(e1.U, e1.J)
    _, b2 = word_span(e2.U, e2.J)
    if b1.shape[1] != b2.shape[1] or b1.shape[1] != e1.m or b2.shape[1] != e2.m:
        raise ConstructionError(
            f"word spans saturate at different dimensions ({b1.shape[1]}/{e1.m} vs "
            f"{b2.shape[1]}/{e2.m})")
    F1 = word_family(words, e1.U, e1.J)
    F2 = word_family(words, e2.U, e2.J)
    gram_gap = op_norm(F1.conj().T @ F1 - F2.conj().T @ F2)
    if gram_gap > tol * max(1.0, op_norm(F1) ** 2):
        raise ConstructionError(f"word-family Gram matrices differ by {gram_gap:.3e}")
    W = F2 @ np.linalg.pinv(F1, rcond=1e-10)
    report = ValidationReport()
    report.add("gram-match", gram_gap, tol, tag="uniqueness")
    report.add("W-unitary", op_norm(W.conj().T @ W - np.eye(e1.m)), tol, tag="uniqueness")
    for j, (u1, u2) in enumerate(zip(e1.U, e2.U)):
        report.add(f"W-intertwine[{j}]", op_norm(W @ u1 - u2 @ W), tol, tag="uniqueness")
    report.add("W-embedding", op_norm(W @ e1.J - e2.J), tol, tag="uniqueness")
    if not report.passed:
        raise ConstructionError("equivalence unitary fails its checks:\n" + report.summary())
    return W, report


def factor_through_canonical(t: OperatorTuple, canon: PseudoExtension, other: PseudoExtension,
                             tol: float = 1e-8, Q: np.ndarray | None = None):
    """Contraction F: K -> L with F J = P_hat and F U_j = W_j F.

    ``other`` = (P_hat, W) is any unitary pseudo-extension. F is defined on the
    canonical word span by w(U) J h -> w(W) P_hat h and is zero off it.
    """
    pre = verify_pseudo_extension(t, replace(other, canonical=False), tol)
    if not pre.passed:
        raise NotIntertwiningError("not a unitary pseudo-extension:\n" + pre.summary())
    if Q is None:
        Q = canon.J.conj().T @ canon.J
    Ph = other.J
    rep = ValidationReport()
    rep.add("dominated-by-Q", max(0.0, -min_eig(Q - Ph.conj().T @ Ph)), tol, tag="factoring")
    words, _ = word_span(canon.U, canon.J)
    F_canon = word_family(words, canon.U, canon.J)
    F_other = word_family(words, other.U, Ph)
    F = F_other @ np.linalg.pinv(F_canon, rcond=1e-10)
    rep.add("factor-contractive", max(0.0, op_norm(F) - 1.0), tol, tag="factoring")
    rep.add("factor-embedding", op_norm(F @ canon.J - Ph), 10 * tol, tag="factoring")
    for j, (u, w) in enumerate(zip(canon.U, other.U)):
        rep.add(f"factor-intertwine[{j}]", op_norm(F @ u - w @ F), 10 * tol, tag="factoring")
    return F, rep


def _pseudo_extend(Xop, J_src, J_dst, rank_tol=RANK_TOL):
    return J_dst @ Xop @ np.linalg.pinv(J_src, rcond=rank_tol)


def commutant_extension(t: OperatorTuple, canon: PseudoExtension, X: np.ndarray, tol: float = 1e-8):
    """Y in {U}' with Y J = J X and ||Y|| <= ||X||, for X in {T}'.

    Y is determined on J C^n, which is all of C^m for a canonical extension.
    """
    X = np.asarray(X, dtype=complex)
    scale = max(1.0, op_norm(X))
    comm = max(op_norm(T @ X - X @ T) for T in t)
    if comm > tol * scale:
        raise NotIntertwiningError(f"X is not in the commutant (residual {comm:.3e})")
    Y = _pseudo_extend(X, canon.J, canon.J)
    rep = ValidationReport()
    for j, u in enumerate(canon.U):
        rep.add(f"Y-commutes[{j}]", op_norm(Y @ u - u @ Y), tol * scale, tag="commutant-extension")
    rep.add("Y-extends", op_norm(Y @ canon.J - canon.J @ X), tol * scale, tag="commutant-extension")
    gap = op_norm(X) - op_norm(Y)
    rep.add("Y-norm-bound", max(0.0, -gap), tol, tag="commutant-extension")
    rep.notes.append(f"norm gap ||X|| - ||Y|| = {gap:.3e}")
    return Y, rep


def intertwiner_extension(tA: OperatorTuple, canonA: PseudoExtension, tB: OperatorTuple,
                          canonB: PseudoExtension, X: np.ndarray, tol: float = 1e-8):
    """Y: K_A -> K_B with Y U_j = U'_j Y, Y J_A = J_B X, ||Y|| <= ||X||, for X T_j = T'_j X."""
    X = np.asarray(X, dtype=complex)
    scale = max(1.0, op_norm(X))
    res = max(op_norm(X @ A - B @ X) for A, B in zip(tA, tB))
    if res > tol * scale:
        raise NotIntertwiningError(f"X does not intertwine the tuples (residual {res:.3e})")
    Y = _pseudo_extend(X, canonA.J, canonB.J)
    rep = ValidationReport()
    if op_norm(X) == 0.0:
        rep.notes.append("degenerate: X = 0 gives Y = 0")
    for j, (u, v) in enumerate(zip(canonA.U, canonB.U)):
        rep.add(f"Y-intertwines[{j}]", op_norm(Y @ u - v @ Y), tol * scale, tag="intertwiner-extension")
    rep.add("Y-extends", op_norm(Y @ canonA.J - canonB.J @ X), tol * scale, tag="intertwiner-extension")
    rep.add("Y-norm-bound", max(0.0, op_norm(Y) - op_norm(X)), tol, tag="intertwiner-extension")
    return Y, rep
