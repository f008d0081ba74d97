"""The idempotent completely positive map Phi onto T(P), the Toeplitz C*-algebra,
its minimal Stinespring dilation, and the second (Stinespring) construction of
the canonical unitary pseudo-extension together with the structure maps

    Gamma(Y) = J* Y J,    pi,    Theta(X) = pi(Q X).

Phi is the limit of the Cesaro means (1/N) sum_{k=1..N} P*^k X P^k. The
conjugation map C is a contraction in Hilbert-Schmidt norm, so its fixed space
E = ker(C - I) is complementary and orthogonal to everything else, and
C^k = E + D^k with D = C - E. The Cesaro means are computed as
E + (1/N) sum D^k; this keeps the growing fixed-space component out of the
doubling recursion, where repeated squaring would otherwise drift by ~N*eps.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import asymptotic_limit
from .errors import ConstructionError, NonConvergenceError, NoPseudoExtensionError
from .linalg import (SubspaceBasis, min_eig, null_space, numerical_rank, op_norm,
                     orthonormalize, range_basis, same_subspace, unvec, vec)
from .pseudoext import PseudoExtension
from .report import ValidationReport
from .toeplitz import (NULL_TOL, OperatorSubspace, commutant_basis, is_toeplitz, span_of,
                       toeplitz_basis)
from .tuples import OperatorTuple, product_contraction

log = logging.getLogger(__name__)

GRAM_CUTOFF = 1e-10
CESARO_TOL = 1e-7
MAX_CESARO_TERMS = 2 ** 44


@dataclass(frozen=True)
class CPProjection:
    n: int
    L: np.ndarray
    cesaro_terms: int
    residual: float
    conj_map: np.ndarray = field(repr=False, default=None)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return unvec(self.L @ vec(X), self.n)

    def cesaro_mean(self, N: int) -> np.ndarray:
        """The N-th Cesaro mean (1/N) sum_{k=1..N} C^k as an n^2 x n^2 matrix."""
        D = self.conj_map - self.L
        return self.L + _power_sum(D, N) / N

    def choi(self) -> np.ndarray:
        """sum_ij E_ij kron Phi(E_ij)."""
        n = self.n
        out = np.zeros((n * n, n * n), dtype=complex)
        for i in range(n):
            for j in range(n):
                Eij = np.zeros((n, n))
                Eij[i, j] = 1.0
                out[i * n:(i + 1) * n, j * n:(j + 1) * n] = self(Eij)
        return out


def _power_sum(D: np.ndarray, N: int) -> np.ndarray:
    """sum_{k=1..N} D^k by binary splitting."""
    if N == 0:
        return np.zeros_like(D)
    if N == 1:
        return D.copy()
    half = _power_sum(D, N // 2)
    Dh = np.linalg.matrix_power(D, N // 2)
    S = half + Dh @ half
    if N % 2:
        S = S + Dh @ Dh @ D
    return S


def conjugation_map(P: np.ndarray) -> np.ndarray:
    """vec(P* X P) = (P^T kron P*) vec(X)."""
    P = np.asarray(P, dtype=complex)
    return np.kron(P.T, P.conj().T)


def phi_projection(P: np.ndarray, tol: float = CESARO_TOL,
                   max_terms: int = MAX_CESARO_TERMS) -> CPProjection:
    P = np.asarray(P, dtype=complex)
    n = P.shape[0]
    if op_norm(P) > 1 + 1e-8:
        raise ValueError("phi_projection: P is not a contraction")
    C = conjugation_map(P)
    F = null_space(C - np.eye(n * n), NULL_TOL).vectors
    E = F @ F.conj().T
    split = max(op_norm(C @ E - E), op_norm(E @ C - E))
    if split > 1e-8:
        raise ConstructionError(f"fixed-space projection does not commute with C ({split:.3e})")
    D = C - E
    N, S, DN = 1, D.copy(), D.copy()
    while True:
        S2 = S + DN @ S
        residual = op_norm(S / N - S2 / (2 * N))
        DN = DN @ DN
        S, N = S2, 2 * N
        if residual <= tol:
            break
        if N >= max_terms:
            raise NonConvergenceError(
                f"Cesaro means did not settle within {max_terms} terms (residual {residual:.3e})",
                residual, N)
    log.debug("Cesaro means settled at N = %d (residual %.2e)", N, residual)
    return CPProjection(n, E, N, float(residual), C)


def _sample_blocks(space: OperatorSubspace, k: int, rng) -> list[list[np.ndarray]]:
    return [[space.random_element(rng) for _ in range(k)] for _ in range(k)]


def _random_matrix(n, rng):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)


def verify_phi(phi: CPProjection, P: np.ndarray, t: OperatorTuple | None = None, tol: float = 1e-7,
               Q: np.ndarray | None = None, levels: int = 3, samples: int = 20,
               module_samples: int = 10, seed: int = 0) -> ValidationReport:
    rng = np.random.default_rng(seed)
    n = phi.n
    L = phi.L
    rep = ValidationReport()
    rep.notes.append("Phi realized as the limit of Cesaro means (stand-in for a Banach limit)")
    rep.add("cesaro-residual", phi.residual, CESARO_TOL, tag="cp-projection")
    rep.add("idempotent", op_norm(L @ L - L), tol, tag="cp-projection")
    if Q is None:
        Q = asymptotic_limit(P).Q
    rep.add("phi(I)=Q", op_norm(phi(np.eye(n)) - Q), tol, tag="cp-projection")
    rep.add("choi-psd", max(0.0, -min_eig(phi.choi())), 1e-8, tag="complete-positivity")
    T_P = toeplitz_basis(OperatorTuple((P,)))
    ok, angle = same_subspace(range_basis(L), T_P.basis, 1e-6)
    rep.add("range=T(P)", angle, 1e-6, tag="cp-projection")

    worst = 0.0
    for k in range(1, levels + 1):
        for _ in range(samples):
            blocks = [[_random_matrix(n, rng) for _ in range(k)] for _ in range(k)]
            big = np.block(blocks)
            img = np.block([[phi(b) for b in row] for row in blocks])
            worst = max(worst, op_norm(img) - op_norm(big))
    rep.add("complete-contraction", max(0.0, worst), 1e-8, tag="complete-positivity")

    comm = commutant_basis([P])
    worst = 0.0
    for _ in range(module_samples):
        A, B = comm.random_element(rng), comm.random_element(rng)
        X = _random_matrix(n, rng)
        worst = max(worst, op_norm(phi(A @ X @ B) - A @ phi(X) @ B))
    rep.add("module-property", worst, tol, tag="cp-projection")

    alg = generate_cstar(T_P)
    w1 = w2 = 0.0
    for _ in range(samples):
        X, Y = alg.random_element(rng), alg.random_element(rng)
        a = phi(phi(X) @ Y)
        w1 = max(w1, op_norm(a - phi(X @ phi(Y))))
        w2 = max(w2, op_norm(a - phi(phi(X) @ phi(Y))))
    rep.add("choi-effros[PhiX.Y=X.PhiY]", w1, tol, tag="choi-effros")
    rep.add("choi-effros[PhiX.Y=PhiX.PhiY]", w2, tol, tag="choi-effros")
    return rep


@dataclass(frozen=True)
class CStarAlgebra(OperatorSubspace):
    def unit_coords(self) -> np.ndarray:
        return self.coords(np.eye(self.n))


def closure_residuals(alg: OperatorSubspace) -> tuple[float, float, float]:
    """(unit residual, adjoint residual, product residual) of a claimed algebra."""
    mats = alg.matrices()
    unit = alg.residual(np.eye(alg.n))
    adj = max((alg.residual(A.conj().T) for A in mats), default=0.0)
    prod = max((alg.residual(A @ B) for A in mats for B in mats), default=0.0)
    return unit, adj, prod


def generate_cstar(seed_space: OperatorSubspace, tol: float = 1e-9,
                   max_dim: int | None = None) -> CStarAlgebra:
    """Smallest unital *-closed, product-closed space containing ``seed_space``."""
    n = seed_space.n
    max_dim = n * n if max_dim is None else max_dim
    M = np.column_stack([vec(np.eye(n))] + [vec(A) for A in seed_space.matrices()])
    basis = orthonormalize(M, tol).vectors
    while True:
        mats = np.stack([unvec(v, n) for v in basis.T])
        prods = np.einsum("aij,bjk->abik", mats, mats).reshape(-1, n, n)
        cand = np.concatenate([mats.conj().transpose(0, 2, 1), prods])
        cand_vec = cand.transpose(0, 2, 1).reshape(len(cand), -1).T
        new = orthonormalize(np.hstack([basis, cand_vec]), tol).vectors
        if new.shape[1] > max_dim:
            raise ConstructionError(f"C*-closure exceeded {max_dim} dimensions")
        if new.shape[1] == basis.shape[1]:
            break
        basis = new
    return CStarAlgebra(n, SubspaceBasis(n * n, basis), "cstar")


@dataclass(frozen=True)
class StinespringTriple:
    """Minimal Stinespring dilation Phi(a) = J* pi(a) J on an algebra.

    ``pi_images[a]`` is pi of the a-th algebra basis element; ``pi_matrix`` has
    columns vec(pi(A_a)) and is the linear map from algebra coordinates.
    """

    k: int
    pi_images: tuple
    J: np.ndarray
    algebra: CStarAlgebra = field(repr=False)
    gram_eigenvalues: np.ndarray = field(repr=False, default=None)
    pi_matrix: np.ndarray = field(repr=False, init=False)

    def __post_init__(self):
        pm = (np.column_stack([vec(p) for p in self.pi_images]) if self.pi_images
              else np.zeros((self.k * self.k, 0), dtype=complex))
        object.__setattr__(self, "pi_matrix", pm)

    def pi(self, x: np.ndarray, tol: float | None = None) -> np.ndarray:
        if tol is not None:
            res = self.algebra.residual(x)
            if res > tol * max(1.0, np.linalg.norm(x)):
                raise ConstructionError(f"element is not in the algebra (residual {res:.3e})")
        c = self.algebra.coords(x)
        return unvec(self.pi_matrix @ c, self.k)


def stinespring(alg: CStarAlgebra, phi: CPProjection, cutoff: float = GRAM_CUTOFF) -> StinespringTriple:
    """Quotient of alg (x) C^n by the kernel of <a(x)h, b(x)g> = <Phi(b* a) h, g>."""
    n = alg.n
    A = np.stack(alg.matrices())
    q = len(A)
    prods = np.einsum("bji,ajk->baik", A.conj(), A)  # A_b* A_a
    vecs = prods.transpose(0, 1, 3, 2).reshape(q * q, n * n)
    Y = (vecs @ phi.L.T).reshape(q, q, n, n).transpose(0, 1, 3, 2)  # Phi(A_b* A_a)
    G = Y.transpose(0, 2, 1, 3).reshape(q * n, q * n)  # G[(b,g),(a,h)] = Phi(A_b*A_a)[g,h]
    herm = op_norm(G - G.conj().T)
    w, V = np.linalg.eigh((G + G.conj().T) / 2)
    top = max(w[-1], 0.0)
    if herm > 1e-8 * max(top, 1.0) or w[0] < -1e-8 * max(top, 1.0):
        raise ConstructionError(
            f"Stinespring Gram is not PSD (min eig {w[0]:.3e}, Hermitian defect {herm:.3e}); "
            "Phi is not completely positive on the algebra")
    keep = w > cutoff * top if top > 0 else np.zeros_like(w, dtype=bool)
    lam, Vk = w[keep], V[:, keep]
    k = int(keep.sum())
    R = np.sqrt(lam)[:, None] * Vk.conj().T
    Rp = Vk / np.sqrt(lam)[None, :]
    basis = alg.basis.vectors
    eye_n = np.eye(n)
    images = []
    for c in range(q):
        left = np.einsum("ij,ajk->aik", A[c], A)  # A_c A_a
        coeff = basis.conj().T @ left.transpose(0, 2, 1).reshape(q, n * n).T  # [b, a]
        images.append(R @ np.kron(coeff, eye_n) @ Rp)
    iota = alg.unit_coords()
    J = R @ np.kron(iota[:, None], eye_n)
    return StinespringTriple(k, tuple(images), J, alg, w)


def verify_stinespring(triple: StinespringTriple, phi: CPProjection, tol: float = 1e-7) -> ValidationReport:
    """Unital, *-preserving, multiplicative on basis products, Stinespring identity, minimal.

    Bulk residuals are Frobenius norms, which bound the operator norms from above.
    """
    rep = ValidationReport()
    alg = triple.algebra
    n, k = alg.n, triple.k
    A = np.stack(alg.matrices())
    q = len(A)
    pis = np.stack(triple.pi_images)
    basis_h = alg.basis.vectors.conj().T
    J = triple.J
    rep.add("pi-unital", op_norm(triple.pi(np.eye(n)) - np.eye(k)), 1e-8, tag="stinespring")

    def pi_many(mats):
        vecs = mats.transpose(0, 2, 1).reshape(len(mats), n * n).T
        out = (triple.pi_matrix @ (basis_h @ vecs)).T.reshape(len(mats), k, k)
        return out.transpose(0, 2, 1)

    adj = np.linalg.norm(pi_many(A.conj().transpose(0, 2, 1)) - pis.conj().transpose(0, 2, 1), axis=(1, 2))
    prods = np.einsum("aij,bjk->abik", A, A).reshape(q * q, n, n)
    pprods = np.einsum("aij,bjk->abik", pis, pis).reshape(q * q, k, k)
    mult = np.linalg.norm(pi_many(prods) - pprods, axis=(1, 2))
    phis = np.stack([phi(a) for a in A])
    ident = np.linalg.norm(phis - np.einsum("ji,ajk,kl->ail", J.conj(), pis, J), axis=(1, 2))
    rep.add("pi-multiplicative", mult.max(initial=0.0), tol, tag="stinespring")
    rep.add("pi-star", adj.max(initial=0.0), 1e-8, tag="stinespring")
    rep.add("stinespring-identity", ident.max(initial=0.0), tol, tag="stinespring")
    span = np.hstack([p @ J for p in triple.pi_images]) if q else np.zeros((k, 0))
    rep.add("minimal", k - numerical_rank(span), 0, tag="stinespring")
    return rep


def canonical_extension_stinespring(t: OperatorTuple, tol: float = 1e-7,
                                    cutoff: float = GRAM_CUTOFF) -> PseudoExtension:
    """U_i = pi(Q T_i) on the minimal Stinespring space of Phi restricted to C*(I, T(P))."""
    P = product_contraction(t)
    limit = asymptotic_limit(P)
    if limit.pure:
        raise NoPseudoExtensionError(
            "no pseudo-extension exists: the product adjoint is pure",
            certificate={"norm_Q": op_norm(limit.Q), "spectral_radius": limit.spectral_radius})
    phi = phi_projection(P)
    T_P = toeplitz_basis(OperatorTuple((P,)))
    alg = generate_cstar(T_P)
    triple = stinespring(alg, phi, cutoff)
    Q = phi(np.eye(t.n))
    U = tuple(triple.pi(Q @ T, tol=1e-7) for T in t)
    U_prod = np.eye(triple.k, dtype=complex)
    for u in U:
        U_prod = U_prod @ u
    eye = np.eye(triple.k)
    info = {
        "phi": phi,
        "algebra": alg,
        "triple": triple,
        "T_P": T_P,
        "product_residual": op_norm(U_prod - triple.pi(Q @ P)),
        "unitarity_defects": [op_norm(u.conj().T @ u - eye) for u in U],
        "intertwining": [op_norm(u @ triple.J - triple.J @ T) for u, T in zip(U, t)],
        "canonical_residual": op_norm(triple.J.conj().T @ triple.J - limit.Q),
    }
    if max(info["unitarity_defects"]) > tol or info["canonical_residual"] > tol:
        raise ConstructionError(
            f"Stinespring route failed: unitarity {max(info['unitarity_defects']):.3e}, "
            f"J*J - Q {info['canonical_residual']:.3e}")
    return PseudoExtension(triple.J, U, canonical=True, route="stinespring", info=info)


def _compress(J: np.ndarray, blocks) -> np.ndarray:
    return np.block([[J.conj().T @ b @ J for b in row] for row in blocks])


def gamma_compression(ext: PseudoExtension, commutant_U: OperatorSubspace | None, t: OperatorTuple,
                      levels: int = 3, samples: int = 20, tol: float = 1e-6, seed: int = 0,
                      toeplitz_T: OperatorSubspace | None = None) -> ValidationReport:
    """Gamma(Y) = J* Y J is a complete isometry from {U}' onto T(T)."""
    rng = np.random.default_rng(seed)
    J = ext.J
    if commutant_U is None:
        commutant_U = commutant_basis(ext.U)
    if toeplitz_T is None:
        toeplitz_T = toeplitz_basis(t)
    rep = ValidationReport()
    images = [J.conj().T @ Y @ J for Y in commutant_U.matrices()]
    into = max((is_toeplitz(G, t)[1] for G in images), default=0.0)
    rep.add("gamma-into-T(T)", into, tol, tag="pseudo-compression")
    rep.add("dim{U}'=dim T(T)", abs(commutant_U.dim - toeplitz_T.dim), 0, tag="pseudo-compression")
    img_space = span_of(images, t.n, "image")
    rep.add("gamma-injective", commutant_U.dim - img_space.dim, 0, tag="pseudo-compression")
    _, angle = same_subspace(img_space.basis, toeplitz_T.basis, 1e-6)
    rep.add("gamma-onto", angle, 1e-6, tag="pseudo-compression")
    for k in range(1, levels + 1):
        worst = 0.0
        for _ in range(samples):
            blocks = _sample_blocks(commutant_U, k, rng)
            worst = max(worst, abs(op_norm(_compress(J, blocks)) - op_norm(np.block(blocks))))
        rep.add(f"complete-isometry[level {k}]", worst, tol, tag="pseudo-compression")
    return rep


def pi_representation(triple: StinespringTriple, toeplitz_T: OperatorSubspace, ext: PseudoExtension,
                      phi: CPProjection, tol: float = 1e-7) -> ValidationReport:
    """pi o Gamma = id on {U}', pi onto {U}', pi = pi o Phi, ker pi = ker Phi."""
    rep = ValidationReport()
    J = ext.J
    comm_U = commutant_basis(ext.U)
    worst = 0.0
    for Y in comm_U.matrices():
        worst = max(worst, op_norm(triple.pi(J.conj().T @ Y @ J) - Y))
    rep.add("pi∘gamma=id", worst, tol, tag="representation")

    alg_T = generate_cstar(toeplitz_T)
    images = [triple.pi(A) for A in alg_T.matrices()]
    rank_T = numerical_rank(np.column_stack([vec(p) for p in images]))
    rep.add("pi-onto-{U}'", abs(rank_T - comm_U.dim), 0, tag="representation")
    comm = max((op_norm(p @ u - u @ p) for p in images for u in ext.U), default=0.0)
    rep.add("pi-values-commute", comm, tol, tag="representation")

    alg = triple.algebra
    mats = alg.matrices()
    worst = max((op_norm(triple.pi(A) - triple.pi(phi(A))) for A in mats), default=0.0)
    rep.add("pi=pi∘phi", worst, tol, tag="representation")
    U = ext.product()
    rank_P = numerical_rank(triple.pi_matrix)
    rep.add("pi(C*(I,T(P)))={U}'", abs(rank_P - commutant_basis([U]).dim), 0, tag="representation")
    phi_rank = numerical_rank(np.column_stack([vec(phi(A)) for A in mats]))
    rep.add("ker pi=ker phi", abs(rank_P - phi_rank), 0, tag="representation")
    return rep


def theta_homomorphism(triple: StinespringTriple, t: OperatorTuple, ext: PseudoExtension,
                       Q: np.ndarray, samples: int = 20, levels: int = 3, tol: float = 1e-7,
                       seed: int = 0, douglas: PseudoExtension | None = None,
                       W: np.ndarray | None = None) -> ValidationReport:
    """Theta(X) = pi(Q X) on {T}': unital, multiplicative, contractive, Theta(X) J = J X."""
    rng = np.random.default_rng(seed)
    J = ext.J
    comm_T = commutant_basis(list(t))
    rep = ValidationReport()
    alg = triple.algebra
    member = max((alg.residual(Q @ X) for X in comm_T.matrices()), default=0.0)
    rep.add("QX-in-algebra", member, tol, tag="commutant-pseudo-extension")

    def theta(X):
        return triple.pi(Q @ X)

    k = triple.k
    rep.add("theta-unital", op_norm(theta(np.eye(t.n)) - np.eye(k)), tol, tag="commutant-pseudo-extension")
    into = ext_err = 0.0
    for X in comm_T.matrices():
        th = theta(X)
        into = max(into, max((op_norm(th @ u - u @ th) for u in ext.U), default=0.0))
        ext_err = max(ext_err, op_norm(th @ J - J @ X))
    rep.add("theta-into-{U}'", into, tol, tag="commutant-pseudo-extension")
    rep.add("theta-extends", ext_err, tol, tag="commutant-pseudo-extension")
    gen = max(op_norm(theta(T) - u) for T, u in zip(t, ext.U))
    rep.add("theta(T_j)=U_j", gen, tol, tag="commutant-pseudo-extension")
    mult = 0.0
    for _ in range(samples):
        X, Y = comm_T.random_element(rng), comm_T.random_element(rng)
        mult = max(mult, op_norm(theta(X @ Y) - theta(X) @ theta(Y)))
    rep.add("theta-multiplicative", mult, tol, tag="commutant-pseudo-extension")
    for lev in range(1, levels + 1):
        worst = 0.0
        for _ in range(samples):
            blocks = _sample_blocks(comm_T, lev, rng)
            img = np.block([[theta(b) for b in row] for row in blocks])
            worst = max(worst, op_norm(img) - op_norm(np.block(blocks)))
        rep.add(f"theta-contractive[level {lev}]", max(0.0, worst), tol, tag="commutant-pseudo-extension")
    if douglas is not None and W is not None:
        from .pseudoext import commutant_extension

        worst = 0.0
        for X in comm_T.matrices():
            Y, _ = commutant_extension(t, douglas, X)
            worst = max(worst, op_norm(W @ Y @ W.conj().T - theta(X)))
        rep.add("theta=douglas-extension", worst, 1e-6, tag="commutant-pseudo-extension")
    return rep
