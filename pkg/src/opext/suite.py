"""Instance generation and the per-instance verification pipeline.

``verify_instance`` runs every check family on one tuple and groups the
records into named sections. The fixed 200-instance suite drives both the
``verify-all`` command and the acceptance tests.
"""
from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .asymptotics import PURITY_TOL, asymptotic_limit, is_adjoint_pure, verify_compression_inequality
from .cpstine import (gamma_compression, phi_projection, pi_representation,
                      canonical_extension_stinespring, theta_homomorphism, verify_phi,
                      verify_stinespring)
from .errors import InvalidTupleError, NoPseudoExtensionError
from .linalg import RANK_TOL, numerical_rank, op_norm, same_subspace
from .pseudoext import (PseudoExtension, canonical_extension_douglas, commutant_extension,
                        equivalence_unitary, factor_through_canonical, intertwiner_extension,
                        verify_pseudo_extension)
from .report import ValidationReport
from .toeplitz import (adjoint_closure_residual, commutant_basis, is_toeplitz,
                       nontriviality_certificate, toeplitz_basis)
from .tuples import (OperatorTuple, conjugate, gen_commuting_normal, gen_mixed_direct_sum,
                     gen_poly_tuple, haar_unitary, product_contraction, validate)

log = logging.getLogger(__name__)

KINDS = ("normal", "poly", "mixed")
SUITE_SIZE = 200


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-8
    rank_tol: float = RANK_TOL
    purity_tol: float = PURITY_TOL
    max_doublings: int = 60
    levels: int = 3
    samples: int = 20
    seed: int = 0
    snap_unitary: bool = False

    def __post_init__(self):
        for name in ("tol", "rank_tol", "purity_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.levels < 1 or self.samples < 1 or self.max_doublings < 1:
            raise ValueError("levels, samples and max_doublings must be at least 1")


# ---------------------------------------------------------------- instances

def parse_instance_spec(spec: str) -> tuple[str, dict]:
    """'mixed:n=6,d=3,seed=7' -> ('mixed', {'n': 6, 'd': 3, 'seed': 7})."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind not in KINDS:
        raise InvalidTupleError(f"unknown instance kind {kind!r} (expected one of {', '.join(KINDS)})")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise InvalidTupleError(f"bad parameter {item!r} (expected key=value)")
        try:
            params[key.strip()] = int(val)
        except ValueError:
            raise InvalidTupleError(f"parameter {key!r} must be an integer, got {val!r}") from None
    return kind, params


def format_instance_spec(kind: str, params: dict) -> str:
    return kind + ":" + ",".join(f"{k}={v}" for k, v in params.items())


_ALLOWED = {
    "normal": {"n", "d", "seed", "unimodular", "distinct"},
    "poly": {"n", "d", "seed", "nilpotent"},
    "mixed": {"n", "d", "seed", "unitary", "distinct", "nilpotent", "rotate"},
}


def generate_instance(kind: str, params: dict) -> OperatorTuple:
    """Build a tuple of the given kind.

    normal: n, d, unimodular (default n // 2), distinct, seed.
    poly:   n, d, nilpotent (0/1), seed.
    mixed:  n, d, unitary (default n // 2), distinct, nilpotent, rotate (default 1), seed;
            commuting unitaries on C^unitary plus a poly tuple on the rest, then
            conjugated by a Haar unitary unless rotate=0.
    """
    if kind not in KINDS:
        raise InvalidTupleError(f"unknown instance kind {kind!r}")
    extra = set(params) - _ALLOWED[kind]
    if extra:
        raise InvalidTupleError(f"unknown parameters for {kind}: {', '.join(sorted(extra))}")
    n, d, seed = params.get("n", 4), params.get("d", 2), params.get("seed", 0)
    try:
        if kind == "normal":
            return gen_commuting_normal(n, d, params.get("unimodular", n // 2), seed,
                                        distinct=params.get("distinct"))
        if kind == "poly":
            return gen_poly_tuple(n, d, seed, nilpotent=bool(params.get("nilpotent", 0)))
        u = params.get("unitary", n // 2)
        if not 0 <= u <= n:
            raise ValueError(f"unitary dimension {u} outside [0, {n}]")
        unitary = gen_commuting_normal(u, d, u, seed, distinct=params.get("distinct"))
        pure = gen_poly_tuple(n - u, d, seed + 1, nilpotent=bool(params.get("nilpotent", 0)))
        t = gen_mixed_direct_sum(unitary, pure)
        if params.get("rotate", 1):
            t = conjugate(t, haar_unitary(n, np.random.default_rng(seed + 2)))
        return t
    except ValueError as exc:
        raise InvalidTupleError(str(exc)) from None


def default_suite(seed: int = 0, size: int = SUITE_SIZE) -> list[str]:
    """Deterministic list of instance specs covering all kinds, n <= 12, d <= 4.

    Roughly a third normal (pure, partially and fully unitary), a sixth poly
    (always pure), the rest mixed; every tenth normal instance has repeated
    unimodular eigenvalues.
    """
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(size):
        n = int(rng.integers(1, 13))
        d = int(rng.integers(1, 5))
        s = int(rng.integers(0, 2 ** 31))
        r = i % 6
        if r in (0, 1):
            u = int(rng.integers(0, n + 1))
            params = {"n": n, "d": d, "unimodular": u, "seed": s}
            if u >= 2 and i % 10 == 0:
                params["distinct"] = max(1, u // 2)
            specs.append(format_instance_spec("normal", params))
        elif r == 2:
            params = {"n": n, "d": d, "seed": s}
            if i % 4 == 0:
                params["nilpotent"] = 1
            specs.append(format_instance_spec("poly", params))
        else:
            u = int(rng.integers(0, n + 1))
            specs.append(format_instance_spec("mixed", {"n": n, "d": d, "unitary": u, "seed": s}))
    return specs


# ---------------------------------------------------------------- verification

@dataclass
class InstanceReport:
    descriptor: str
    sections: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    certificate: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(rep.passed for rep in self.sections.values())

    def failures(self) -> list[tuple[str, object]]:
        return [(name, r) for name, rep in self.sections.items() for r in rep.failures()]

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "instance": self.descriptor,
            "pass": self.passed,
            "certificate": self.certificate,
            "sections": {k: v.to_dict() for k, v in self.sections.items()},
            "skipped": list(self.skipped),
            "notes": list(self.notes),
            "config": self.config,
        }
        if timings:
            out["timings"] = dict(self.timings)
        return out


class _Timer:
    def __init__(self, rep: InstanceReport, name: str):
        self.rep, self.name = rep, name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.rep.timings[self.name] = self.rep.timings.get(self.name, 0.0) + time.perf_counter() - self.t0
        return False


def _equal(rep: ValidationReport, name: str, a, b, tag: str) -> None:
    rep.add(name, 0.0 if a == b else 1.0, 0.0, tag=tag)


def verify_instance(t: OperatorTuple, config: RunConfig = RunConfig(), descriptor: str = "",
                    oracles: bool = False) -> InstanceReport:
    """Run every check family on ``t``. Extension-dependent sections are skipped for pure tuples."""
    out = InstanceReport(descriptor, config=asdict(config))
    rng_seed = config.seed
    tol = config.tol

    with _Timer(out, "validate"):
        vrep = validate(t, val_tol=max(tol, 1e-10))
        out.sections["tuple"] = vrep
        out.notes.extend(vrep.notes)
        if not vrep.passed:
            return out

    P = product_contraction(t)
    with _Timer(out, "asymptotics"):
        limit = asymptotic_limit(P, max_doublings=config.max_doublings, purity_tol=config.purity_tol)
        Q = limit.Q
        pure = is_adjoint_pure(t, limit, config.purity_tol)
        rep = ValidationReport()
        eye = np.eye(t.n)
        w = np.linalg.eigvalsh(Q) if t.n else np.zeros(0)
        rep.add("0<=Q<=I", max(0.0, -w.min(initial=0.0), w.max(initial=0.0) - 1.0), 1e-9, tag="asymptotic-limit")
        rep.add("P*QP=Q", op_norm(P.conj().T @ Q @ P - Q), tol, tag="asymptotic-limit")
        rep.add("Q-idempotent", op_norm(Q @ Q - Q), 1e-7, tag="asymptotic-limit")
        rep.add("doubling-residual", limit.residual, 1e-10, tag="asymptotic-limit")
        rep.extend(verify_compression_inequality(t, Q, tol))
        if all(op_norm(T.conj().T @ T - eye) <= tol for T in t) and t.n:
            rep.add("isometries=>Q=I", op_norm(Q - eye), 1e-10, tag="asymptotic-limit")
        out.sections["asymptotics"] = rep

    with _Timer(out, "toeplitz"):
        TT = toeplitz_basis(t)
        rep = ValidationReport()
        rep.add("relations", max((is_toeplitz(B, t)[1] for B in TT.matrices()), default=0.0), tol,
                tag="brown-halmos")
        rep.add("*-closed", adjoint_closure_residual(TT), tol, tag="brown-halmos")
        rep.add("T(T)⊆T(P)", max((is_toeplitz(B, OperatorTuple((P,)))[1] for B in TT.matrices()),
                                 default=0.0), tol, tag="brown-halmos")
        if TT.dim:
            rep.add("Q∈T(T)", is_toeplitz(Q, t)[1], tol, tag="brown-halmos")
        if all(op_norm(T.conj().T @ T - eye) <= tol and op_norm(T @ T.conj().T - eye) <= tol for T in t):
            _, angle = same_subspace(TT.basis, commutant_basis(list(t)).basis, 1e-7)
            rep.add("unitary: T(T)={T}'", angle, 1e-7, tag="brown-halmos")
        cert = nontriviality_certificate(t, config.purity_tol)
        out.sections["toeplitz"] = rep

    # the three-way certificate: nontrivial Toeplitz space, non-pure, extension constructible
    with _Timer(out, "douglas"):
        try:
            douglas = canonical_extension_douglas(t, limit, snap_unitary=config.snap_unitary,
                                                  rank_tol=config.rank_tol)
        except NoPseudoExtensionError:
            douglas = None
    out.certificate = {
        "dim_toeplitz": TT.dim,
        "norm_Q": cert["norm_Q"],
        "spectral_radius": limit.spectral_radius,
        "pure": pure,
        "extension_dim": None if douglas is None else douglas.m,
    }
    rep = ValidationReport()
    flags = (TT.dim > 0, cert["norm_Q"] > config.purity_tol, douglas is not None)
    rep.add("nontrivial<=>non-pure<=>extendable", 0.0 if len(set(flags)) == 1 else 1.0, 0.0,
            tag="equivalence")
    out.sections["equivalence"] = rep

    with _Timer(out, "phi"):
        phi = phi_projection(P)
        out.sections["phi"] = verify_phi(phi, P, t, Q=Q, levels=config.levels, samples=config.samples,
                                         seed=rng_seed)

    if oracles:
        with _Timer(out, "oracles"):
            out.sections["oracles"] = oracle_section(t, limit, phi, TT.dim, rng_seed)

    if douglas is None:
        out.skipped.extend(["douglas", "stinespring", "uniqueness", "structure-maps",
                            "commutant-extension", "intertwiner-extension", "factoring"])
        out.notes.append("pure tuple: no pseudo-extension exists, extension sections skipped")
        return out

    with _Timer(out, "douglas"):
        rep = verify_pseudo_extension(t, douglas, tol, Q)
        rep.add("product-map", douglas.info["product_map_residual"], 1e-7, tag="canonical-construction")
        rep.add("product-intertwine", op_norm(douglas.product() @ douglas.J - douglas.J @ P), 1e-7,
                tag="canonical-construction")
        JJ = douglas.J.conj().T @ douglas.J
        rep.add("J*J∈T(T)", is_toeplitz(JJ, t)[1], tol, tag="brown-halmos")
        rep.add("rank J=m", abs(numerical_rank(douglas.J, config.rank_tol) - douglas.m), 0,
                tag="canonical-construction")
        if config.snap_unitary:
            rep.add("snapped-intertwining", douglas.info["snap_intertwining_residual"], tol,
                    tag="canonical-construction")
        eye = np.eye(t.n)
        isometric_J = op_norm(JJ - eye) <= tol
        isometric_T = all(op_norm(T.conj().T @ T - eye) <= tol for T in t)
        _equal(rep, "J isometric<=>T isometries", isometric_J, isometric_T, "isometry-characterization")
        out.sections["douglas"] = rep

    with _Timer(out, "stinespring"):
        stine = canonical_extension_stinespring(t)
        triple = stine.info["triple"]
        rep = verify_stinespring(triple, phi)
        rep.extend(verify_pseudo_extension(t, stine, tol=1e-7, Q=Q), prefix="ext:")
        rep.add("product=pi(QP)", stine.info["product_residual"], 1e-7, tag="stinespring-extension")
        out.sections["stinespring"] = rep

    with _Timer(out, "uniqueness"):
        W, rep = equivalence_unitary(douglas, stine, tol=1e-6)
        out.sections["uniqueness"] = rep

    with _Timer(out, "structure-maps"):
        comm_U = commutant_basis(douglas.U)
        rep = ValidationReport()
        rep.extend(gamma_compression(douglas, comm_U, t, config.levels, config.samples, 1e-6,
                                     rng_seed, TT), prefix="gamma:")
        rep.extend(pi_representation(triple, TT, stine, phi), prefix="pi:")
        rep.extend(theta_homomorphism(triple, t, stine, Q, config.samples, config.levels, 1e-7,
                                      rng_seed, douglas=douglas, W=W),
                   prefix="theta:")
        out.sections["structure-maps"] = rep

    with _Timer(out, "commutant-extension"):
        out.sections["commutant-extension"] = commutant_section(t, douglas, config.samples, tol, rng_seed)

    with _Timer(out, "intertwiner-extension"):
        out.sections["intertwiner-extension"] = intertwiner_section(t, douglas, tol, rng_seed)

    with _Timer(out, "factoring"):
        out.sections["factoring"] = factoring_section(t, douglas, Q, tol)
    return out


def commutant_section(t, canon, samples, tol, seed) -> ValidationReport:
    rng = np.random.default_rng(seed)
    comm = commutant_basis(list(t))
    rep = ValidationReport()
    worst = {}
    gaps = []
    for _ in range(samples):
        X = comm.random_element(rng)
        X = X / max(op_norm(X), 1e-300)
        _, r = commutant_extension(t, canon, X, tol)
        for rec in r.records:
            key = rec.name.split("[")[0]
            worst[key] = max(worst.get(key, 0.0), rec.residual)
        gaps.append(float(r.notes[0].rsplit("=", 1)[1]))
    for key, res in worst.items():
        rep.add(key, res, tol, tag="commutant-extension")
    for j, T in enumerate(t):
        Y, _ = commutant_extension(t, canon, T, tol)
        rep.add(f"Y(T_{j})=U_{j}", op_norm(Y - canon.U[j]), tol, tag="commutant-extension")
    Y, _ = commutant_extension(t, canon, np.eye(t.n), tol)
    rep.add("Y(I)=I", op_norm(Y - np.eye(canon.m)), tol, tag="commutant-extension")
    rep.notes.append(f"smallest norm gap ||X|| - ||Y|| over samples: {min(gaps):.3e}")
    return rep


def intertwiner_section(t, canon, tol, seed) -> ValidationReport:
    """X = V intertwines t with its conjugate V t V*; also X = I on t itself and X = 0."""
    V = haar_unitary(t.n, np.random.default_rng(seed + 17))
    tB = conjugate(t, V)
    canonB = canonical_extension_douglas(tB)
    rep = ValidationReport()
    Y, r = intertwiner_extension(t, canon, tB, canonB, V, tol)
    rep.extend(r, prefix="X=V:")
    rep.add("X=V:Y-unitary", op_norm(Y.conj().T @ Y - np.eye(canon.m)), tol, tag="intertwiner-extension")
    Y, r = intertwiner_extension(t, canon, t, canon, np.eye(t.n), tol)
    rep.extend(r, prefix="X=I:")
    rep.add("X=I:Y=I", op_norm(Y - np.eye(canon.m)), tol, tag="intertwiner-extension")
    Y, r = intertwiner_extension(t, canon, tB, canonB, np.zeros((t.n, t.n)), tol)
    rep.add("X=0:Y=0", op_norm(Y), tol, tag="intertwiner-extension")
    rep.notes.extend(r.notes)
    return rep


def factoring_section(t, canon, Q, tol) -> ValidationReport:
    """Non-canonical extensions: J scaled by 0.7, and the inflation [aJ; bJ] with U (+) U."""
    rep = ValidationReport()
    rep.extend(factor_through_canonical(t, canon, canon, tol, Q)[1], prefix="self:")
    F, r = factor_through_canonical(t, canon, replace(canon, J=0.7 * canon.J, canonical=False,
                                                      route="user"), tol, Q)
    rep.extend(r, prefix="scaled:")
    rep.add("scaled:F=0.7I", op_norm(F - 0.7 * np.eye(canon.m)), 1e-7, tag="factoring")
    for a, b in ((0.6, 0.8), (np.sqrt(1 - 1e-4), 1e-2)):
        J2 = np.vstack([a * canon.J, b * canon.J])
        U2 = tuple(np.block([[u, np.zeros_like(u)], [np.zeros_like(u), u]]) for u in canon.U)
        F, r = factor_through_canonical(t, canon, PseudoExtension(J2, U2), tol, Q)
        rep.extend(r, prefix=f"inflated(b={b:g}):")
    return rep


def oracle_section(t, limit, phi, dim_T, seed, oracle_tol: float = 1e-5) -> ValidationReport:
    from .oracles import oracle_phi, oracle_Q, oracle_toeplitz_dim

    P = product_contraction(t)
    rep = ValidationReport()
    rep.add("oracle:Q", op_norm(oracle_Q(P) - limit.Q), oracle_tol, tag="oracle")
    rep.add("oracle:dim T(T)", abs(oracle_toeplitz_dim(t) - dim_T), 0, tag="oracle")
    rng = np.random.default_rng(seed)
    n = t.n
    X = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * max(n, 1))
    rep.add("oracle:phi(X)", op_norm(oracle_phi(P, X) - phi(X)), oracle_tol, tag="oracle")
    rep.add("oracle:phi(I)", op_norm(oracle_phi(P, np.eye(n)) - phi(np.eye(n))), oracle_tol, tag="oracle")
    return rep


# ---------------------------------------------------------------- batches

def report_digest(reports) -> str:
    """SHA-256 over the timing-free report contents."""
    payload = json.dumps([r.to_dict(timings=False) for r in reports], sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def run_suite(specs, config: RunConfig = RunConfig(), progress=None) -> list[InstanceReport]:
    reports = []
    for i, spec in enumerate(specs):
        kind, params = parse_instance_spec(spec)
        t = generate_instance(kind, params)
        reports.append(verify_instance(t, config, descriptor=spec))
        if progress is not None:
            progress(i, reports[-1])
    return reports
