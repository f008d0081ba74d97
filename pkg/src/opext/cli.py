"""Command-line interface: analyze, extend, verify-all, generate.

Exit codes: 0 success, 2 invalid input, 3 internal inconsistency or failed
mandatory check, 4 operation undefined for the instance (pure tuple).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import io
from .asymptotics import asymptotic_limit, is_adjoint_pure
from .cpstine import canonical_extension_stinespring
from .errors import InvalidTupleError, NoPseudoExtensionError, OpextError
from .pseudoext import canonical_extension_douglas, equivalence_unitary, verify_pseudo_extension
from .suite import (RunConfig, default_suite, generate_instance, parse_instance_spec,
                    report_digest, verify_instance)
from .toeplitz import nontriviality_certificate
from .tuples import product_contraction, validate

log = logging.getLogger("opext")

EXIT_OK, EXIT_INVALID, EXIT_INCONSISTENT, EXIT_UNDEFINED = 0, 2, 3, 4


def _config(args) -> RunConfig:
    try:
        return RunConfig(tol=args.tol, rank_tol=args.rank_tol, purity_tol=args.purity_tol,
                         max_doublings=args.max_doublings, levels=args.levels, samples=args.samples,
                         seed=args.seed, snap_unitary=args.snap_unitary)
    except ValueError as exc:
        raise InvalidTupleError(f"bad configuration: {exc}") from None


def _emit(doc: dict, out) -> None:
    text = io.dump_json(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_valid(path, config: RunConfig):
    t = io.load_tuple(path)
    rep = validate(t, val_tol=max(config.tol, 1e-10))
    if not rep.passed:
        raise InvalidTupleError(f"{path}: not a commuting contraction tuple\n{rep.summary()}")
    return t, rep


def cmd_analyze(args) -> int:
    config = _config(args)
    t, vrep = _load_valid(args.input, config)
    P = product_contraction(t)
    limit = asymptotic_limit(P, max_doublings=config.max_doublings, purity_tol=config.purity_tol)
    pure = is_adjoint_pure(t, limit, config.purity_tol)
    cert = nontriviality_certificate(t, config.purity_tol)
    doc = {
        "input": str(args.input),
        "pass": True,
        "Q": io.matrix_to_json(limit.Q),
        "doublings": limit.iterations,
        "pure": pure,
        "certificate": cert,
        "validation": vrep.to_dict(),
        "config": asdict(config),
    }
    if pure:
        doc["verdict"] = "no pseudo-extension exists"
    else:
        canonical_extension_douglas(t, limit, rank_tol=config.rank_tol)
        doc["verdict"] = "canonical unitary pseudo-extension exists"
    doc["extension_constructible"] = not pure
    _emit(doc, args.out)
    return EXIT_OK


def cmd_extend(args) -> int:
    config = _config(args)
    t, _ = _load_valid(args.input, config)
    limit = asymptotic_limit(product_contraction(t), max_doublings=config.max_doublings,
                             purity_tol=config.purity_tol)
    doc = {"input": str(args.input), "route": args.route, "config": asdict(config)}
    exts = {}
    try:
        if args.route in ("douglas", "both"):
            exts["douglas"] = canonical_extension_douglas(t, limit, snap_unitary=config.snap_unitary,
                                                          rank_tol=config.rank_tol)
        if args.route in ("stinespring", "both"):
            exts["stinespring"] = canonical_extension_stinespring(t)
    except NoPseudoExtensionError as exc:
        doc.update({"pass": False, "error": str(exc), "certificate": exc.certificate})
        _emit(doc, args.out)
        return EXIT_UNDEFINED
    checks = {}
    ok = True
    for name, e in exts.items():
        rep = verify_pseudo_extension(t, e, tol=config.tol if name == "douglas" else 1e-7, Q=limit.Q)
        checks[name] = rep.to_dict()
        ok = ok and rep.passed
        doc[name] = io.extension_to_json(e)
        if name == "stinespring":
            doc["stinespring_triple"] = io.stinespring_to_json(e.info["triple"])
    if len(exts) == 2:
        W, rep = equivalence_unitary(exts["douglas"], exts["stinespring"], tol=1e-6)
        doc["W"] = io.matrix_to_json(W)
        checks["equivalence"] = rep.to_dict()
        ok = ok and rep.passed
    doc["checks"] = checks
    doc["pass"] = ok
    _emit(doc, args.out)
    return EXIT_OK if ok else EXIT_INCONSISTENT


def cmd_verify_all(args) -> int:
    config = _config(args)
    if args.input:
        items = [(str(args.input), _load_valid(args.input, config)[0])]
    elif args.generate:
        kind, params = parse_instance_spec(args.generate)
        items = [(args.generate, generate_instance(kind, params))]
    else:
        specs = default_suite(config.seed, args.size)
        items = ((s, generate_instance(*parse_instance_spec(s))) for s in specs)
    t0 = time.perf_counter()
    reports = []
    for desc, t in items:
        r = verify_instance(t, config, descriptor=desc, oracles=args.oracles and t.n <= 5)
        reports.append(r)
        status = "pass" if r.passed else "FAIL"
        log.info("%s %s (%.2fs)", status, desc, sum(r.timings.values()))
        for section, rec in r.failures():
            log.warning("  %s / %s: %.3e > %.1e", section, rec.name, rec.residual, rec.tolerance)
    ok = all(r.passed for r in reports)
    doc = {
        "pass": ok,
        "instances": len(reports),
        "failed": [r.descriptor for r in reports if not r.passed],
        "digest": report_digest(reports),
        "seconds": time.perf_counter() - t0,
        "config": asdict(config),
        "reports": [r.to_dict() for r in reports],
    }
    if args.summary_only:
        doc.pop("reports")
    _emit(doc, args.out)
    return EXIT_OK if ok else EXIT_INCONSISTENT


def cmd_generate(args) -> int:
    kind, params = parse_instance_spec(args.spec)
    if args.seed is not None:
        params["seed"] = args.seed
    t = generate_instance(kind, params)
    _emit(io.tuple_to_json(t), args.out)
    return EXIT_OK


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    d = RunConfig()
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--rank-tol", type=float, default=d.rank_tol)
    p.add_argument("--purity-tol", type=float, default=d.purity_tol)
    p.add_argument("--max-doublings", type=int, default=d.max_doublings)
    p.add_argument("--levels", type=int, default=d.levels, help="matricial levels for sampled checks")
    p.add_argument("--samples", type=int, default=d.samples, help="random samples per sampled check")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--snap-unitary", action="store_true", help="replace X_j by their nearest unitaries")
    p.add_argument("--out", help="write JSON here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="asymptotic limit, purity and Toeplitz certificate")
    p.add_argument("input")
    _add_config_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("extend", help="build the canonical unitary pseudo-extension")
    p.add_argument("input")
    p.add_argument("--route", choices=("douglas", "stinespring", "both"), default="douglas")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("verify-all", help="run every check family on a file, a generated instance or the suite")
    p.add_argument("input", nargs="?")
    p.add_argument("--generate", metavar="SPEC", help="e.g. mixed:n=6,d=3,seed=7")
    p.add_argument("--size", type=int, default=200, help="suite size when no input is given")
    p.add_argument("--oracles", action="store_true", help="also compare against brute-force oracles (n <= 5)")
    p.add_argument("--summary-only", action="store_true", help="omit per-instance reports")
    _add_config_flags(p)
    p.set_defaults(func=cmd_verify_all)

    p = sub.add_parser("generate", help="write a generated tuple as JSON")
    p.add_argument("spec", help="kind:key=value,... with kind in normal, poly, mixed")
    p.add_argument("--seed", type=int, default=None, help="overrides seed= given in SPEC")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("OPEXT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    if getattr(args, "input", None) and getattr(args, "generate", None):
        print("error: give either an input file or --generate, not both", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except OpextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        artifact = getattr(exc, "artifact", None)
        if artifact is not None:
            print(json.dumps({"counterexample": artifact}), file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: linear algebra failure: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
