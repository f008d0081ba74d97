"""JSON documents: tuples, pseudo-extensions, Stinespring triples.

Complex entries are ``[re, im]`` pairs; matrices are row-major arrays of rows.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidTupleError
from .tuples import OperatorTuple


def matrix_to_json(A) -> list:
    A = np.asarray(A, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def matrix_from_json(rows, shape=None) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidTupleError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.size == 0:
        out = np.zeros(shape or (0, 0), dtype=complex)
        return out
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidTupleError(f"matrix must be rows of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def tuple_to_json(t: OperatorTuple) -> dict:
    return {"dim": t.n, "d": t.d, "tuple": [matrix_to_json(T) for T in t]}


def tuple_from_json(doc: dict) -> OperatorTuple:
    if not isinstance(doc, dict):
        raise InvalidTupleError("tuple document must be a JSON object")
    try:
        n, d, mats = int(doc["dim"]), int(doc["d"]), doc["tuple"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidTupleError(f"tuple document needs integer 'dim', 'd' and a 'tuple' list: {exc}") from None
    if not isinstance(mats, list) or len(mats) != d:
        raise InvalidTupleError(f"'tuple' must hold d = {d} matrices")
    ops = [matrix_from_json(m, (n, n)) for m in mats]
    for A in ops:
        if A.shape != (n, n):
            raise InvalidTupleError(f"matrix of shape {A.shape} does not match dim = {n}")
    return OperatorTuple(tuple(ops))


def load_tuple(path) -> OperatorTuple:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidTupleError(f"{path}: malformed JSON at line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InvalidTupleError(f"{path}: {exc.strerror}") from None
    return tuple_from_json(doc)


def dump_json(doc, path=None) -> str:
    text = json.dumps(doc, indent=1, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def extension_to_json(e) -> dict:
    return {
        "m": e.m,
        "J": matrix_to_json(e.J),
        "U": [matrix_to_json(u) for u in e.U],
        "canonical": bool(e.canonical),
        "route": e.route,
    }


def extension_from_json(doc: dict):
    from .pseudoext import PseudoExtension

    m = int(doc["m"])
    J = matrix_from_json(doc["J"])
    if J.shape[0] != m:
        raise InvalidTupleError(f"J has {J.shape[0]} rows but m = {m}")
    U = tuple(matrix_from_json(u, (m, m)) for u in doc["U"])
    return PseudoExtension(J, U, canonical=bool(doc.get("canonical", False)), route=doc.get("route", "user"))


def stinespring_to_json(triple) -> dict:
    return {
        "k": triple.k,
        "pi_basis_images": [matrix_to_json(p) for p in triple.pi_images],
        "J": matrix_to_json(triple.J),
    }
