import json

import numpy as np
import pytest

from opext import io
from opext.cli import main
from opext.tuples import OperatorTuple


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def diag_file(tmp_path, diag_tuple):
    p = tmp_path / "diag.json"
    io.dump_json(io.tuple_to_json(diag_tuple), p)
    return str(p)


@pytest.fixture
def strict_file(tmp_path, strict_tuple):
    p = tmp_path / "strict.json"
    io.dump_json(io.tuple_to_json(strict_tuple), p)
    return str(p)


def test_analyze_diag(capsys, diag_file):
    code, out, _ = _run(capsys, "analyze", diag_file)
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and not doc["pure"]
    assert doc["certificate"]["dim_toeplitz"] == 1
    assert np.allclose(io.matrix_from_json(doc["Q"]), np.diag([1.0, 0.0]))


def test_analyze_strict(capsys, strict_file):
    code, out, _ = _run(capsys, "analyze", strict_file)
    doc = json.loads(out)
    assert code == 0 and doc["pure"] and doc["certificate"]["dim_toeplitz"] == 0
    assert doc["verdict"] == "no pseudo-extension exists"


def test_analyze_malformed(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    code, _, err = _run(capsys, "analyze", str(p))
    assert code == 2 and "malformed JSON" in err


def test_analyze_rejects_noncontraction(capsys, tmp_path):
    p = tmp_path / "big.json"
    io.dump_json(io.tuple_to_json(OperatorTuple((2 * np.eye(2),))), p)
    code, _, err = _run(capsys, "analyze", str(p))
    assert code == 2 and "contractive" in err


def test_extend_both(capsys, tmp_path, mixed_tuple):
    p = tmp_path / "m.json"
    io.dump_json(io.tuple_to_json(mixed_tuple), p)
    out_path = tmp_path / "ext.json"
    code, _, _ = _run(capsys, "extend", str(p), "--route", "both", "--out", str(out_path))
    doc = json.loads(out_path.read_text())
    assert code == 0 and doc["pass"]
    assert doc["douglas"]["m"] == doc["stinespring"]["m"] == 2
    assert doc["checks"]["equivalence"]["pass"]
    W = io.matrix_from_json(doc["W"])
    assert np.allclose(W.conj().T @ W, np.eye(2), atol=1e-6)


def test_extend_unitary_douglas(capsys, tmp_path, unitary_tuple):
    p = tmp_path / "u.json"
    io.dump_json(io.tuple_to_json(unitary_tuple), p)
    code, out, _ = _run(capsys, "extend", str(p), "--snap-unitary")
    J = io.matrix_from_json(json.loads(out)["douglas"]["J"])
    assert code == 0 and np.allclose(J.conj().T @ J, np.eye(4), atol=1e-8)


def test_extend_pure_exit_4(capsys, strict_file):
    code, out, _ = _run(capsys, "extend", strict_file)
    assert code == 4 and json.loads(out)["certificate"]["pure"]


@pytest.mark.parametrize("spec,pure", [("mixed:n=6,d=3,seed=7", False),
                                       ("normal:n=12,d=4,unimodular=4,seed=1", False),
                                       ("poly:n=8,d=2,seed=3", True)])
def test_verify_all_generate(capsys, spec, pure):
    code, out, _ = _run(capsys, "verify-all", "--generate", spec)
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["seconds"] < 10
    rep = doc["reports"][0]
    assert rep["certificate"]["pure"] is pure
    assert ("stinespring" in rep["skipped"]) is pure


def test_verify_all_file_with_oracles(capsys, diag_file):
    code, out, _ = _run(capsys, "verify-all", diag_file, "--oracles")
    doc = json.loads(out)
    assert code == 0 and "oracles" in doc["reports"][0]["sections"]


def test_verify_all_small_suite(capsys):
    code, out, _ = _run(capsys, "verify-all", "--size", "6", "--summary-only")
    doc = json.loads(out)
    assert code == 0 and doc["instances"] == 6 and "reports" not in doc


def test_verify_all_rejects_file_and_generate(capsys, diag_file):
    code, _, _ = _run(capsys, "verify-all", diag_file, "--generate", "poly:n=2")
    assert code == 2


def test_generate_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["generate", "normal:n=4,d=2,unimodular=2", "--seed", "3", "--out", str(a)]) == 0
    assert main(["generate", "normal:n=4,d=2,unimodular=2,seed=3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    t = io.load_tuple(a)
    assert t.n == 4 and t.d == 2


def test_generate_mixed_without_unitary_part_is_pure(capsys, tmp_path):
    p = tmp_path / "m.json"
    main(["generate", "mixed:n=4,d=2,unitary=0,seed=1", "--out", str(p)])
    code, out, _ = _run(capsys, "analyze", str(p))
    assert json.loads(out)["pure"]


def test_generate_unknown_kind(capsys):
    code, _, err = _run(capsys, "generate", "cubic:n=3")
    assert code == 2 and "unknown instance kind" in err


def test_log_env(capsys, monkeypatch):
    monkeypatch.setenv("OPEXT_LOG", "info")
    code, _, _ = _run(capsys, "verify-all", "--generate", "poly:n=2,d=1,seed=0")
    assert code == 0
