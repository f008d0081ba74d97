import json

import numpy as np
import pytest

from opext import io
from opext.cpstine import canonical_extension_stinespring
from opext.errors import InvalidTupleError
from opext.pseudoext import canonical_extension_douglas


def test_tuple_roundtrip(mixed_tuple, tmp_path):
    doc = io.tuple_to_json(mixed_tuple)
    assert doc["dim"] == 5 and doc["d"] == 2
    assert len(doc["tuple"][0]) == 5 and len(doc["tuple"][0][0]) == 5
    path = tmp_path / "t.json"
    io.dump_json(doc, path)
    back = io.load_tuple(path)
    assert all(np.array_equal(a, b) for a, b in zip(back, mixed_tuple))


def test_complex_entries_row_major():
    doc = {"dim": 2, "d": 1, "tuple": [[[[1, 0], [0, 2]], [[3, 0], [0, 0]]]]}
    t = io.tuple_from_json(doc)
    assert t[0][0, 1] == 2j and t[0][1, 0] == 3


@pytest.mark.parametrize("doc", [
    [],
    {"dim": 2, "d": 1},
    {"dim": 2, "d": 2, "tuple": [[[[1, 0]]]]},
    {"dim": 2, "d": 1, "tuple": [[[1, 0], [0, 1]]]},
    {"dim": 2, "d": 1, "tuple": [[[[1, 0], [0, 0]]]]},
    {"dim": 1, "d": 1, "tuple": [[[["a", 0]]]]},
])
def test_rejects_malformed(doc):
    with pytest.raises(InvalidTupleError):
        io.tuple_from_json(doc)


def test_load_reports_parse_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dim": 2,\n')
    with pytest.raises(InvalidTupleError, match="line"):
        io.load_tuple(p)
    with pytest.raises(InvalidTupleError):
        io.load_tuple(tmp_path / "missing.json")


def test_extension_roundtrip(mixed_tuple):
    e = canonical_extension_douglas(mixed_tuple)
    doc = json.loads(json.dumps(io.extension_to_json(e)))
    assert set(doc) == {"m", "J", "U", "canonical", "route"}
    back = io.extension_from_json(doc)
    assert np.array_equal(back.J, e.J) and back.route == "douglas" and back.canonical
    assert all(np.array_equal(a, b) for a, b in zip(back.U, e.U))


def test_stinespring_json(diag_tuple):
    e = canonical_extension_stinespring(diag_tuple)
    doc = io.stinespring_to_json(e.info["triple"])
    assert doc["k"] == 1
    assert len(doc["pi_basis_images"]) == e.info["algebra"].dim
