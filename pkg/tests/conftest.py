import numpy as np
import pytest

from opext.suite import generate_instance
from opext.tuples import OperatorTuple


@pytest.fixture
def diag_tuple():
    return OperatorTuple((np.diag([1.0, 0.5]), np.diag([1.0, 1 / 3])))


@pytest.fixture
def mixed_tuple():
    return generate_instance("mixed", {"n": 5, "d": 2, "unitary": 2, "seed": 11})


@pytest.fixture
def unitary_tuple():
    return generate_instance("normal", {"n": 4, "d": 3, "unimodular": 4, "seed": 4})


@pytest.fixture
def strict_tuple():
    return generate_instance("normal", {"n": 4, "d": 2, "unimodular": 0, "seed": 5})


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def record_criterion():
    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
