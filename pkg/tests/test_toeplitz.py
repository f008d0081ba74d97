import numpy as np
import pytest

from opext.asymptotics import asymptotic_limit
from opext.errors import InconsistentCertificateError
from opext.linalg import op_norm, same_subspace
from opext.toeplitz import (adjoint_closure_residual, commutant_basis, intertwiner_basis, is_toeplitz,
                            nontriviality_certificate, toeplitz_basis)
from opext.tuples import OperatorTuple, product_contraction

E11 = np.diag([1.0, 0.0])


def test_toeplitz_examples(diag_tuple, strict_tuple):
    T = toeplitz_basis(diag_tuple)
    assert T.dim == 1
    B = T.matrices()[0]
    assert op_norm(B / B[0, 0] - E11) < 1e-10
    assert toeplitz_basis(OperatorTuple((np.eye(2), np.eye(2)))).dim == 4
    assert toeplitz_basis(strict_tuple).dim == 0


def test_toeplitz_basis_satisfies_relations(mixed_tuple):
    T = toeplitz_basis(mixed_tuple)
    assert T.dim > 0
    for B in T.matrices():
        assert is_toeplitz(B, mixed_tuple)[1] <= 1e-8
        P = product_contraction(mixed_tuple)
        assert op_norm(P.conj().T @ B @ P - B) <= 1e-8
    assert adjoint_closure_residual(T) <= 1e-8


def test_toeplitz_equals_commutant_for_unitaries(unitary_tuple):
    ok, angle = same_subspace(toeplitz_basis(unitary_tuple).basis, commutant_basis(list(unitary_tuple)).basis)
    assert ok and angle <= 1e-8


def test_commutant_examples():
    assert commutant_basis([np.diag([1.0, 2.0])]).dim == 2
    assert commutant_basis([np.eye(3)]).dim == 9
    S = np.array([[0.0, 1.0], [1.0, 0.0]])
    C = commutant_basis([S])
    assert C.dim == 2
    assert C.residual(np.eye(2)) < 1e-10 and C.residual(S) < 1e-10


def test_intertwiner_basis_shape():
    A = [np.diag([1.0, 2.0, 3.0])]
    B = [np.diag([2.0, 5.0])]
    X = intertwiner_basis(A, B)
    assert X.dim == 1
    M = X.matrices()[0]
    assert M.shape == (2, 3)
    assert op_norm(M @ A[0] - B[0] @ M) < 1e-10


def test_is_toeplitz_examples(diag_tuple, strict_tuple, mixed_tuple):
    Q = asymptotic_limit(product_contraction(mixed_tuple)).Q
    assert is_toeplitz(Q, mixed_tuple)[0]
    assert not is_toeplitz(np.eye(4), strict_tuple)[0]
    assert is_toeplitz(E11, diag_tuple)[0]


def test_certificate_examples(mixed_tuple, strict_tuple, unitary_tuple):
    c = nontriviality_certificate(mixed_tuple)
    assert c["consistent"] and c["dim_toeplitz"] > 0 and c["norm_Q"] > 0.5
    c = nontriviality_certificate(strict_tuple)
    assert c["consistent"] and c["dim_toeplitz"] == 0 and c["norm_Q"] == 0
    c = nontriviality_certificate(unitary_tuple)
    assert c["dim_toeplitz"] == commutant_basis(list(unitary_tuple)).dim >= 1
    assert c["norm_Q"] == pytest.approx(1.0)


def test_certificate_raises_on_disagreement():
    # with an absurd purity threshold the two sides disagree and the tuple is attached
    t = OperatorTuple((np.eye(2),))
    with pytest.raises(InconsistentCertificateError) as err:
        nontriviality_certificate(t, purity_tol=2.0)
    assert err.value.artifact["dim"] == 2
