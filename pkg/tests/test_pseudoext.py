from dataclasses import replace

import numpy as np
import pytest

from opext.asymptotics import asymptotic_limit
from opext.cpstine import canonical_extension_stinespring
from opext.errors import NoPseudoExtensionError, NotIntertwiningError
from opext.linalg import numerical_rank, op_norm
from opext.pseudoext import (PseudoExtension, canonical_extension_douglas, commutant_extension,
                             equivalence_unitary, factor_through_canonical, intertwiner_extension,
                             verify_pseudo_extension, word_span)
from opext.suite import generate_instance
from opext.toeplitz import commutant_basis, is_toeplitz
from opext.tuples import (conjugate, gen_commuting_normal, gen_mixed_direct_sum,
                          gen_poly_tuple, haar_unitary, product_contraction)


def _Q(t):
    return asymptotic_limit(product_contraction(t)).Q


def test_douglas_diag_example(diag_tuple):
    e = canonical_extension_douglas(diag_tuple)
    assert e.m == 1 and e.canonical and e.route == "douglas"
    assert np.allclose(np.abs(e.J), [[1.0, 0.0]])
    assert np.allclose(e.U[0], [[1.0]]) and np.allclose(e.U[1], [[1.0]])


def test_douglas_unitary_tuple(unitary_tuple):
    e = canonical_extension_douglas(unitary_tuple)
    assert e.m == unitary_tuple.n
    assert op_norm(e.J.conj().T @ e.J - np.eye(e.m)) < 1e-10
    for u, T in zip(e.U, unitary_tuple):
        assert op_norm(u - e.J @ T @ e.J.conj().T) < 1e-10


def test_douglas_mixed_block_structure():
    V = gen_commuting_normal(2, 2, 2, seed=3)
    t = gen_mixed_direct_sum(V, gen_poly_tuple(3, 2, seed=3))
    e = canonical_extension_douglas(t)
    assert e.m == 2
    # U_j = J2 V_j J2* where J2 is the unitary left block of J
    J2 = e.J[:, :2]
    assert op_norm(e.J[:, 2:]) < 1e-10
    for u, v in zip(e.U, V):
        assert op_norm(u - J2 @ v @ J2.conj().T) < 1e-10


def test_douglas_refuses_pure(strict_tuple):
    with pytest.raises(NoPseudoExtensionError) as err:
        canonical_extension_douglas(strict_tuple)
    assert err.value.certificate["pure"]
    assert err.value.exit_code == 4


@pytest.mark.parametrize("spec", [{"n": 6, "d": 3, "seed": 7}, {"n": 9, "d": 2, "unitary": 4, "seed": 1},
                                  {"n": 8, "d": 4, "unitary": 8, "distinct": 3, "seed": 2}])
def test_douglas_contract(spec):
    t = generate_instance("mixed", spec)
    Q = _Q(t)
    e = canonical_extension_douglas(t)
    assert verify_pseudo_extension(t, e, 1e-8, Q).passed
    assert op_norm(e.product() @ e.J - e.J @ product_contraction(t)) <= 1e-7
    assert e.info["product_map_residual"] <= 1e-7
    assert is_toeplitz(e.J.conj().T @ e.J, t)[1] <= 1e-8
    assert numerical_rank(e.J) == e.m


def test_snap_unitary(mixed_tuple):
    e = canonical_extension_douglas(mixed_tuple, snap_unitary=True)
    for u in e.U:
        assert op_norm(u.conj().T @ u - np.eye(e.m)) < 1e-13
    assert e.info["snap_intertwining_residual"] <= 1e-8


def test_verify_detects_broken_extensions(mixed_tuple):
    e = canonical_extension_douglas(mixed_tuple)
    Q = _Q(mixed_tuple)
    half = replace(e, J=0.5 * e.J)
    rep = verify_pseudo_extension(mixed_tuple, half, 1e-8, Q)
    assert not rep["canonical-embedding"].passed
    assert all(r.passed for r in rep.records if r.tag == "pseudo-extension")
    bad = replace(e, U=(np.eye(e.m),) + e.U[1:])
    assert not verify_pseudo_extension(mixed_tuple, bad, 1e-8, Q)["intertwine[0]"].passed


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_isometry_characterization(n):
    # J is an isometry exactly when every T_j is one
    iso = gen_commuting_normal(n, 3, n, seed=n)
    e = canonical_extension_douglas(iso)
    assert op_norm(e.J.conj().T @ e.J - np.eye(n)) <= 1e-8
    mixed = generate_instance("mixed", {"n": n + 2, "d": 3, "unitary": n, "seed": n})
    assert any(op_norm(T.conj().T @ T - np.eye(n + 2)) > 1e-8 for T in mixed)
    e = canonical_extension_douglas(mixed)
    assert op_norm(e.J.conj().T @ e.J - np.eye(n + 2)) > 1e-8


def test_word_span_saturates(mixed_tuple):
    e = canonical_extension_douglas(mixed_tuple)
    words, basis = word_span(e.U, e.J)
    assert basis.shape[1] == e.m
    assert words[0] == ()


def test_equivalence_examples(mixed_tuple):
    e = canonical_extension_douglas(mixed_tuple)
    W, rep = equivalence_unitary(e, e)
    assert op_norm(W - np.eye(e.m)) < 1e-10 and rep.passed
    V = haar_unitary(e.m, np.random.default_rng(1))
    e2 = PseudoExtension(V @ e.J, tuple(V @ u @ V.conj().T for u in e.U), canonical=True)
    W, _ = equivalence_unitary(e, e2)
    assert op_norm(W - V) < 1e-8


@pytest.mark.parametrize("spec", [{"n": 5, "d": 2, "seed": 11}, {"n": 10, "d": 3, "unitary": 6, "seed": 4}])
def test_routes_equivalent(spec):
    t = generate_instance("mixed", spec)
    d, s = canonical_extension_douglas(t), canonical_extension_stinespring(t)
    W, rep = equivalence_unitary(d, s, tol=1e-6)
    assert rep.passed
    assert op_norm(W @ d.J - s.J) <= 1e-6


def test_equivalence_rejects_noncanonical(mixed_tuple):
    from opext.errors import ConstructionError

    e = canonical_extension_douglas(mixed_tuple)
    with pytest.raises(ConstructionError):
        equivalence_unitary(e, replace(e, J=0.7 * e.J))


def test_factor_examples(mixed_tuple):
    t = mixed_tuple
    Q = _Q(t)
    canon = canonical_extension_douglas(t)
    F, rep = factor_through_canonical(t, canon, canon, 1e-8, Q)
    assert rep.passed and op_norm(F - np.eye(canon.m)) < 1e-10
    F, rep = factor_through_canonical(t, canon, replace(canon, J=0.7 * canon.J, canonical=False), 1e-8, Q)
    assert rep.passed and op_norm(F - 0.7 * np.eye(canon.m)) < 1e-10


@pytest.mark.parametrize("a,b", [(0.6, 0.8), (0.9, 0.1), (np.sqrt(1 - 1e-6), 1e-3)])
def test_factor_inflation(mixed_tuple, a, b):
    t = mixed_tuple
    canon = canonical_extension_douglas(t)
    Q = _Q(t)
    Z = np.zeros((canon.m, canon.m))
    J2 = np.vstack([a * canon.J, b * canon.J])
    U2 = tuple(np.block([[u, Z], [Z, u]]) for u in canon.U)
    other = PseudoExtension(J2, U2)
    F, rep = factor_through_canonical(t, canon, other, 1e-8, Q)
    assert rep.passed
    assert op_norm(F) <= 1 + 1e-8
    assert op_norm(F @ canon.J - J2) <= 1e-7
    assert op_norm(F - np.vstack([a * np.eye(canon.m), b * np.eye(canon.m)])) < 1e-8


def test_zero_embedding_summand_is_not_minimal(mixed_tuple):
    t = mixed_tuple
    canon = canonical_extension_douglas(t)
    V = haar_unitary(3, np.random.default_rng(0))
    extra = [V @ np.diag(np.exp(1j * np.arange(3) * (j + 1))) @ V.conj().T for j in range(t.d)]
    m = canon.m
    J2 = np.vstack([canon.J, np.zeros((3, t.n))])
    U2 = tuple(np.block([[u, np.zeros((m, 3))], [np.zeros((3, m)), w]]) for u, w in zip(canon.U, extra))
    other = PseudoExtension(J2, U2, canonical=True)
    rep = verify_pseudo_extension(t, other, 1e-8, _Q(t))
    assert not rep["minimality"].passed
    assert rep["canonical-embedding"].passed
    F, frep = factor_through_canonical(t, canon, other, 1e-8)
    assert frep.passed and op_norm(F[m:]) < 1e-10


def test_factor_rejects_invalid_other(mixed_tuple):
    canon = canonical_extension_douglas(mixed_tuple)
    bad = replace(canon, U=(2 * canon.U[0],) + canon.U[1:], canonical=False)
    with pytest.raises(NotIntertwiningError):
        factor_through_canonical(mixed_tuple, canon, bad)


def test_commutant_extension_examples(mixed_tuple):
    t = mixed_tuple
    canon = canonical_extension_douglas(t)
    Y, rep = commutant_extension(t, canon, np.eye(t.n))
    assert rep.passed and op_norm(Y - np.eye(canon.m)) < 1e-10
    for k, T in enumerate(t):
        Y, rep = commutant_extension(t, canon, T)
        assert rep.passed and op_norm(Y - canon.U[k]) < 1e-10
    P = product_contraction(t)
    Y, rep = commutant_extension(t, canon, P)
    assert rep.passed
    assert op_norm(Y) <= op_norm(P) + 1e-8


def test_commutant_extension_random(mixed_tuple):
    t = mixed_tuple
    canon = canonical_extension_douglas(t)
    rng = np.random.default_rng(5)
    comm = commutant_basis(list(t))
    for _ in range(20):
        X = comm.random_element(rng)
        Y, rep = commutant_extension(t, canon, X)
        assert rep.passed
        assert op_norm(Y) <= op_norm(X) + 1e-8
        assert op_norm(Y @ canon.J - canon.J @ X) <= 1e-8
        assert max(op_norm(Y @ u - u @ Y) for u in canon.U) <= 1e-8
    with pytest.raises(NotIntertwiningError):
        commutant_extension(t, canon, rng.standard_normal((t.n, t.n)))


def test_intertwiner_examples(mixed_tuple):
    t = mixed_tuple
    canon = canonical_extension_douglas(t)
    Y, rep = intertwiner_extension(t, canon, t, canon, np.eye(t.n))
    assert rep.passed and op_norm(Y - np.eye(canon.m)) < 1e-10
    V = haar_unitary(t.n, np.random.default_rng(2))
    tB = conjugate(t, V)
    canonB = canonical_extension_douglas(tB)
    Y, rep = intertwiner_extension(t, canon, tB, canonB, V)
    assert rep.passed
    assert op_norm(Y.conj().T @ Y - np.eye(canon.m)) < 1e-8
    Y, rep = intertwiner_extension(t, canon, tB, canonB, np.zeros((t.n, t.n)))
    assert op_norm(Y) == 0 and any("degenerate" in s for s in rep.notes)
    with pytest.raises(NotIntertwiningError):
        intertwiner_extension(t, canon, tB, canonB, np.eye(t.n) + V)


def test_intertwiner_between_different_sizes():
    # X maps C^4 onto the unitary summand of a bigger tuple
    u = gen_commuting_normal(4, 2, 4, seed=6)
    tA = u
    tB = gen_mixed_direct_sum(u, gen_poly_tuple(3, 2, seed=6))
    X = np.vstack([np.eye(4), np.zeros((3, 4))])
    Y, rep = intertwiner_extension(tA, canonical_extension_douglas(tA), tB, canonical_extension_douglas(tB), X)
    assert rep.passed and Y.shape == (4, 4)
