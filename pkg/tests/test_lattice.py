import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gammalab.errors import PreconditionError
from gammalab.index import Index, Instance, y_below
from gammalab.lattice import (
    algebra_basis, algebra_report, centralizer_dim, centralizer_incremental, centralizer_stacked,
    certify, check_complement_negative, check_complement_positive, closure, cofinality_check,
    distributivity_refutation, gamma_profile, is_generator_closed, product_closed,
    pseudo_inverse_exists, verify_report,
)
from gammalab.linalg import Field, contains_space, rref, sum_spaces
from gammalab.operators import get_model, subspace_L
from gammalab.rewrite import CanonicalForm, enumerate_irredundant, normalize

N4 = Instance(4, frozenset({0, 2}), prime=5)


def test_closure_examples(n4):
    model = get_model(n4)
    assert closure([], n4).dim == 0
    x = model.basis_vector(Index.parse("0,1;2,3"))
    assert closure([x], n4).space == subspace_L(n4, 2)
    for a in range(4):
        assert closure(subspace_L(n4, a).basis, n4).space == subspace_L(n4, a)


vectors = st.lists(st.lists(st.integers(0, 4), min_size=11, max_size=11), min_size=1, max_size=3)


@settings(max_examples=40, deadline=None)
@given(vectors, vectors)
def test_closure_is_a_closure_operator(a, b):
    ca, cab = closure(a, N4), closure(a + b, N4)
    assert is_generator_closed(ca.space, N4)
    assert all(v in ca.space for v in Field(5).array(a))
    assert closure(ca.space.basis, N4) == ca
    assert contains_space(cab.space, ca.space)
    assert cab.space == closure(sum_spaces(ca.space, closure(b, N4).space).basis, N4).space


def test_positive_certificates(n6):
    rep = check_complement_positive(n6, 0, 2, 3)
    assert rep.verdict == "complemented"
    assert rep.certificate["witness_dim"] == subspace_L(n6, 3).dim + len(y_below(n6, 2))
    assert verify_report(rep, n6)
    assert certify(n6, 0, 2, 4).verdict == "complemented"


@pytest.mark.parametrize("triple", [(0, 4, 5), (2, 4, 5), (0, 2, 2), (3, 2, 4)])
def test_certificate_preconditions(n6, triple):
    with pytest.raises(PreconditionError):
        certify(n6, *triple)


def test_certificate_kind_must_match_s(n6):
    with pytest.raises(PreconditionError):
        check_complement_positive(n6, 0, 1, 2)
    with pytest.raises(PreconditionError):
        check_complement_negative(n6, 0, 2, 3)


@pytest.mark.parametrize("triple", [(0, 1, 2), (0, 3, 4), (2, 3, 4)])
def test_negative_certificates(n6, triple):
    rep = check_complement_negative(n6, *triple)
    assert rep.verdict == "not-complemented"
    assert verify_report(rep, n6)


def test_tampered_certificate_fails_recheck(n6):
    rep = check_complement_positive(n6, 0, 2, 3)
    rep.certificate["witness_basis"] = rep.certificate["witness_basis"][1:]
    assert not verify_report(rep, n6)


def test_gamma_profiles(n6):
    p0 = gamma_profile(n6, 0)
    assert (p0.e_set, p0.valid_range) == ([1, 3], [1, 2, 3])
    assert gamma_profile(n6, 2).e_set == [3]
    full = Instance(6, frozenset({0, 1, 2, 3, 4}))
    assert gamma_profile(full, 0).e_set == []
    with pytest.raises(PreconditionError):
        gamma_profile(n6, 5)


def test_cofinality_examples(n4, n5):
    model = get_model(n5)
    for eta in model.ys:
        out = cofinality_check(n5, model.basis_vector(eta))
        assert out["success"] and out["alpha"] == eta.bmax
    m4 = get_model(n4)
    x = m4.basis_vector(Index.parse("0,1")) + m4.basis_vector(Index.parse("0,2"))
    assert cofinality_check(n4, x)["success"]
    with pytest.raises(PreconditionError):
        cofinality_check(n4, np.zeros(11, dtype=np.int64))


def test_algebra_small():
    assert algebra_basis(Instance(2, frozenset({0}))).dim == 1
    rep = algebra_report(N4)
    assert rep["dimension"] == len(enumerate_irredundant(N4)) + 1 == 21
    assert product_closed(algebra_basis(N4))


def test_pseudo_inverse(n5):
    F = Field(5)
    assert pseudo_inverse_exists(n5, normalize("1", n5))
    assert pseudo_inverse_exists(n5, CanonicalForm.zero(F))
    assert not pseudo_inverse_exists(n5, normalize("T[0,1->1,3]", n5))


def test_centralizer_hand_values():
    assert centralizer_dim(Instance(2, frozenset({0})), 0) == 1
    # n=3, s={0}: the only generator is the rank-one map x_(0,1) -> x_(1,2);
    # commuting with a 3x3 matrix unit on distinct coordinates leaves 9 - 4 = 5
    assert centralizer_dim(Instance(3, frozenset({0})), 0) == 5


@pytest.mark.parametrize("inst,alpha", [(N4, 0), (N4, 1), (Instance(5, frozenset({0, 2}), prime=3), 1)])
def test_centralizer_methods_agree(inst, alpha):
    a, b = centralizer_incremental(inst, alpha), centralizer_stacked(inst, alpha)
    assert a == b >= 1


def test_distributivity(n4, n5):
    assert distributivity_refutation(n5, 0, 2, 3)["refuted"]
    assert distributivity_refutation(n4, 0)["refuted"]
    with pytest.raises(PreconditionError):
        distributivity_refutation(n4, 1)
    with pytest.raises(PreconditionError):
        distributivity_refutation(n5, 0, 2, 2)


def dense_closed(S, inst):
    model = get_model(inst)
    if S.dim == 0:
        return True
    return contains_space(S, rref(model.apply_generators(S.basis), model.field, ambient=model.dim))


@pytest.mark.parametrize("n,s,p", [(4, {0, 2}, 2), (5, {0, 2}, 3), (5, {0, 1, 3}, 5)])
def test_sparse_closure_test_matches_dense(n, s, p):
    inst = Instance(n, frozenset(s), prime=p)
    model = get_model(inst)
    rng = np.random.default_rng(n * 10 + p)
    verdicts = set()
    for _ in range(150):
        k = int(rng.integers(1, 4))
        V = rng.integers(0, p, size=(k, model.dim)) * (rng.random((k, model.dim)) < 0.2)
        C = closure(V, inst).space
        for S in (rref(V, model.field, ambient=model.dim), C, rref(C.basis[1:], model.field, ambient=model.dim)):
            verdict = dense_closed(S, inst)
            assert is_generator_closed(S, inst) == verdict
            verdicts.add(verdict)
    assert verdicts == {True, False}
