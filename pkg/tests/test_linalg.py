from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gammalab.errors import DimensionMismatch
from gammalab.linalg import (
    Field, contains_space, intersect, kernel, left_kernel, member, rref, saturate, solve,
    sum_spaces, zero_space,
)

PRIMES = [2, 3, 5, 7]


def matrices(max_rows=5, cols=5):
    return st.builds(
        lambda p, rows: (p, rows),
        st.sampled_from(PRIMES),
        st.lists(st.lists(st.integers(0, 6), min_size=cols, max_size=cols), min_size=0, max_size=max_rows),
    )


def space(p, rows, cols=5):
    return rref(rows, Field(p), ambient=cols) if rows else zero_space(cols, Field(p))


def test_intersect_example():
    F = Field(5)
    e = np.eye(3, dtype=np.int64)
    got = intersect(rref(e[[0, 1]], F), rref(e[[1, 2]], F))
    assert got == rref(e[[1]], F)


def test_sum_with_zero():
    F = Field(7)
    S = rref([[1, 2, 3], [0, 1, 1]], F)
    assert sum_spaces(S, zero_space(3, F)) == S
    assert sum_spaces(zero_space(3, F), S) == S


def test_gf5_scalar_solve():
    x = solve([[2]], [3], Field(5))
    assert x.tolist() == [4]


def test_solve_inconsistent():
    assert solve([[1, 1], [1, 1]], [0, 1], Field(3)) is None


def test_rationals():
    Q = Field(0)
    S = rref([[2, 4], [1, 3]], Q)
    assert S.dim == 2
    x = solve([[2, 0], [0, 3]], [1, 1], Q)
    assert list(x) == [Fraction(1, 2), Fraction(1, 3)]


def test_dimension_mismatch():
    F = Field(5)
    with pytest.raises(DimensionMismatch):
        sum_spaces(rref([[1, 0]], F), rref([[1, 0, 0]], F))
    with pytest.raises(DimensionMismatch):
        rref([[1, 0]], F, ambient=3)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rref_idempotent_and_spans_rows(m):
    p, rows = m
    S = space(p, rows)
    for r in rows:
        assert member(r, S)
    if S.dim:
        assert rref(S.basis, Field(p), ambient=5) == S
        # pivot columns hold an identity block
        assert np.array_equal(S.basis[:, list(S.pivots)], np.eye(S.dim, dtype=np.int64))


@settings(max_examples=60, deadline=None)
@given(matrices(), matrices())
def test_dimension_formula(a, b):
    p = a[0]
    S, T = space(p, a[1]), space(p, b[1])
    assert sum_spaces(S, T).dim + intersect(S, T).dim == S.dim + T.dim
    assert contains_space(S, intersect(S, T)) and contains_space(T, intersect(S, T))


@settings(max_examples=60, deadline=None)
@given(matrices(), matrices(), matrices())
def test_modular_law(a, b, c):
    # U <= S implies S meet (T + U) = (S meet T) + U
    p = a[0]
    S, T, U0 = space(p, a[1]), space(p, b[1]), space(p, c[1])
    U = intersect(U0, S)
    assert intersect(S, sum_spaces(T, U)) == sum_spaces(intersect(S, T), U)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_kernels(m):
    p, rows = m
    if not rows:
        return
    F = Field(p)
    A = F.array(rows)
    K = kernel(A, F)
    assert K.dim + rref(A, F).dim == A.shape[1]
    if K.dim:
        assert not F.matmul(A, K.basis.T).any()
    LK = left_kernel(A, F)
    if LK.dim:
        assert not F.matmul(LK.basis, A).any()


@pytest.mark.parametrize("p", [5, 65521])
def test_matmul_paths_agree_with_python_ints(p):
    F = Field(p)
    rng = np.random.default_rng(0)
    a = rng.integers(0, p, size=(7, 300))
    b = rng.integers(0, p, size=(300, 4))
    want = [[sum(int(a[i, k]) * int(b[k, j]) for k in range(300)) % p for j in range(4)] for i in range(7)]
    assert F.matmul(a, b).tolist() == want


def test_saturate_shift_operator():
    F = Field(3)
    # the shift e_i -> e_{i+1} closes e_0 into the whole space
    shift = lambda X: np.hstack([F.zeros((X.shape[0], 1)), X[:, :-1]])
    S = saturate(rref([[1, 0, 0, 0]], F), shift)
    assert S.dim == 4
    S = saturate(rref([[0, 0, 1, 0]], F), shift)
    assert S.dim == 2
