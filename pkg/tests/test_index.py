from itertools import product

import pytest

from gammalab.errors import InvalidAppend, InvalidIndex, InvalidInstance, ParseError
from gammalab.index import (
    Index, Instance, concat, enumerate_y, initial_segment, is_valid, validate, y_below, y_slice,
)


def brute_force_y(n, s):
    """Every tuple of distinct pairs, filtered by the index invariants."""
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    out = set()
    # positions after the first hold distinct elements of s
    for k in range(1, len(s) + 2):
        for combo in product(pairs, repeat=k):
            firsts = [a for a, _ in combo]
            if all(x < y for x, y in zip(firsts, firsts[1:])) and all(a in s for a in firsts[1:]):
                out.add(combo)
    return out


@pytest.mark.parametrize("n,s,size", [(2, {0}, 1), (4, {0, 2}, 11), (6, {0, 2, 4}, 83)])
def test_enumeration_sizes(n, s, size):
    ys = enumerate_y(Instance(n, frozenset(s)))
    assert len(ys) == size
    assert {y.pairs for y in ys} == brute_force_y(n, s)


@pytest.mark.parametrize("n,s", [(3, {0}), (4, {0, 1}), (5, {0, 2}), (5, {0, 1, 3})])
def test_enumeration_matches_brute_force(n, s):
    ys = enumerate_y(Instance(n, frozenset(s)))
    assert len(set(ys)) == len(ys)
    assert {y.pairs for y in ys} == brute_force_y(n, s)


def test_canonical_order(n5):
    ys = enumerate_y(n5)
    assert list(ys) == sorted(ys, key=Index.sort_key)
    assert [len(y.pairs) for y in ys] == sorted(len(y.pairs) for y in ys)


def test_layers_n4(n4):
    layers = [len(y_slice(n4, a, a)) for a in range(4)]
    assert layers == [3, 2, 6, 0]
    assert {str(y) for y in y_slice(n4, 1, 1)} == {"1,2", "1,3"}
    assert len(y_slice(n4, 2)) == 6
    assert len(y_below(n4, 2)) == 5


def test_layer_outside_s_is_singletons(n6):
    # for a not in s no longer index can end at level a
    for a in range(6):
        if a not in n6.s:
            assert [y.pairs for y in y_slice(n6, a, a)] == [((a, b),) for b in range(a + 1, 6)]


def test_initial_segment():
    nu, eta = Index.parse("0,1"), Index.parse("0,1;2,3")
    assert initial_segment(nu, eta) == ((2, 3),)
    assert initial_segment(nu, Index.parse("0,2")) is None
    assert initial_segment(eta, eta) == ()
    assert initial_segment(eta, nu) is None


def test_concat(n4):
    assert concat(Index.parse("1,2"), [(2, 3)], n4) == Index.parse("1,2;2,3")
    with pytest.raises(InvalidAppend):
        concat(Index.parse("0,1"), [(1, 3)], n4)
    with pytest.raises(InvalidAppend):
        concat(Index.parse("2,3"), [(2, 3)], n4)


def test_parse_and_text_roundtrip(n6):
    for y in enumerate_y(n6):
        assert Index.parse(str(y)) == y
    for bad in ("", "0;1", "0,1;", "a,b", "0,1,2"):
        with pytest.raises(ParseError):
            Index.parse(bad)


def test_validate(n4):
    assert validate(Index.parse("0,1;2,3"), n4)
    for bad in ("1,1", "0,4", "0,1;1,2", "2,3;0,1"):
        assert not is_valid(Index.parse(bad), n4)
        with pytest.raises(InvalidIndex):
            validate(Index.parse(bad), n4)


@pytest.mark.parametrize("kwargs", [
    dict(n=1), dict(n=4, s=frozenset({1, 2})), dict(n=4, s=frozenset({0, 4})),
    dict(n=4, prime=4), dict(n=4, prime=65537), dict(n=4, max_oracle_dim=0),
])
def test_bad_instances(kwargs):
    with pytest.raises(InvalidInstance):
        Instance(**kwargs)


def test_amax_bmax():
    y = Index.parse("0,3;2,3")
    assert (y.amax, y.bmax) == (2, 3)
