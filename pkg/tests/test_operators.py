import numpy as np
import pytest

from gammalab.errors import InvalidIndex, PreconditionError
from gammalab.index import Index, Instance, enumerate_y, is_valid
from gammalab.lattice import is_generator_closed
from gammalab.linalg import contains_space
from gammalab.operators import (
    Generator, apply_generator, check_generator, enumerate_generators, generator_matrix, get_model,
    subspace_L, subspace_Lab,
)

G = Generator.parse
I = Index.parse


def closed_form(t, eta):
    """Absorb the tail pairs at or below amax(rho), then append the rest."""
    if eta.pairs[: len(t.nu.pairs)] != t.nu.pairs:
        return None
    tail = eta.pairs[len(t.nu.pairs):]
    return Index(t.rho.pairs + tuple(p for p in tail if p[0] > t.rho.amax))


@pytest.mark.parametrize("t,eta,want", [
    ("T[0,1->2,3]", "0,1", "2,3"),
    ("T[0,1->2,3]", "0,2", None),
    ("T[0,1->2,3]", "0,1;2,3", "2,3"),
    ("T[0,1->1,2]", "0,1;2,3", "1,2;2,3"),
])
def test_apply_examples(n5, t, eta, want):
    got = apply_generator(G(t), I(eta), n5)
    assert (None if got is None else str(got)) == want


@pytest.mark.parametrize("n,s", [(4, {0, 2}), (5, {0, 2}), (5, {0, 1, 3}), (6, {0, 2, 4})])
def test_apply_matches_closed_form(n, s):
    inst = Instance(n, frozenset(s))
    for t in enumerate_generators(inst):
        for eta in enumerate_y(inst):
            got = apply_generator(t, eta, inst)
            assert got == closed_form(t, eta)
            assert got is None or is_valid(got, inst)


def test_generator_counts():
    assert enumerate_generators(Instance(2, frozenset({0}))) == ()
    # hand count at n=4, s={0,2}: one nu with bmax 1 (8 admissible rho), two with
    # bmax 2 (6 each), the rest have bmax 3 and no rho reaches amax 3
    assert len(enumerate_generators(Instance(4, frozenset({0, 2})))) == 8 + 2 * 6


def test_admissibility(n4):
    with pytest.raises(InvalidIndex):
        check_generator(G("T[0,3->1,2]"), n4)
    with pytest.raises(InvalidIndex):
        check_generator(G("T[0,1->1,1]"), n4)
    assert check_generator(G("T[0,1->1,2]"), n4)


def test_generator_matrix_shape(n4):
    M = generator_matrix(G("T[0,1->2,3]"), n4)
    assert M.shape == (11, 11)
    assert ((M != 0).sum(axis=1) <= 1).all()
    # exactly the indices with first pair (0,1): "0,1" and "0,1;2,3"
    assert int((M != 0).any(axis=1).sum()) == 2


def test_matrix_rows_follow_symbolic_map(n5):
    model = get_model(n5)
    for t in model.generators[:40]:
        M = generator_matrix(t, n5)
        for i, eta in enumerate(model.ys):
            img = apply_generator(t, eta, n5)
            want = np.zeros(model.dim, dtype=np.int64)
            if img is not None:
                want[model.position[img]] = 1
            assert np.array_equal(M[i], want)


def test_chain_dimensions(n4):
    assert [subspace_L(n4, a).dim for a in range(4)] == [11, 8, 6, 0]
    assert subspace_Lab(n4, 2, 3).dim == 5
    with pytest.raises(PreconditionError):
        subspace_Lab(n4, 1, 3)
    with pytest.raises(PreconditionError):
        subspace_L(n4, 4)


@pytest.mark.parametrize("n,s", [(3, {0, 1}), (4, {0, 2}), (5, {0, 2}), (5, {0, 1, 3})])
def test_submodules_closed_and_nested(n, s):
    inst = Instance(n, frozenset(s))
    for a in range(n):
        assert is_generator_closed(subspace_L(inst, a), inst)
        if a:
            assert contains_space(subspace_L(inst, a - 1), subspace_L(inst, a))
    assert subspace_L(inst, n - 1).dim == 0
    for a in inst.s:
        for b in range(a + 1, n):
            assert is_generator_closed(subspace_Lab(inst, a, b), inst)
