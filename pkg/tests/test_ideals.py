import random

import numpy as np
import pytest

from gammalab.errors import PreconditionError
from gammalab.ideals import (
    ideal_I, ideal_chain, ideal_noncomplement_step, image_in_L, is_two_sided_closed, two_sided_closure,
)
from gammalab.lattice import algebra_basis
from gammalab.linalg import Field
from gammalab.operators import Generator, generator_matrix, get_model
from gammalab.rewrite import CanonicalForm, Product, ideal_level, normalize, random_canonical_form, realize

G = Generator.parse


def test_chain_n6(n6):
    out = ideal_chain(n6)
    dims = [out["dims"][str(a)] for a in range(1, 6)]
    assert dims == sorted(dims, reverse=True) and dims[-1] == 0
    # L_5 = 0 at n=6, so the alpha=4 step has no witness
    assert out["valid_range"] == [1, 2, 3] and out["strict_on_valid_range"]


def test_I1_is_everything_but_the_unit(n4):
    # every generator maps into L_1, so I_1 is spanned by all non-identity words
    assert ideal_I(n4, 1).dim == algebra_basis(n4).dim - 1


def test_witness_between_levels(n6):
    M = generator_matrix(G("T[0,1->2,3]"), n6)
    assert ideal_I(n6, 2).contains(M) and not ideal_I(n6, 3).contains(M)


def test_unit_in_no_ideal(n5):
    eye = np.eye(get_model(n5).dim, dtype=np.int64)
    for a in range(1, 5):
        assert not ideal_I(n5, a).contains(eye)
    with pytest.raises(PreconditionError):
        ideal_I(n5, 0)


def test_ideals_are_two_sided_and_inside_L(n5):
    for a in range(1, 5):
        I = ideal_I(n5, a)
        assert is_two_sided_closed(I.span, n5)
        assert I.dim == 0 or image_in_L(I.span.basis, n5, a)


def test_membership_agrees_with_level(n5):
    rng = random.Random(11)
    for _ in range(40):
        c = random_canonical_form(rng, n5)
        M = realize(c, n5)
        for a in range(1, 5):
            assert ideal_I(n5, a).contains(M) == image_in_L(M, n5, a)


def test_closure_of_unit_and_generator(n5):
    R = algebra_basis(n5)
    full = two_sided_closure(n5, "1", verify_closed=True)
    assert full.ideal.dim == R.dim and full.ideal.closed
    assert full.generators_found == len(get_model(n5).generators)
    one = two_sided_closure(n5, "T[0,1->2,3]", verify_closed=True)
    assert one.ideal.contains(generator_matrix(G("T[0,1->2,3]"), n5)) and one.ideal.closed
    assert one.ideal.dim < R.dim


def test_closure_needs_nonzero(n5):
    with pytest.raises(PreconditionError):
        two_sided_closure(n5, "T[0,1->2,3] + 4*T[0,1->2,3]")


def test_step_example(n6):
    out = ideal_noncomplement_step(n6, 1, 2, normalize("T[0,1->1,3]", n6))
    assert out["status"] == "checked" and out["gamma"] == 2 and out["ok"]
    assert out["s"] == "T[0,1->1,2]"


def test_step_preconditions(n6):
    F = Field(5)
    with pytest.raises(PreconditionError):
        ideal_noncomplement_step(n6, 1, 2, CanonicalForm.zero(F))
    with pytest.raises(PreconditionError):
        ideal_noncomplement_step(n6, 2, 2, normalize("T[0,1->2,3]", n6))
    with pytest.raises(PreconditionError):
        ideal_noncomplement_step(n6, 1, 2, normalize("1", n6))


def test_step_never_exhausts_on_generators(n5):
    # a pair (alpha, n-1) in nu forces amax(rho) >= n-1, which no index reaches,
    # so some gamma is always free
    for g in get_model(n5).generators:
        r = CanonicalForm.single(Field(5), g)
        for a in range(1, min(ideal_level(r, n5), 3) + 1):
            out = ideal_noncomplement_step(n5, a, a + 1, r)
            assert out["status"] == "checked" and out["ok"], out


def test_step_checks_the_chosen_gamma(n6):
    r = CanonicalForm(Field(5), 0, {
        Product((G("T[1,2;2,3->3,4]"),)): 1,
        Product((G("T[1,3->3,4]"),)): 2,
    })
    out = ideal_noncomplement_step(n6, 1, 2, r)
    assert out["used_gammas"] == [2, 3] and out["gamma"] == 4 and out["ok"]
