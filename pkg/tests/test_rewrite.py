import random

import numpy as np
import pytest

from gammalab.errors import ParseError, RuleError
from gammalab.index import Instance
from gammalab.linalg import Field
from gammalab.operators import Generator, generator_matrix, get_model
from gammalab.rewrite import (
    CanonicalForm, compose_pair, enumerate_irredundant, ideal_level, is_irredundant, normalize,
    parse_expression, random_product_expression, realize, relation,
)

G = Generator.parse


@pytest.mark.parametrize("left,right,want,rule", [
    ("T[0,1->1,2]", "T[0,2->2,3]", "0", "I"),
    ("T[0,1->0,2;2,4]", "T[0,2->2,3]", "T[0,1->2,3]", "II"),
    ("T[0,1->0,1;2,4]", "T[0,1->1,3]", "T[0,1->1,3;2,4]", "II"),
    ("T[0,1->1,2]", "T[1,2;2,3->3,4]", "T[0,1;2,3->3,4]", "III"),
])
def test_compose_examples(n5, left, right, want, rule):
    t1, t2 = G(left), G(right)
    assert relation(t1, t2)[0] == rule
    got = compose_pair(t1, t2, n5)
    assert str(got) == want
    F = get_model(n5).field
    assert np.array_equal(realize(got, n5), F.matmul(generator_matrix(t1, n5), generator_matrix(t2, n5)))


def test_all_pairs_sound_n4(n4):
    model = get_model(n4)
    mats = {g: generator_matrix(g, n4) for g in model.generators}
    for t1 in model.generators:
        for t2 in model.generators:
            got = realize(compose_pair(t1, t2, n4), n4)
            assert np.array_equal(got, model.field.matmul(mats[t1], mats[t2])), (t1, t2)


def test_random_words_sound(n5):
    rng = random.Random(7)
    for _ in range(100):
        e = random_product_expression(rng, n5)
        assert np.array_equal(realize(normalize(e, n5), n5), realize(e, n5))


def test_normalize_examples(n5):
    one = normalize("1", n5)
    assert one.unit == 1 and not one.terms
    assert str(normalize("T[0,1->2,3]", n5)) == "T[0,1->2,3]"
    assert str(normalize("T[0,1->0,2;2,4]*T[0,2->2,3]", n5)) == "T[0,1->2,3]"
    assert normalize("T[0,1->2,3] + 4*T[0,1->2,3]", n5).is_zero()
    assert str(normalize(" 2 * T[0,1->1,2] * T[1,2;2,3->3,4] + 3 ", n5)) == "3 + 2*T[0,1->1,2]*T[1,2;2,3->3,4]"


def test_canonical_terms_are_irredundant(n5):
    rng = random.Random(3)
    for _ in range(100):
        c = normalize(random_product_expression(rng, n5), n5)
        for prod in c.terms:
            assert is_irredundant(prod.factors)


def test_realize_examples(n5):
    d = get_model(n5).dim
    assert np.array_equal(realize("1", n5), np.eye(d, dtype=np.int64))
    assert not realize("T[0,1->1,2]*T[0,2->2,3]", n5).any()
    assert np.array_equal(realize("T[0,1->0,2;2,4]*T[0,2->2,3]", n5), generator_matrix(G("T[0,1->2,3]"), n5))


def test_ideal_level(n4):
    F = Field(n4.prime)
    assert ideal_level(normalize("1", n4), n4) == 0
    assert ideal_level(CanonicalForm.zero(F), n4) == 4
    assert ideal_level(normalize("T[0,1->2,3]", n4), n4) == 2
    assert ideal_level(normalize("T[0,1->2,3] + T[0,1->1,2]", n4), n4) == 1


@pytest.mark.parametrize("text,err", [
    ("T[0,1->2,3", ParseError),
    ("T[0,1=>2,3]", ParseError),
    ("2**T[0,1->2,3]", ParseError),
    ("T[0,1->2,3] +", ParseError),
])
def test_parse_errors(n4, text, err):
    with pytest.raises(err):
        parse_expression(text, n4)


@pytest.mark.parametrize("text", ["T[0,1->0,1]", "T[0,1->1,2;1,3]"])
def test_invalid_generators_rejected(n4, text):
    with pytest.raises(ParseError, match="invalid generator"):
        parse_expression(text, n4)


def test_coefficients_reduce_mod_p(n5):
    assert str(normalize("7*T[0,1->2,3]", n5)) == "2*T[0,1->2,3]"
    assert str(normalize("-1", n5)) == "4"


def test_irredundant_enumeration_is_finite_and_distinct(n5):
    prods = enumerate_irredundant(n5)
    assert len(prods) == len(set(prods))
    assert all(is_irredundant(p.factors) for p in prods)
    # amax strictly increases along a chain, so length is bounded by n
    assert max(len(p) for p in prods) < n5.n


def test_collision_distinct_forms_equal_matrices(n5):
    a = normalize("T[0,1->1,2]*T[1,2;2,3->3,4]", n5)
    b = normalize("T[0,1;2,3->3,4]", n5)
    assert a != b
    assert np.array_equal(realize(a, n5), realize(b, n5))
    diff = a + b.scale(-1)
    assert not realize(diff, n5).any() and ideal_level(diff, n5) == 3


def test_rule_three_leaves_generator_set():
    inst = Instance(7, frozenset({0, 2, 4}))
    with pytest.raises(RuleError):
        compose_pair(G("T[0,1->2,3]"), G("T[2,3;4,5->5,6]"), inst)
