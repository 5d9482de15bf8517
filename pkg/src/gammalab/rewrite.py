"""Operator arithmetic: the three product rules for pairs of generators,
normalization of expressions to canonical form, and evaluation to matrices.

For generators ``T1 = T[nu->rho]`` and ``T2 = T[nu2->rho2]``:

* rule I   -- ``nu2`` and ``rho`` are incomparable: the product is zero;
* rule II  -- ``rho = nu2 + tau``: the product is the single generator
  ``T[nu -> rho2 + tau']``;
* rule III -- ``nu2 = rho + tau`` with ``tau`` nonempty: the product is the
  sum of ``T[nu + sigma + tau -> rho2]`` over ``sigma`` in a finite set X.

Canonical forms keep rule-III products unexpanded: a term is a product of
generators whose adjacent factors are all in rule-III position.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidIndex, ParseError, RuleError
from .index import Index, Instance, enumerate_y, initial_segment, is_valid
from .linalg import Field
from .operators import Generator, check_generator, get_model


@dataclass(frozen=True)
class Product:
    factors: tuple[Generator, ...]

    def __str__(self):
        return "*".join(map(str, self.factors))

    def __repr__(self):
        return f"Product({self})"

    def __len__(self):
        return len(self.factors)

    def sort_key(self):
        return (len(self.factors), tuple(f.sort_key() for f in self.factors))

    @property
    def last_rho(self) -> Index:
        return self.factors[-1].rho

    @property
    def first_nu(self) -> Index:
        return self.factors[0].nu


def relation(t1: Generator, t2: Generator) -> tuple[str, tuple]:
    """Which product rule applies to ``t1 * t2``, with the connecting tail."""
    tau = initial_segment(t2.nu, t1.rho)
    if tau is not None:
        return "II", tau
    tau = initial_segment(t1.rho, t2.nu)
    if tau is not None:
        return "III", tau
    return "I", ()


def is_irredundant(factors: Sequence[Generator]) -> bool:
    return len(factors) > 0 and all(
        relation(a, b)[0] == "III" for a, b in zip(factors, factors[1:])
    )


def _emit(nu_pairs, rho: Index, inst: Instance, rule: str) -> Generator:
    nu = Index(tuple(nu_pairs))
    g = Generator(nu, rho)
    if not is_valid(nu, inst) or not is_valid(rho, inst) or not g.admissible():
        raise RuleError(f"rule {rule} emitted non-generator {g} at {inst.label()}")
    return g


def merge(t1: Generator, t2: Generator, tau: tuple, inst: Instance) -> Generator:
    """Rule II: ``t1 * t2`` where ``t1.rho = t2.nu + tau``."""
    if t1.rho.amax <= t2.rho.amax:
        return _emit(t1.nu.pairs, t2.rho, inst, "II")
    tail = tuple(p for p in tau if p[0] > t2.rho.amax)
    rho = Index(t2.rho.pairs + tail)
    return _emit(t1.nu.pairs, rho, inst, "II")


def sigma_set(t1: Generator, tau: tuple, inst: Instance) -> list[tuple]:
    """The set X of rule III, as pair tuples (the empty tuple included)."""
    out = [()]
    for sigma in enumerate_y(inst):
        if sigma.amax > t1.rho.amax or sigma.pairs[0][0] <= t1.nu.amax:
            continue
        if is_valid(Index(t1.nu.pairs + sigma.pairs + tau), inst):
            out.append(sigma.pairs)
    return out


class CanonicalForm:
    """``unit * 1 + sum(coeff * product)`` with nonzero coefficients and
    pairwise distinct products."""

    __slots__ = ("field", "unit", "terms")

    def __init__(self, field: Field, unit=0, terms: Optional[dict] = None):
        self.field = field
        self.unit = field.scalar(unit)
        clean = {}
        for prod, c in (terms or {}).items():
            c = field.scalar(c)
            if c != 0:
                clean[prod] = c
        self.terms = dict(sorted(clean.items(), key=lambda kv: kv[0].sort_key()))

    @classmethod
    def zero(cls, field: Field) -> "CanonicalForm":
        return cls(field)

    @classmethod
    def single(cls, field: Field, prod: Union[Product, Generator], coeff=1) -> "CanonicalForm":
        if isinstance(prod, Generator):
            prod = Product((prod,))
        return cls(field, 0, {prod: coeff})

    def is_zero(self) -> bool:
        return self.unit == 0 and not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, CanonicalForm)
            and self.field == other.field
            and self.unit == other.unit
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.field.prime, self.unit, tuple(self.terms.items())))

    def __add__(self, other: "CanonicalForm") -> "CanonicalForm":
        terms = dict(self.terms)
        for prod, c in other.terms.items():
            terms[prod] = self.field.scalar(terms.get(prod, 0) + c)
        return CanonicalForm(self.field, self.unit + other.unit, terms)

    def scale(self, c) -> "CanonicalForm":
        return CanonicalForm(
            self.field, self.unit * c, {p: v * c for p, v in self.terms.items()}
        )

    def __str__(self):
        parts = []
        if self.unit != 0:
            parts.append(str(self.unit))
        for prod, c in self.terms.items():
            parts.append(str(prod) if c == 1 else f"{c}*{prod}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"CanonicalForm({self})"

    def to_dict(self) -> dict:
        return {
            "text": str(self),
            "unit": str(self.unit),
            "terms": [{"coeff": str(c), "product": str(p)} for p, c in self.terms.items()],
        }


# expressions

@dataclass(frozen=True)
class Expression:
    """A formal sum of ``coeff * T * T * ...`` terms; an empty factor tuple is the unit."""

    terms: tuple[tuple[int, tuple[Generator, ...]], ...]

    def __str__(self):
        parts = []
        for c, factors in self.terms:
            if not factors:
                parts.append(str(c))
            else:
                prod = "*".join(map(str, factors))
                parts.append(prod if c == 1 else f"{c}*{prod}")
        return " + ".join(parts) if parts else "0"


_GEN = re.compile(r"T\[[^\]]*\]")
_INT = re.compile(r"-?\d+")


def parse_expression(text: str, inst: Instance) -> Expression:
    """Parse ``expr := term ('+' term)*`` where a term is a coefficient,
    a product of generators, or ``coeff*product``."""
    src = "".join(text.split())
    if not src:
        raise ParseError("empty expression")
    terms = []
    for raw in _split_terms(src):
        if not raw:
            raise ParseError(f"empty term in {text!r}")
        coeff = 1
        pos = 0
        m = _INT.match(raw)
        if m:
            coeff = int(m.group())
            pos = m.end()
            if pos == len(raw):
                terms.append((coeff, ()))
                continue
            if raw[pos] != "*":
                raise ParseError(f"expected '*' after coefficient in {raw!r}")
            pos += 1
        factors = []
        while True:
            g = _GEN.match(raw, pos)
            if not g:
                raise ParseError(f"expected generator at {raw[pos:]!r}")
            gen = Generator.parse(g.group())
            try:
                check_generator(gen, inst)
            except InvalidIndex as exc:
                raise ParseError(f"invalid generator {g.group()}: {exc}") from None
            factors.append(gen)
            pos = g.end()
            if pos == len(raw):
                break
            if raw[pos] != "*":
                raise ParseError(f"unexpected {raw[pos:]!r} in term {raw!r}")
            pos += 1
        terms.append((coeff, tuple(factors)))
    return Expression(tuple(terms))


def _split_terms(src: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in src:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "+" and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def compose_pair(t1: Generator, t2: Generator, inst: Instance) -> CanonicalForm:
    field = Field(inst.prime)
    kind, tau = relation(t1, t2)
    if kind == "I":
        return CanonicalForm.zero(field)
    if kind == "II":
        return CanonicalForm.single(field, merge(t1, t2, tau, inst))
    terms = {}
    for sigma in sigma_set(t1, tau, inst):
        g = _emit(t1.nu.pairs + sigma + tau, t2.rho, inst, "III")
        terms[Product((g,))] = field.scalar(terms.get(Product((g,)), 0) + 1)
    return CanonicalForm(field, 0, terms)


def reduce_product(factors: Sequence[Generator], inst: Instance) -> Optional[Product]:
    """Merge adjacent rule-II pairs left to right; None if a rule-I pair kills
    the product.  Each merge drops one factor, so this terminates."""
    stack: list[Generator] = []
    for g in factors:
        stack.append(g)
        while len(stack) >= 2:
            kind, tau = relation(stack[-2], stack[-1])
            if kind == "I":
                return None
            if kind == "III":
                break
            right = stack.pop()
            left = stack.pop()
            stack.append(merge(left, right, tau, inst))
    return Product(tuple(stack)) if stack else None


def normalize(expr: Union[Expression, str], inst: Instance) -> CanonicalForm:
    if isinstance(expr, str):
        expr = parse_expression(expr, inst)
    field = Field(inst.prime)
    unit = field.scalar(0)
    terms: dict[Product, object] = {}
    for coeff, factors in expr.terms:
        c = field.scalar(coeff)
        if not factors:
            unit = field.scalar(unit + c)
            continue
        prod = reduce_product(factors, inst)
        if prod is not None:
            terms[prod] = field.scalar(terms.get(prod, 0) + c)
    return CanonicalForm(field, unit, terms)


def _product_matrix(factors: Sequence[Generator], inst: Instance) -> np.ndarray:
    from .operators import generator_matrix

    field = Field(inst.prime)
    M = generator_matrix(factors[0], inst)
    for g in factors[1:]:
        M = field.matmul(M, generator_matrix(g, inst))
    return M


def realize(x: Union[Expression, CanonicalForm, str], inst: Instance) -> np.ndarray:
    """Evaluate into the endomorphism ring of the module by plain matrix
    products and sums (no rewriting)."""
    if isinstance(x, str):
        x = parse_expression(x, inst)
    model = get_model(inst)
    field = model.field
    out = field.zeros((model.dim, model.dim))
    if isinstance(x, CanonicalForm):
        items = [(x.unit, ())] + [(c, p.factors) for p, c in x.terms.items()]
    else:
        items = list(x.terms)
    for c, factors in items:
        c = field.scalar(c)
        if c == 0:
            continue
        M = field.eye(model.dim) if not factors else _product_matrix(factors, inst)
        out = field.norm(out + M * c)
    return out


def ideal_level(c: CanonicalForm, inst: Instance) -> int:
    """Largest ``alpha`` with ``c`` in the ideal of elements mapping into
    ``L_alpha``, read off the canonical form: 0 when the unit is present,
    ``n`` for zero, else the least ``amax`` of a term's final ``rho``."""
    if c.unit != 0:
        return 0
    if not c.terms:
        return inst.n
    return min(p.last_rho.amax for p in c.terms)


# enumeration and sampling of irredundant products

@lru_cache(maxsize=32)
def successors(inst: Instance) -> dict[Index, list[Generator]]:
    """For each ``rho``: generators whose ``nu`` strictly extends ``rho``."""
    model = get_model(inst)
    out: dict[Index, list[Generator]] = {y: [] for y in model.ys}
    for g in model.generators:
        for k in range(1, len(g.nu)):
            out[Index(g.nu.pairs[:k])].append(g)
    return out


def enumerate_irredundant(inst: Instance) -> list[Product]:
    """All irredundant products.  Finite: ``amax`` strictly increases along
    the chain of factors."""
    succ = successors(inst)
    out: list[Product] = []

    def grow(chain: tuple[Generator, ...]):
        out.append(Product(chain))
        for g in succ[chain[-1].rho]:
            grow(chain + (g,))

    for g in get_model(inst).generators:
        grow((g,))
    return sorted(out, key=Product.sort_key)


def random_irredundant(rng: random.Random, inst: Instance, max_len: int = 3,
                       min_level: int = 0) -> Optional[Product]:
    succ = successors(inst)
    gens = get_model(inst).generators
    chain = [rng.choice(gens)]
    while len(chain) < max_len and succ[chain[-1].rho] and rng.random() < 0.5:
        chain.append(rng.choice(succ[chain[-1].rho]))
    prod = Product(tuple(chain))
    if prod.last_rho.amax < min_level:
        return None
    return prod


def random_canonical_form(rng: random.Random, inst: Instance, max_terms: int = 4,
                          with_unit: bool = True, min_level: int = 0) -> CanonicalForm:
    """Random canonical form; with ``min_level > 0`` the unit is dropped and
    every term ends in ``rho`` with ``amax >= min_level``."""
    field = Field(inst.prime)
    nonzero = [1, 2, 3] if field.prime == 0 else list(range(1, field.prime))
    while True:
        terms = {}
        for _ in range(rng.randint(1, max_terms)):
            prod = None
            while prod is None:
                prod = random_irredundant(rng, inst, min_level=min_level)
            terms[prod] = rng.choice(nonzero)
        unit = rng.choice([0] + nonzero) if with_unit and min_level == 0 else 0
        c = CanonicalForm(field, unit, terms)
        if not c.is_zero():
            return c


def random_product_expression(rng: random.Random, inst: Instance, max_len: int = 4) -> Expression:
    """Random generator word biased towards rule II/III neighbours so that all
    three rules are exercised."""
    gens = get_model(inst).generators
    factors = [rng.choice(gens)]
    for _ in range(rng.randint(1, max_len) - 1):
        prev = factors[-1]
        related = [g for g in gens if relation(prev, g)[0] != "I"]
        pool = related if related and rng.random() < 0.75 else gens
        factors.append(rng.choice(pool))
    return Expression(((rng.randint(1, 4), tuple(factors)),))

