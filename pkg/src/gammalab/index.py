"""Index sets of the construction at finite truncation.

An index is a nonempty sequence of pairs ``(a_0, b_0), ..., (a_k, b_k)`` with
``a_i < b_i < n``, strictly increasing first components, and ``a_i`` in the
parameter set ``s`` for every position after the first.  The set of all
indices is enumerated once per instance in a canonical order (pair count,
then the flattened pair list lexicographically); that order fixes the
coordinates of the module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .errors import InvalidAppend, InvalidIndex, InvalidInstance, ParseError

Pair = tuple[int, int]

MAX_PRIME = 1 << 16


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class Instance:
    """Truncation parameters: ``n`` stands for the cardinal, ``s`` for the
    parameter subset, ``prime`` for the field (0 means the rationals)."""

    n: int
    s: frozenset = field(default_factory=lambda: frozenset({0}))
    prime: int = 5
    max_oracle_dim: int = 12
    seed: int = 1

    def __post_init__(self):
        object.__setattr__(self, "s", frozenset(int(a) for a in self.s))
        if not isinstance(self.n, int) or self.n < 2:
            raise InvalidInstance(f"n must be an integer >= 2, got {self.n!r}")
        if 0 not in self.s:
            raise InvalidInstance("s must contain 0")
        bad = sorted(a for a in self.s if not 0 <= a < self.n)
        if bad:
            raise InvalidInstance(f"s must lie in [0, {self.n}), got {bad}")
        if self.prime != 0 and not _is_prime(self.prime):
            raise InvalidInstance(f"prime must be 0 or a prime number, got {self.prime}")
        if self.prime >= MAX_PRIME:
            raise InvalidInstance(f"prime must be below {MAX_PRIME}, got {self.prime}")
        if self.max_oracle_dim < 1:
            raise InvalidInstance("max_oracle_dim must be positive")

    @property
    def s_list(self) -> list[int]:
        return sorted(self.s)

    def with_prime(self, prime: int) -> "Instance":
        return Instance(self.n, self.s, prime, self.max_oracle_dim, self.seed)

    def label(self) -> str:
        return f"n={self.n},s={{{','.join(map(str, self.s_list))}}},p={self.prime}"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "s": self.s_list,
            "prime": self.prime,
            "max_oracle_dim": self.max_oracle_dim,
            "seed": self.seed,
        }


@dataclass(frozen=True, order=False)
class Index:
    pairs: tuple[Pair, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(a), int(b)) for a, b in self.pairs))

    @property
    def amax(self) -> int:
        return self.pairs[-1][0]

    @property
    def bmax(self) -> int:
        return max(b for _, b in self.pairs)

    def __len__(self):
        return len(self.pairs)

    def sort_key(self):
        return (len(self.pairs), tuple(x for p in self.pairs for x in p))

    def __lt__(self, other: "Index"):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return ";".join(f"{a},{b}" for a, b in self.pairs)

    def __repr__(self):
        return f"Index({self})"

    @classmethod
    def parse(cls, text: str) -> "Index":
        text = "".join(text.split())
        if not text:
            raise ParseError("empty index")
        pairs = []
        for chunk in text.split(";"):
            parts = chunk.split(",")
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise ParseError(f"malformed pair {chunk!r} in index {text!r}")
            pairs.append((int(parts[0]), int(parts[1])))
        return cls(tuple(pairs))


def violation(pairs: Sequence[Pair], inst: Instance) -> Optional[str]:
    """Describe the first index invariant ``pairs`` breaks, or None."""
    if not pairs:
        return "index must be nonempty"
    for i, (a, b) in enumerate(pairs):
        if not 0 <= a < b < inst.n:
            return f"pair {i} = ({a},{b}) violates 0 <= a < b < {inst.n}"
        if i > 0:
            if a <= pairs[i - 1][0]:
                return f"first components not strictly increasing at pair {i}"
            if a not in inst.s:
                return f"first component {a} at position {i} is not in s"
    return None


def validate(idx: Index, inst: Instance) -> Index:
    msg = violation(idx.pairs, inst)
    if msg is not None:
        raise InvalidIndex(f"{idx}: {msg}")
    return idx


def is_valid(idx: Index, inst: Instance) -> bool:
    return violation(idx.pairs, inst) is None


@lru_cache(maxsize=None)
def _enumerate(n: int, s: frozenset) -> tuple[Index, ...]:
    out: list[tuple[Pair, ...]] = []

    def extend(seq: tuple[Pair, ...]):
        out.append(seq)
        for a in range(seq[-1][0] + 1, n):
            if a in s:
                for b in range(a + 1, n):
                    extend(seq + ((a, b),))

    for a in range(n):
        for b in range(a + 1, n):
            extend(((a, b),))
    return tuple(sorted((Index(p) for p in out), key=Index.sort_key))


def enumerate_y(inst: Instance) -> tuple[Index, ...]:
    """Every valid index exactly once, in canonical order."""
    return _enumerate(inst.n, inst.s)


def y_slice(inst: Instance, lo: Optional[int] = None, hi: Optional[int] = None) -> tuple[Index, ...]:
    """Indices with ``lo <= amax <= hi``; ``y_slice(inst, a, a)`` is the layer of ``a``."""
    for bound in (lo, hi):
        if bound is not None and not 0 <= bound < inst.n:
            raise InvalidInstance(f"slice bound {bound} outside [0, {inst.n})")
    return tuple(
        y for y in enumerate_y(inst)
        if (lo is None or y.amax >= lo) and (hi is None or y.amax <= hi)
    )


def y_below(inst: Instance, alpha: int) -> tuple[Index, ...]:
    """Indices with ``amax < alpha``."""
    return tuple(y for y in enumerate_y(inst) if y.amax < alpha)


def initial_segment(nu: Index, eta: Index) -> Optional[tuple[Pair, ...]]:
    """Return the tail ``tau`` with ``eta == nu + tau``, or None if ``nu`` is
    not an initial segment of ``eta``."""
    k = len(nu.pairs)
    if k <= len(eta.pairs) and eta.pairs[:k] == nu.pairs:
        return eta.pairs[k:]
    return None


def concat(eta: Index, tau: Iterable[Pair], inst: Instance) -> Index:
    tau = tuple(tau)
    pairs = eta.pairs + tau
    msg = violation(pairs, inst)
    if msg is not None:
        raise InvalidAppend(f"cannot append {tau} to {eta}: {msg}")
    return Index(pairs)
