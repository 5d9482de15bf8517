"""The generators ``T[nu->rho]`` and the distinguished subspaces.

Operators act on the right of row vectors: ``x_eta`` maps to ``x_eta @ M``,
so applying ``T1`` then ``T2`` is the matrix product ``M1 @ M2``.  Every
generator sends each basis vector to a basis vector or to zero, so it is
stored as a *partial map*: an int array whose entry ``i`` is the coordinate
of the image of ``x_i``, or ``-1`` for zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np

from .errors import InvalidIndex, ParseError, PreconditionError
from .index import Index, Instance, concat, enumerate_y, initial_segment, validate, y_below
from .linalg import Field, Subspace, rref, sum_spaces, zero_space


@dataclass(frozen=True)
class Generator:
    nu: Index
    rho: Index

    def admissible(self) -> bool:
        return self.rho.amax >= self.nu.bmax

    def __str__(self):
        return f"T[{self.nu}->{self.rho}]"

    def __repr__(self):
        return str(self)

    def sort_key(self):
        return (self.nu.sort_key(), self.rho.sort_key())

    def __lt__(self, other: "Generator"):
        return self.sort_key() < other.sort_key()

    @classmethod
    def parse(cls, text: str) -> "Generator":
        m = re.fullmatch(r"T\[([^\]]*)->([^\]]*)\]", "".join(text.split()))
        if not m:
            raise ParseError(f"malformed generator {text!r}; expected T[<index>-><index>]")
        return cls(Index.parse(m.group(1)), Index.parse(m.group(2)))


def check_generator(t: Generator, inst: Instance) -> Generator:
    validate(t.nu, inst)
    validate(t.rho, inst)
    if not t.admissible():
        raise InvalidIndex(f"{t}: amax(rho)={t.rho.amax} < bmax(nu)={t.nu.bmax}")
    return t


def apply_generator(t: Generator, eta: Index, inst: Instance) -> Optional[Index]:
    """Image index of ``x_eta`` under ``t``; None encodes the zero image."""
    if initial_segment(t.nu, eta) is None:
        return None
    if eta == t.nu:
        return t.rho
    head = Index(eta.pairs[:-1])
    alpha, beta = eta.pairs[-1]
    rho_prev = apply_generator(t, head, inst)
    if rho_prev.amax >= alpha:
        return rho_prev
    return concat(rho_prev, [(alpha, beta)], inst)


def enumerate_generators(inst: Instance) -> tuple[Generator, ...]:
    ys = enumerate_y(inst)
    return tuple(Generator(nu, rho) for nu in ys for rho in ys if rho.amax >= nu.bmax)


def compose_maps(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Partial map of "apply ``a``, then ``b``" (broadcasts over leading axes of b)."""
    safe = np.where(a >= 0, a, 0)
    return np.where(a >= 0, b[..., safe], -1)


def left_multiply(pm: np.ndarray, X: np.ndarray, field: Field) -> np.ndarray:
    """``M @ X`` for the partial map ``pm`` and a batch ``X`` of shape (k, d, d)."""
    out = field.zeros(X.shape)
    src = np.flatnonzero(pm >= 0)
    out[:, src, :] = X[:, pm[src], :]
    return out


def right_multiply(X: np.ndarray, pm: np.ndarray, field: Field) -> np.ndarray:
    """``X @ M`` for a batch ``X`` of shape (k, d, d) and the partial map ``pm``."""
    out = field.zeros(X.shape)
    src = np.flatnonzero(pm >= 0)
    np.add.at(out, (slice(None), slice(None), pm[src]), X[:, :, src])
    return field.norm(out)


class Model:
    """Per-instance cache: coordinates, generator maps and the chain of
    subspaces.  Obtain through :func:`get_model`."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.field = Field(inst.prime)
        self.ys = enumerate_y(inst)
        self.dim = len(self.ys)
        self.position = {y: i for i, y in enumerate(self.ys)}
        self.amax = np.array([y.amax for y in self.ys], dtype=np.int64)
        self.generators = enumerate_generators(inst)
        self.gen_position = {g: i for i, g in enumerate(self.generators)}

    @cached_property
    def extensions(self) -> dict:
        """``nu -> coordinates of every eta having nu as an initial segment``."""
        out: dict = {}
        for i, eta in enumerate(self.ys):
            for k in range(1, len(eta.pairs) + 1):
                out.setdefault(Index(eta.pairs[:k]), []).append(i)
        return out

    @cached_property
    def gen_maps(self) -> np.ndarray:
        out = np.full((len(self.generators), self.dim), -1, dtype=np.int64)
        for gi, g in enumerate(self.generators):
            # only extensions of nu can have a nonzero image
            for i in self.extensions[g.nu]:
                out[gi, i] = self.position[apply_generator(g, self.ys[i], self.inst)]
        return out

    @cached_property
    def by_source(self) -> tuple:
        """Every nonzero entry of every generator map, sorted by source
        coordinate: (offsets into the arrays per source, generator, target)."""
        g, src = np.nonzero(self.gen_maps >= 0)
        dst = self.gen_maps[g, src]
        order = np.argsort(src, kind="stable")
        offsets = np.searchsorted(src[order], np.arange(self.dim + 1))
        return offsets, g[order], dst[order]

    def generator_map(self, t: Generator) -> np.ndarray:
        gi = self.gen_position.get(t)
        if gi is not None:
            return self.gen_maps[gi]
        check_generator(t, self.inst)
        raise PreconditionError(f"{t} is not a generator of {self.inst.label()}")

    def map_matrix(self, pmap: np.ndarray) -> np.ndarray:
        M = self.field.zeros((self.dim, self.dim))
        rows = np.flatnonzero(pmap >= 0)
        M[rows, pmap[rows]] = self.field.scalar(1)
        return M

    def maps_flat(self, pmaps: np.ndarray) -> np.ndarray:
        """Partial maps as flattened 0/1 matrices (one row each)."""
        pmaps = np.atleast_2d(pmaps)
        out = self.field.zeros((pmaps.shape[0], self.dim * self.dim))
        r, c = np.nonzero(pmaps >= 0)
        out[r, c * self.dim + pmaps[r, c]] = self.field.scalar(1)
        return out

    def identity_map(self) -> np.ndarray:
        return np.arange(self.dim, dtype=np.int64)

    def apply_maps(self, vectors: np.ndarray, pmaps: np.ndarray) -> np.ndarray:
        """Images ``v @ M_g`` of every row ``v`` under every partial map ``g``,
        stacked as (len(pmaps) * len(vectors)) rows."""
        V = np.atleast_2d(vectors)
        k = V.shape[0]
        out = self.field.zeros((pmaps.shape[0], k, self.dim))
        for gi, pm in enumerate(pmaps):
            src = np.flatnonzero(pm >= 0)
            if src.size == 0:
                continue
            dst = pm[src]
            # several sources can share a target, so accumulate
            if self.field.prime:
                np.add.at(out[gi], (slice(None), dst), V[:, src])
            else:
                for s_, d_ in zip(src, dst):
                    out[gi][:, d_] = out[gi][:, d_] + V[:, s_]
        return self.field.norm(out.reshape(-1, self.dim))

    def apply_generators(self, vectors: np.ndarray) -> np.ndarray:
        return self.apply_maps(vectors, self.gen_maps)

    # distinguished subspaces

    def basis_vector(self, eta: Index) -> np.ndarray:
        v = self.field.zeros(self.dim)
        v[self.position[eta]] = self.field.scalar(1)
        return v

    def L(self, alpha: int) -> Subspace:
        return subspace_L(self.inst, alpha)

    def L_ab(self, alpha: int, beta: int) -> Subspace:
        return subspace_Lab(self.inst, alpha, beta)


@lru_cache(maxsize=32)
def get_model(inst: Instance) -> Model:
    return Model(inst)


def generator_matrix(t: Generator, inst: Instance) -> np.ndarray:
    m = get_model(inst)
    return m.map_matrix(m.generator_map(t))


def _coordinate_space(model: Model, coords) -> Subspace:
    coords = sorted(coords)
    if not coords:
        return zero_space(model.dim, model.field)
    rows = model.field.zeros((len(coords), model.dim))
    rows[np.arange(len(coords)), coords] = model.field.scalar(1)
    return rref(rows, model.field)


@lru_cache(maxsize=256)
def subspace_L(inst: Instance, alpha: int) -> Subspace:
    """Span of the basis vectors indexed by ``amax >= alpha``."""
    if not 0 <= alpha < inst.n:
        raise PreconditionError(f"alpha={alpha} outside [0, {inst.n})")
    m = get_model(inst)
    return _coordinate_space(m, np.flatnonzero(m.amax >= alpha).tolist())


@lru_cache(maxsize=256)
def subspace_Lab(inst: Instance, alpha: int, beta: int) -> Subspace:
    """Span of ``x_eta - x_{eta + (alpha, beta)}`` for ``amax(eta) < alpha``, plus ``L_beta``."""
    if alpha not in inst.s or not alpha < beta < inst.n:
        raise PreconditionError(f"L_ab needs alpha in s and alpha < beta < n, got ({alpha},{beta})")
    m = get_model(inst)
    low = y_below(inst, alpha)
    rows = m.field.zeros((len(low), m.dim))
    one = m.field.scalar(1)
    for i, eta in enumerate(low):
        ext = concat(eta, [(alpha, beta)], inst)
        rows[i, m.position[eta]] = one
        rows[i, m.position[ext]] = m.field.scalar(-1)
    diffs = rref(rows, m.field, ambient=m.dim)
    return sum_spaces(diffs, subspace_L(inst, beta))

