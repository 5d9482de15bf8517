"""Brute-force submodule lattice over GF(2) for tiny instances.

Vectors are bitmasks (bit ``i`` is the coordinate of the ``i``-th index).  A
subspace is stored as a *pivot table*: a length-``d`` row whose entry ``l``
is the basis vector with leading bit ``l`` (or 0), in fully reduced form.
That row is canonical, so it doubles as a hash key, and joins of whole
batches of subspaces vectorize over numpy.

Every submodule is the join of the cyclic submodules it contains, hence the
lattice is the join-closure of the cyclic closures of all nonzero vectors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from .errors import CapExceeded, PreconditionError
from .index import Instance
from .linalg import Subspace
from .operators import get_model

_DT = np.uint16


def _lead_table(d: int) -> np.ndarray:
    lead = np.full(1 << d, -1, dtype=np.int64)
    for v in range(1, 1 << d):
        lead[v] = v.bit_length() - 1
    return lead


def insert(P: np.ndarray, v: np.ndarray, lead: np.ndarray) -> np.ndarray:
    """Add vector ``v[i]`` to subspace ``P[i]`` for every ``i`` (in place)."""
    d = P.shape[1]
    v = v.astype(_DT, copy=True)
    for l in range(d - 1, -1, -1):
        hit = ((v >> l) & 1).astype(bool)
        v = np.where(hit, v ^ P[:, l], v)
    lb = lead[v]
    rows = np.flatnonzero(lb >= 0)
    if rows.size:
        lb = lb[rows]
        sub = P[rows]
        mask = ((sub >> lb[:, None].astype(_DT)) & 1).astype(bool)
        sub = np.where(mask, sub ^ v[rows][:, None], sub)
        sub[np.arange(rows.size), lb] = v[rows]
        P[rows] = sub
    return P


def reduce(P: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Residue of ``v[i]`` modulo ``P[i]``; zero iff ``v[i]`` lies in ``P[i]``."""
    v = v.astype(_DT, copy=True)
    for l in range(P.shape[1] - 1, -1, -1):
        hit = ((v >> l) & 1).astype(bool)
        v = np.where(hit, v ^ P[:, l], v)
    return v


@dataclass(frozen=True)
class OracleSpace:
    row: tuple

    @classmethod
    def from_vectors(cls, vectors: Iterable[int], d: int) -> "OracleSpace":
        P = np.zeros((1, d), dtype=_DT)
        lead = _lead_table(d)
        for v in vectors:
            insert(P, np.array([v], dtype=_DT), lead)
        return cls(tuple(int(x) for x in P[0]))

    @property
    def d(self) -> int:
        return len(self.row)

    @property
    def basis(self) -> tuple:
        return tuple(v for v in self.row if v)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def elements(self) -> frozenset:
        elems = {0}
        for b in self.basis:
            elems |= {e ^ b for e in elems}
        return frozenset(elems)

    def __le__(self, other: "OracleSpace") -> bool:
        return all(v in other.elements for v in self.basis)

    def __lt__(self, other: "OracleSpace") -> bool:
        return self <= other and self.dim < other.dim

    def join(self, other: "OracleSpace") -> "OracleSpace":
        return OracleSpace.from_vectors(self.basis + other.basis, self.d)

    def meet(self, other: "OracleSpace") -> "OracleSpace":
        return OracleSpace.from_vectors(self.elements & other.elements, self.d)


def to_mask(v) -> int:
    return sum(1 << i for i, x in enumerate(v) if int(x) % 2)


def from_subspace(S: Subspace) -> OracleSpace:
    return OracleSpace.from_vectors((to_mask(row) for row in S.basis), S.ambient)


def _key(P: np.ndarray) -> np.ndarray:
    P = np.ascontiguousarray(P)
    return P.view(np.dtype((np.void, P.shape[1] * P.itemsize))).ravel()


class Lattice:
    """All submodules, as an array of pivot tables in sorted-key order."""

    def __init__(self, inst: Instance, tables: np.ndarray, cyclic_count: int):
        self.inst = inst
        self.d = tables.shape[1]
        order = np.argsort(_key(tables), kind="stable")
        self.tables = tables[order]
        self.dims = (self.tables != 0).sum(axis=1)
        self.cyclic_count = cyclic_count
        self._lead = _lead_table(self.d)
        self._index = {bytes(k): i for i, k in enumerate(_key(self.tables))}

    def __len__(self):
        return self.tables.shape[0]

    def __contains__(self, x: OracleSpace) -> bool:
        return bytes(_key(np.array([x.row], dtype=_DT))[0]) in self._index

    def member(self, i: int) -> OracleSpace:
        return OracleSpace(tuple(int(v) for v in self.tables[i]))

    def members(self):
        return (self.member(i) for i in range(len(self)))

    def contains_space(self, S: OracleSpace) -> np.ndarray:
        """Mask of lattice members that contain ``S``."""
        ok = np.ones(len(self), dtype=bool)
        for b in S.basis:
            ok &= reduce(self.tables, np.full(len(self), b, dtype=_DT)) == 0
        return ok

    def inside(self, S: OracleSpace) -> np.ndarray:
        """Mask of lattice members contained in ``S``."""
        ok = np.ones(len(self), dtype=bool)
        Pb = np.broadcast_to(np.array(S.row, dtype=_DT), self.tables.shape)
        for col in range(self.d):
            ok &= reduce(Pb, self.tables[:, col]) == 0
        return ok

    def join_dims(self, S: OracleSpace, mask: np.ndarray) -> np.ndarray:
        """``dim(S + X)`` for the members ``X`` selected by ``mask``."""
        P = self.tables[mask].copy()
        for b in S.basis:
            insert(P, np.full(P.shape[0], b, dtype=_DT), self._lead)
        return (P != 0).sum(axis=1)

    def sampled_closure_check(self, rng: random.Random, pairs: int = 200) -> bool:
        """Joins and meets of random member pairs stay in the lattice."""
        n = len(self)
        for _ in range(pairs):
            a, b = self.member(rng.randrange(n)), self.member(rng.randrange(n))
            if a.join(b) not in self or a.meet(b) not in self:
                return False
        return True


def _image_tables(inst: Instance) -> list[list[int]]:
    model = get_model(inst)
    d = model.dim
    tables = []
    for pm in model.gen_maps:
        unit = [0 if pm[i] < 0 else 1 << int(pm[i]) for i in range(d)]
        tab = [0] * (1 << d)
        for v in range(1, 1 << d):
            low = v & -v
            tab[v] = tab[v ^ low] ^ unit[low.bit_length() - 1]
        tables.append(tab)
    return tables


def _cyclic(v: int, tables: list[list[int]]) -> frozenset:
    elems = {0}
    queue = [v]
    while queue:
        w = queue.pop()
        if w in elems:
            continue
        elems |= {e ^ w for e in elems}
        for tab in tables:
            img = tab[w]
            if img not in elems:
                queue.append(img)
    return frozenset(elems)


def enumerate_lattice(inst: Instance, chunk: int = 1 << 17) -> Lattice:
    """All generator-closed subspaces of L over GF(2)."""
    if inst.prime != 2:
        raise PreconditionError(f"the oracle runs over GF(2) only, got prime={inst.prime}")
    d = get_model(inst).dim
    if d > inst.max_oracle_dim:
        raise CapExceeded(f"dim L = {d} exceeds the oracle cap {inst.max_oracle_dim}")
    lead = _lead_table(d)
    tables = _image_tables(inst)
    seen_elems: set = set()
    atoms = []
    for v in range(1, 1 << d):
        elems = _cyclic(v, tables)
        if elems not in seen_elems:
            seen_elems.add(elems)
            atoms.append(OracleSpace.from_vectors(elems, d).row)
    A = np.array(atoms, dtype=_DT).reshape(-1, d)
    zero = np.zeros((1, d), dtype=_DT)
    known = {bytes(_key(zero)[0])}
    found = [zero]
    frontier = zero
    while frontier.shape[0]:
        fresh = []
        step = max(1, chunk // max(1, A.shape[0]))
        for lo in range(0, frontier.shape[0], step):
            F = frontier[lo:lo + step]
            P = np.repeat(F, A.shape[0], axis=0)
            B = np.tile(A, (F.shape[0], 1))
            for col in range(d):
                if B[:, col].any():
                    insert(P, B[:, col], lead)
            keys = _key(P)
            _, first = np.unique(keys, return_index=True)
            for i in np.sort(first):
                k = bytes(keys[i])
                if k not in known:
                    known.add(k)
                    fresh.append(P[i])
        frontier = np.array(fresh, dtype=_DT).reshape(-1, d)
        found.append(frontier)
    return Lattice(inst, np.vstack(found), len(atoms))


def oracle_complement(lattice: Lattice, V: OracleSpace, W: OracleSpace,
                      U: OracleSpace) -> Optional[OracleSpace]:
    """A lattice member ``X`` with ``W & X = V`` and ``W + X = U``, or None.

    With ``V <= X <= U`` and ``V <= W <= U``, the two equations reduce to
    ``dim X = dim U - dim W + dim V`` and ``dim(W + X) = dim U``."""
    for S in (V, W, U):
        if S not in lattice:
            raise PreconditionError("V, W, U must be members of the enumerated lattice")
    if not (V.dim > 0 and V < W <= U):
        raise PreconditionError("need 0 != V < W <= U")
    target = U.dim - W.dim + V.dim
    mask = (lattice.dims == target) & lattice.contains_space(V) & lattice.inside(U)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    hits = idx[lattice.join_dims(W, mask) == U.dim]
    if hits.size == 0:
        return None
    X = lattice.member(int(hits[0]))
    assert W.meet(X) == V and W.join(X) == U
    return X


def oracle_complemented(lattice: Lattice, V: OracleSpace, W: OracleSpace, U: OracleSpace) -> bool:
    return oracle_complement(lattice, V, W, U) is not None


def lattice_summary(lattice: Lattice, seed: int = 1) -> dict:
    return {
        "size": len(lattice),
        "ambient": lattice.d,
        "members_by_dim": np.bincount(lattice.dims, minlength=lattice.d + 1).tolist(),
        "cyclic_count": lattice.cyclic_count,
        "sampled_meet_join_closed": lattice.sampled_closure_check(random.Random(f"{seed}:lattice")),
    }
