"""Exact linear algebra over GF(p) and the rationals.

Vectors are rows; a subspace is stored as its reduced row-echelon basis, so
two equal subspaces always carry bit-identical bases.  GF(p) arithmetic runs
on int64 numpy arrays (``p < 2**16`` keeps every product below 2**32);
rationals use object arrays of :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch


_FLOAT_EXACT = float(2 ** 53)


class Field:
    def __init__(self, prime: int):
        self.prime = int(prime)
        self.dtype = np.int64 if self.prime else object

    def __repr__(self):
        return f"Field({self.prime})" if self.prime else "Field(Q)"

    def __eq__(self, other):
        return isinstance(other, Field) and other.prime == self.prime

    def __hash__(self):
        return hash(("Field", self.prime))

    @property
    def name(self) -> str:
        return f"GF({self.prime})" if self.prime else "Q"

    def scalar(self, x):
        if self.prime:
            if isinstance(x, Fraction):
                return int(x.numerator * pow(x.denominator, -1, self.prime) % self.prime)
            return int(x) % self.prime
        return Fraction(x)

    def inv(self, x):
        if self.prime:
            return pow(int(x), -1, self.prime)
        return 1 / Fraction(x)

    def norm(self, arr: np.ndarray) -> np.ndarray:
        if self.prime:
            return np.mod(arr, self.prime)
        return arr

    def array(self, data, ncols: Optional[int] = None) -> np.ndarray:
        if self.prime:
            arr = np.array(data, dtype=np.int64)
            arr %= self.prime
        else:
            arr = np.array(data, dtype=object)
            if arr.size:
                arr = np.vectorize(Fraction, otypes=[object])(arr)
        if ncols is not None and arr.size == 0:
            arr = arr.reshape(0, ncols)
        return arr

    def zeros(self, shape) -> np.ndarray:
        if self.prime:
            return np.zeros(shape, dtype=np.int64)
        arr = np.empty(shape, dtype=object)
        arr.fill(Fraction(0))
        return arr

    def eye(self, d: int) -> np.ndarray:
        out = self.zeros((d, d))
        for i in range(d):
            out[i, i] = self.scalar(1)
        return out

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.prime and a.shape[-1] * (self.prime - 1) ** 2 < _FLOAT_EXACT:
            # float64 BLAS is exact while every partial sum stays below 2**53
            out = np.mod(a, self.prime).astype(np.float64) @ np.mod(b, self.prime).astype(np.float64)
            return np.mod(out, self.prime).astype(np.int64)
        return self.norm(a @ b)

    def format(self, x) -> str:
        return str(self.scalar(x))


def _rref(M: np.ndarray, field: Field) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jordan elimination; returns (nonzero rref rows, pivot columns).

    All-zero columns are dropped before elimination and each pivot update only
    touches rows and columns that are nonzero, so sparse inputs stay cheap.
    """
    m, c = M.shape
    nzcols = np.flatnonzero((M != 0).any(axis=0)) if m else np.zeros(0, dtype=np.int64)
    sub = M[:, nzcols].copy()
    r = 0
    piv: list[int] = []
    for j in range(sub.shape[1]):
        if r == m:
            break
        nz = np.flatnonzero(sub[r:, j] != 0)
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            sub[[r, p]] = sub[[p, r]]
        lead = sub[r, j]
        if lead != 1:
            sub[r] = field.norm(sub[r] * field.inv(lead))
        others = np.flatnonzero(sub[:, j] != 0)
        others = others[others != r]
        if others.size:
            cols = np.flatnonzero(sub[r] != 0)
            block = np.ix_(others, cols)
            sub[block] = field.norm(sub[block] - np.outer(sub[others, j], sub[r, cols]))
        piv.append(j)
        r += 1
    out = field.zeros((r, c))
    out[:, nzcols] = sub[:r]
    return out, nzcols[np.array(piv, dtype=np.int64)]


@dataclass(frozen=True, eq=False)
class Subspace:
    basis: np.ndarray
    pivots: tuple
    ambient: int
    field: Field

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.field == other.field
            and self.ambient == other.ambient
            and self.basis.shape == other.basis.shape
            and bool(np.array_equal(self.basis, other.basis))
        )

    def __hash__(self):
        return hash((self.field.prime, self.ambient, self.pivots, tuple(self.basis.flat)))

    def __contains__(self, v) -> bool:
        return member(v, self)

    def __le__(self, other: "Subspace") -> bool:
        return contains_space(other, self)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient}, {self.field.name})"

    def rows(self) -> list[list]:
        return [[self.field.scalar(x) for x in row] for row in self.basis]


def zero_space(ambient: int, field: Field) -> Subspace:
    return Subspace(field.zeros((0, ambient)), (), ambient, field)


def full_space(ambient: int, field: Field) -> Subspace:
    return Subspace(field.eye(ambient), tuple(range(ambient)), ambient, field)


def rref(rows, field: Field, ambient: Optional[int] = None) -> Subspace:
    M = rows if isinstance(rows, np.ndarray) and rows.dtype == field.dtype else field.array(rows)
    if M.ndim == 1:
        M = M.reshape(1, -1) if M.size else M.reshape(0, ambient or 0)
    if M.size == 0:
        width = ambient if ambient is not None else (M.shape[1] if M.ndim == 2 else 0)
        return zero_space(width, field)
    if ambient is not None and M.shape[1] != ambient:
        raise DimensionMismatch(f"rows have length {M.shape[1]}, expected {ambient}")
    R, piv = _rref(field.norm(M), field)
    return Subspace(R, tuple(int(p) for p in piv), M.shape[1], field)


def _check(S: Subspace, T: Subspace):
    if S.ambient != T.ambient:
        raise DimensionMismatch(f"ambient dimensions {S.ambient} and {T.ambient} differ")
    if S.field != T.field:
        raise DimensionMismatch(f"fields {S.field} and {T.field} differ")


def residual(vectors: np.ndarray, S: Subspace) -> np.ndarray:
    """Reduce each row of ``vectors`` modulo ``S``; zero rows are members."""
    V = vectors if vectors.ndim == 2 else vectors.reshape(1, -1)
    if V.shape[1] != S.ambient:
        raise DimensionMismatch(f"vector length {V.shape[1]} != ambient {S.ambient}")
    if S.dim == 0:
        return S.field.norm(V.copy())
    coeff = V[:, list(S.pivots)]
    return S.field.norm(V - S.field.matmul(coeff, S.basis))


def member(v, S: Subspace) -> bool:
    vec = v if isinstance(v, np.ndarray) else S.field.array(v)
    return not residual(S.field.norm(vec), S).any()


def contains_space(S: Subspace, T: Subspace) -> bool:
    """True iff ``T`` is a subspace of ``S``."""
    _check(S, T)
    return T.dim == 0 or not residual(T.basis, S).any()


def sum_spaces(S: Subspace, T: Subspace) -> Subspace:
    _check(S, T)
    if T.dim == 0:
        return S
    if S.dim == 0:
        return T
    return rref(np.vstack([S.basis, T.basis]), S.field)


def kernel(A, field: Field) -> Subspace:
    """Null space ``{x : A x = 0}``, as a subspace of row vectors."""
    M = A if isinstance(A, np.ndarray) and A.dtype == field.dtype else field.array(A)
    ncols = M.shape[1]
    if M.shape[0] == 0:
        return full_space(ncols, field)
    R, piv = _rref(field.norm(M), field)
    pivset = set(int(p) for p in piv)
    free = [j for j in range(ncols) if j not in pivset]
    if not free:
        return zero_space(ncols, field)
    K = field.zeros((len(free), ncols))
    one = field.scalar(1)
    for i, f in enumerate(free):
        K[i, f] = one
        K[i, piv] = field.norm(-R[:, f])
    return rref(K, field)


def left_kernel(A, field: Field) -> Subspace:
    """``{y : y A = 0}``."""
    M = A if isinstance(A, np.ndarray) and A.dtype == field.dtype else field.array(A)
    return kernel(M.T.copy(), field)


def intersect(S: Subspace, T: Subspace) -> Subspace:
    """Intersection via the kernel of the stacked system ``a S + b T = 0``."""
    _check(S, T)
    if S.dim == 0 or T.dim == 0:
        return zero_space(S.ambient, S.field)
    K = left_kernel(np.vstack([S.basis, T.basis]), S.field)
    if K.dim == 0:
        return zero_space(S.ambient, S.field)
    a = K.basis[:, : S.dim]
    return rref(S.field.matmul(a, S.basis), S.field)


def solve(A, b, field: Field):
    """One solution ``x`` of ``A x = b``, or None when the system is inconsistent."""
    M = A if isinstance(A, np.ndarray) and A.dtype == field.dtype else field.array(A)
    rhs = b if isinstance(b, np.ndarray) and b.dtype == field.dtype else field.array(b)
    rhs = rhs.reshape(-1)
    if M.ndim != 2 or M.shape[0] != rhs.shape[0]:
        raise DimensionMismatch(f"matrix shape {M.shape} incompatible with rhs length {rhs.shape[0]}")
    ncols = M.shape[1]
    aug = np.hstack([M, rhs.reshape(-1, 1)])
    R, piv = _rref(field.norm(aug), field)
    if len(piv) and int(piv[-1]) == ncols:
        return None
    x = field.zeros(ncols)
    for i, p in enumerate(piv):
        x[int(p)] = R[i, ncols]
    return x


def saturate(start: Subspace, images: Callable[[np.ndarray], np.ndarray]) -> Subspace:
    """Smallest subspace containing ``start`` that is closed under the linear
    maps whose stacked images of a row batch are returned by ``images``."""
    current = start
    frontier = start.basis
    while frontier.shape[0]:
        imgs = images(frontier)
        if imgs.shape[0] == 0:
            break
        res = residual(imgs, current)
        res = res[(res != 0).any(axis=1)]
        if res.shape[0] == 0:
            break
        fresh = rref(res, current.field)
        current = sum_spaces(current, fresh)
        frontier = fresh.basis
    return current
