"""Submodule computations on the module L.

Complementedness of ``L_alpha`` over ``L_beta`` inside ``L_gamma`` is decided
by certificates: an explicit complement when ``alpha`` is in ``s``, and for
``alpha`` outside ``s`` the two facts about a single generator that rule out
any complement.  Both kinds are re-checkable through :func:`verify_report`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import CertificateFailure, InternalError, PreconditionError
from .index import Index, Instance, initial_segment, y_slice
from .linalg import (
    Subspace,
    contains_space,
    intersect,
    kernel,
    left_kernel,
    residual,
    rref,
    saturate,
    solve,
    sum_spaces,
)
from .operators import (
    Generator,
    Model,
    apply_generator,
    compose_maps,
    get_model,
    left_multiply,
    right_multiply,
    subspace_L,
    subspace_Lab,
)
from .rewrite import enumerate_irredundant, realize


@dataclass(frozen=True)
class Submodule:
    space: Subspace
    inst: Instance

    @property
    def dim(self) -> int:
        return self.space.dim

    def __eq__(self, other):
        return isinstance(other, Submodule) and self.space == other.space

    def __hash__(self):
        return hash(self.space)


def _expand(offsets: np.ndarray, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For each ``keys[t]``, the positions ``offsets[k]:offsets[k+1]``; returns
    (owner t, position) pairs, concatenated."""
    counts = offsets[keys + 1] - offsets[keys]
    owner = np.repeat(np.arange(keys.size), counts)
    starts = np.repeat(offsets[keys] - np.cumsum(counts) + counts, counts)
    return owner, starts + np.arange(owner.size)


def is_generator_closed(space: Subspace, inst: Instance) -> bool:
    """``X M_g`` inside ``X`` for every generator ``g``.

    With ``K`` spanning the annihilator of ``X`` this says ``B M_g K^T = 0``
    for a basis ``B``.  Every factor is sparse, so the entries are summed
    from the nonzero triples (basis entry, map entry, annihilator entry)."""
    model = get_model(inst)
    if space.dim in (0, model.dim):
        return True
    fld = model.field
    if not fld.prime:
        imgs = model.apply_generators(space.basis)
        return contains_space(space, rref(imgs, fld, ambient=model.dim))
    B = space.basis
    K = kernel(B, fld).basis
    offsets, gens, dst = model.by_source
    rows, cols = np.nonzero(B)
    owner, pos = _expand(offsets, cols)
    g, tgt, r, val = gens[pos], dst[pos], rows[owner], B[rows, cols][owner]
    # annihilator entries grouped by column
    kcol_order = np.argsort(np.nonzero(K)[1], kind="stable")
    krow, kcol = (a[kcol_order] for a in np.nonzero(K))
    koff = np.searchsorted(kcol, np.arange(model.dim + 1))
    owner2, pos2 = _expand(koff, tgt)
    if owner2.size == 0:
        return True
    k = krow[pos2]
    weight = val[owner2] * K[k, kcol[pos2]]
    key = (g[owner2] * B.shape[0] + r[owner2]) * K.shape[0] + k
    _, inv = np.unique(key, return_inverse=True)
    sums = np.bincount(inv.ravel(), weights=weight.astype(np.float64))
    return not np.any(np.mod(sums, fld.prime))


def closure(vectors, inst: Instance) -> Submodule:
    """Least generator-closed subspace containing ``vectors``."""
    model = get_model(inst)
    rows = vectors if isinstance(vectors, np.ndarray) else model.field.array(list(vectors), ncols=model.dim)
    start = rref(rows, model.field, ambient=model.dim)
    return Submodule(saturate(start, model.apply_generators), inst)


def _closure_space(vectors, inst: Instance) -> Subspace:
    return closure(vectors, inst).space


# complementedness certificates

@dataclass
class ComplementReport:
    gamma: int
    alpha: int
    beta: int
    verdict: str
    certificate: dict
    oracle_confirmed: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "alpha": self.alpha,
            "beta": self.beta,
            "verdict": self.verdict,
            "certificate": self.certificate,
            "oracle_confirmed": self.oracle_confirmed,
        }


def _chain_pre(inst: Instance, gamma: int, alpha: int, beta: int):
    if not 0 <= gamma < alpha < beta < inst.n:
        raise PreconditionError(f"need gamma < alpha < beta < n, got ({gamma},{alpha},{beta})")
    if subspace_L(inst, beta).dim == 0:
        raise PreconditionError(f"L_{beta} = 0 at {inst.label()} (truncation boundary)")


def check_complement_positive(inst: Instance, gamma: int, alpha: int, beta: int) -> ComplementReport:
    _chain_pre(inst, gamma, alpha, beta)
    if alpha not in inst.s:
        raise PreconditionError(f"positive certificate needs alpha in s, got alpha={alpha}")
    La, Lb, Lg = subspace_L(inst, alpha), subspace_L(inst, beta), subspace_L(inst, gamma)
    if La == Lg:
        raise PreconditionError(f"L_{alpha} = L_{gamma}")
    X = intersect(subspace_Lab(inst, alpha, beta), Lg)
    meet_ok = intersect(La, X) == Lb
    join_ok = sum_spaces(La, X) == Lg
    closed = is_generator_closed(X, inst)
    if not (meet_ok and join_ok and closed):
        raise CertificateFailure(
            f"complement witness failed at {inst.label()} ({gamma},{alpha},{beta}): "
            f"meet={meet_ok} join={join_ok} closed={closed}"
        )
    return ComplementReport(
        gamma, alpha, beta, "complemented",
        {
            "kind": "witness",
            "witness": f"L_ab({alpha},{beta}) meet L_{gamma}",
            "witness_dim": X.dim,
            "witness_basis": X.rows(),
            "meet_equals_L_beta": meet_ok,
            "join_equals_L_gamma": join_ok,
            "witness_closed": closed,
        },
    )


def _negative_facts(inst: Instance, gamma: int, alpha: int) -> tuple[Generator, list, bool]:
    T = Generator(Index(((gamma, gamma + 1),)), Index(((alpha, alpha + 1),)))
    bad = []
    for eta in y_slice(inst, alpha):
        img = apply_generator(T, eta, inst)
        if img is not None and img.amax < alpha + 1:
            bad.append(str(eta))
    hits = apply_generator(T, T.nu, inst) == T.rho
    return T, bad, hits


def check_complement_negative(inst: Instance, gamma: int, alpha: int, beta: int) -> ComplementReport:
    _chain_pre(inst, gamma, alpha, beta)
    if alpha in inst.s:
        raise PreconditionError(f"negative certificate needs alpha not in s, got alpha={alpha}")
    T, bad, hits = _negative_facts(inst, gamma, alpha)
    if bad or not hits:
        raise CertificateFailure(
            f"negative certificate failed at {inst.label()} ({gamma},{alpha},{beta}): "
            f"escapes={bad} hits_rho={hits}"
        )
    return ComplementReport(
        gamma, alpha, beta, "not-complemented",
        {
            "kind": "obstruction",
            "generator": str(T),
            "pushes_L_alpha_into_L_alpha_plus_1": True,
            "checked_indices": len(y_slice(inst, alpha)),
            "image_of_nu": str(T.rho),
            "inference": (
                f"if X complements L_{alpha} over L_{beta} in L_{gamma}, write x_nu = x + y with "
                f"x in X, y in L_{alpha}; then xT = x_rho - yT lies in L_{alpha} but not in "
                f"L_{alpha + 1}, while xT in X meet L_{alpha} = L_{beta}, which is inside L_{alpha + 1}"
            ),
        },
    )


def certify(inst: Instance, gamma: int, alpha: int, beta: int) -> ComplementReport:
    if alpha in inst.s:
        return check_complement_positive(inst, gamma, alpha, beta)
    return check_complement_negative(inst, gamma, alpha, beta)


def verify_report(report: ComplementReport, inst: Instance) -> bool:
    """Re-check a certificate from its payload alone."""
    g, a, b = report.gamma, report.alpha, report.beta
    model = get_model(inst)
    if report.verdict == "complemented":
        X = rref(report.certificate["witness_basis"], model.field, ambient=model.dim)
        La, Lb, Lg = subspace_L(inst, a), subspace_L(inst, b), subspace_L(inst, g)
        return (
            contains_space(Lg, X)
            and is_generator_closed(X, inst)
            and intersect(La, X) == Lb
            and sum_spaces(La, X) == Lg
        )
    T = Generator.parse(report.certificate["generator"])
    if T.nu != Index(((g, g + 1),)) or T.rho != Index(((a, a + 1),)):
        return False
    # matrix-level recheck of both facts, independent of the symbolic walk
    M = model.map_matrix(model.generator_map(T))
    La, La1 = subspace_L(inst, a), subspace_L(inst, a + 1)
    image = rref(model.field.matmul(La.basis, M), model.field, ambient=model.dim)
    nu_img = model.field.matmul(model.basis_vector(T.nu), M)
    return contains_space(La1, image) and bool(np.array_equal(nu_img, model.basis_vector(T.rho)))


# gamma profile

@dataclass
class GammaProfile:
    gamma0: int
    e_set: list
    valid_range: list
    reports: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma0,
            "e_set": self.e_set,
            "valid_range": self.valid_range,
            "certificates": [_brief(r) for r in self.reports],
            "note": "the endpoint alpha = gamma is excluded: the top of a chain is always complemented",
        }


def _brief(rep: ComplementReport) -> dict:
    out = rep.to_dict()
    out["certificate"] = {k: v for k, v in rep.certificate.items() if k != "witness_basis"}
    return out


def valid_betas(inst: Instance, alpha: int) -> list[int]:
    return [b for b in range(alpha + 1, inst.n) if subspace_L(inst, b).dim > 0]


def gamma_profile(inst: Instance, gamma: int) -> GammaProfile:
    if not 0 <= gamma < inst.n or subspace_L(inst, gamma).dim == 0:
        raise PreconditionError(f"L_{gamma} = 0 at {inst.label()}")
    e_set, valid, reports = [], [], []
    for alpha in range(gamma + 1, inst.n):
        betas = valid_betas(inst, alpha)
        if not betas:
            continue
        valid.append(alpha)
        verdicts = []
        for beta in betas:
            rep = certify(inst, gamma, alpha, beta)
            reports.append(rep)
            verdicts.append(rep.verdict)
        if "not-complemented" in verdicts:
            e_set.append(alpha)
    return GammaProfile(gamma, e_set, valid, reports)


# cofinality

def cofinality_check(inst: Instance, x) -> dict:
    model = get_model(inst)
    vec = x if isinstance(x, np.ndarray) else model.field.array(x)
    support = [model.ys[i] for i in np.flatnonzero(vec != 0)]
    if not support:
        raise PreconditionError("cofinality check needs a nonzero vector")
    maximal = [
        nu for nu in support
        if not any(eta != nu and initial_segment(nu, eta) is not None for eta in support)
    ]
    nu = min(maximal, key=Index.sort_key)
    alpha = nu.bmax
    X = _closure_space(vec.reshape(1, -1), inst)
    targets = y_slice(inst, alpha) if alpha < inst.n else ()
    missing = [str(rho) for rho in targets if model.basis_vector(rho) not in X]
    return {
        "nu": str(nu),
        "alpha": alpha,
        "closure_dim": X.dim,
        "targets": len(targets),
        "missing": missing,
        "success": not missing,
    }


# the realized algebra

class AlgebraBasis:
    """Basis of the algebra spanned by the identity and all generator
    products.  Products of partial maps are partial maps, so the algebra is
    the span of a finite monoid; the basis is an independent subset of it."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.model = get_model(inst)
        table = monoid_table(inst)
        monoid = table.elements[table.nonzero]
        self.monoid_size = monoid.shape[0]
        flat = self.model.maps_flat(monoid)
        # independent rows of `flat` are the pivot columns of its transpose
        keep = _independent_rows(flat, self.model.field)
        self.maps = monoid[keep]
        self.dim = self.maps.shape[0]

    @property
    def field(self):
        return self.model.field

    def flat(self) -> np.ndarray:
        return self.model.maps_flat(self.maps)

    def matrices(self) -> np.ndarray:
        return self.flat().reshape(self.dim, self.model.dim, self.model.dim)

    @property
    def span(self) -> Subspace:
        return rref(self.flat(), self.field)

    def contains(self, M: np.ndarray) -> bool:
        return self.span.__contains__(M.reshape(-1))


def _independent_rows(flat: np.ndarray, fld) -> list[int]:
    if flat.shape[0] == 0:
        return []
    return list(rref(flat.T.copy(), fld).pivots)


def monoid_closure(model: Model, start: np.ndarray, left: bool = False) -> np.ndarray:
    """All products ``start * w`` (and ``w * start * w'`` with ``left``) for
    words ``w`` in the generators, as partial maps."""
    gens = model.gen_maps
    row_type = np.dtype((np.void, model.dim * start.dtype.itemsize))
    seen = {row.tobytes() for row in start}
    out = [row for row in start]
    frontier = start
    while frontier.shape[0]:
        fresh = []
        for a in frontier:
            batch = [compose_maps(a, gens)]
            if left:
                batch.append(compose_maps(gens, a))
            rows = np.ascontiguousarray(np.vstack(batch))
            for key in np.unique(rows.view(row_type).ravel()):
                b = key.tobytes()
                if b not in seen:
                    seen.add(b)
                    fresh.append(np.frombuffer(b, dtype=start.dtype))
        out.extend(fresh)
        frontier = np.array(fresh, dtype=start.dtype).reshape(-1, model.dim)
    return np.array(out, dtype=start.dtype).reshape(-1, model.dim)


class MonoidTable:
    """The monoid generated by the generator maps (identity and, when it
    arises, the zero map included), with index tables for multiplying each
    element by each generator on either side."""

    def __init__(self, inst: Instance):
        model = get_model(inst)
        gens = model.gen_maps
        M = monoid_closure(model, model.identity_map()[None, :])
        self.elements = M
        self.nonzero = (M >= 0).any(axis=1)
        lookup = {row.tobytes(): i for i, row in enumerate(M)}
        g = gens.shape[0]
        self.right = np.empty((M.shape[0], g), dtype=np.int64)
        self.left = np.empty((M.shape[0], g), dtype=np.int64)
        for i, a in enumerate(M):
            for table, rows in ((self.right, compose_maps(a, gens)), (self.left, compose_maps(gens, a))):
                rows = np.ascontiguousarray(rows)
                table[i] = [lookup[r.tobytes()] for r in rows]

    def index_of(self, pmap: np.ndarray) -> int:
        hits = np.flatnonzero((self.elements == pmap).all(axis=1))
        return int(hits[0]) if hits.size else -1

    def ideal(self, seeds) -> np.ndarray:
        """Indices of the two-sided monoid ideal generated by ``seeds``."""
        mask = np.zeros(self.elements.shape[0], dtype=bool)
        frontier = np.unique(np.asarray(seeds, dtype=np.int64))
        mask[frontier] = True
        while frontier.size:
            nxt = np.unique(np.concatenate([self.right[frontier].ravel(), self.left[frontier].ravel()]))
            frontier = nxt[~mask[nxt]]
            mask[frontier] = True
        return np.flatnonzero(mask)


@lru_cache(maxsize=16)
def monoid_table(inst: Instance) -> MonoidTable:
    return MonoidTable(inst)


@lru_cache(maxsize=16)
def algebra_basis(inst: Instance) -> AlgebraBasis:
    return AlgebraBasis(inst)


def algebra_report(inst: Instance) -> dict:
    alg = algebra_basis(inst)
    irr = enumerate_irredundant(inst)
    expected = len(irr) + 1
    return {
        "dimension": alg.dim,
        "monoid_size": alg.monoid_size,
        "irredundant_products": len(irr),
        "expected_if_independent": expected,
        "independence_defect": expected - alg.dim,
    }


def product_closed(alg: AlgebraBasis) -> bool:
    """Every product of two basis elements lies in the span."""
    model = alg.model
    prods = np.vstack([compose_maps(a, alg.maps) for a in alg.maps])
    span = alg.span
    flat = model.maps_flat(prods)
    return not residual(flat, span).any()


def pseudo_inverse_exists(inst: Instance, a) -> bool:
    """Whether ``A X A = A`` has a solution ``X`` in the realized algebra."""
    alg = algebra_basis(inst)
    fld = alg.field
    A = a if isinstance(a, np.ndarray) else realize(a, inst)
    mats = alg.matrices()
    cols = np.stack([fld.matmul(fld.matmul(A, B), A).reshape(-1) for B in mats], axis=1)
    return solve(cols, A.reshape(-1), fld) is not None


# endomorphisms

def _restricted_maps(model: Model, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.flatnonzero(model.amax >= alpha)
    relabel = np.full(model.dim + 1, -1, dtype=np.int64)
    relabel[idx] = np.arange(idx.size)
    sub = model.gen_maps[:, idx]
    sub = np.where(sub >= 0, relabel[np.where(sub >= 0, sub, model.dim)], -1)
    if (sub[model.gen_maps[:, idx] >= 0] < 0).any():
        raise InternalError(f"L_{alpha} is not generator-invariant")
    sub = sub[(sub >= 0).any(axis=1)]
    return idx, sub


def _commutator_rows(X: np.ndarray, pm: np.ndarray, fld) -> np.ndarray:
    """Flattened ``X M - M X`` for a batch ``X`` (k, d, d) and partial map ``M``."""
    k, d, _ = X.shape
    diff = right_multiply(X, pm, fld) - left_multiply(pm, X, fld)
    return fld.norm(diff).reshape(k, d * d)


def centralizer_incremental(inst: Instance, alpha: int) -> int:
    model = get_model(inst)
    fld = model.field
    idx, maps = _restricted_maps(model, alpha)
    d = idx.size
    B = fld.eye(d * d)
    for pm in maps:
        C = _commutator_rows(B.reshape(-1, d, d), pm, fld)
        K = left_kernel(C, fld)
        if K.dim == 0:
            return 0
        B = rref(fld.matmul(K.basis, B), fld).basis
    return B.shape[0]


def centralizer_stacked(inst: Instance, alpha: int) -> int:
    model = get_model(inst)
    fld = model.field
    idx, maps = _restricted_maps(model, alpha)
    d = idx.size
    I = fld.eye(d)
    blocks = []
    for pm in maps:
        M = fld.zeros((d, d))
        src = np.flatnonzero(pm >= 0)
        M[src, pm[src]] = fld.scalar(1)
        # row-major vec: vec(X M) = (I kron M^T) vec X, vec(M X) = (M kron I) vec X
        K = fld.norm(np.kron(I, M.T) - np.kron(M, I))
        blocks.append(K[(K != 0).any(axis=1)])
    if not blocks:
        return d * d
    system = np.unique(np.vstack(blocks), axis=0)
    return d * d - rref(system, fld).dim


def centralizer_dim(inst: Instance, alpha: int) -> int:
    if subspace_L(inst, alpha).dim == 0:
        raise PreconditionError(f"L_{alpha} = 0 at {inst.label()}")
    a = centralizer_incremental(inst, alpha)
    b = centralizer_stacked(inst, alpha)
    if a != b:
        raise InternalError(f"centralizer methods disagree at {inst.label()}, alpha={alpha}: {a} vs {b}")
    return a


# distributivity

def distributivity_refutation(inst: Instance, alpha: int, beta1: Optional[int] = None,
                              beta2: Optional[int] = None) -> dict:
    betas = [b for b in range(alpha + 2, inst.n)]
    if alpha + 2 >= inst.n or len(betas) < 2:
        raise PreconditionError(f"need alpha + 2 < n and two beta in ({alpha + 1}, {inst.n})")
    beta1 = betas[0] if beta1 is None else beta1
    beta2 = betas[1] if beta2 is None else beta2
    if beta1 == beta2 or beta1 not in betas or beta2 not in betas:
        raise PreconditionError(f"beta1, beta2 must be distinct values in {betas}")
    model = get_model(inst)
    x1 = model.basis_vector(Index(((alpha + 1, beta1),)))
    x2 = model.basis_vector(Index(((alpha + 1, beta2),)))
    base = subspace_L(inst, alpha + 2)
    A = sum_spaces(_closure_space(x1.reshape(1, -1), inst), base)
    B = sum_spaces(_closure_space(x2.reshape(1, -1), inst), base)
    C = sum_spaces(_closure_space(model.field.norm(x1 + x2).reshape(1, -1), inst), base)
    lhs = intersect(A, sum_spaces(B, C))
    rhs = sum_spaces(intersect(A, B), intersect(A, C))
    return {
        "alpha": alpha,
        "beta1": beta1,
        "beta2": beta2,
        "dims": {"A": A.dim, "B": B.dim, "C": C.dim, "base": base.dim},
        "lhs_dim": lhs.dim,
        "rhs_dim": rhs.dim,
        "refuted": lhs != rhs,
    }
