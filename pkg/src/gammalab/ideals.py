"""Two-sided ideals inside the realized algebra.

Elements of the algebra are flattened ``d x d`` matrices.  ``I_alpha`` is
computed in coordinates over the algebra basis (the elements whose rows avoid
every coordinate with ``amax < alpha``), then cross-checked against the ideal
generated by the generators whose ``rho`` reaches level ``alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import InternalError, PreconditionError
from .index import Index, Instance
from .linalg import Subspace, left_kernel, residual, rref, saturate
from .operators import Generator, compose_maps, generator_matrix, get_model, left_multiply, right_multiply, subspace_L
from .lattice import algebra_basis, monoid_table
from .rewrite import CanonicalForm, ideal_level, normalize, realize


@dataclass
class IdealSubspace:
    """``span`` lives in the flattened matrix space of dimension ``d * d``."""

    inst: Instance
    label: str
    span: Subspace
    closed: bool

    @property
    def dim(self) -> int:
        return self.span.dim

    def matrices(self) -> np.ndarray:
        d = get_model(self.inst).dim
        return self.span.basis.reshape(-1, d, d)

    def contains(self, M: np.ndarray) -> bool:
        return M.reshape(-1) in self.span

    def to_dict(self) -> dict:
        return {"label": self.label, "dim": self.dim, "closed": self.closed}


def _two_sided_images(inst: Instance):
    model = get_model(inst)
    d, fld = model.dim, model.field

    def images(batch: np.ndarray) -> np.ndarray:
        X = batch.reshape(-1, d, d)
        out = []
        for pm in model.gen_maps:
            out.append(left_multiply(pm, X, fld).reshape(-1, d * d))
            out.append(right_multiply(X, pm, fld).reshape(-1, d * d))
        return np.vstack(out) if out else fld.zeros((0, d * d))

    return images


def is_two_sided_closed(span: Subspace, inst: Instance) -> bool:
    if span.dim == 0:
        return True
    imgs = _two_sided_images(inst)(span.basis)
    return not residual(imgs, span).any()


def image_in_L(M: np.ndarray, inst: Instance, alpha: int) -> bool:
    """Row space of ``M`` inside ``L_alpha``: every nonzero column has ``amax >= alpha``."""
    model = get_model(inst)
    cols = (M.reshape(-1, model.dim, model.dim) != 0).any(axis=(0, 1))
    return bool(np.all(model.amax[cols] >= alpha))


@lru_cache(maxsize=64)
def ideal_I(inst: Instance, alpha: int) -> IdealSubspace:
    """``{r in R : Im r <= L_alpha}``; raises InternalError if it differs from
    the ideal generated by ``{T[nu->rho] : amax(rho) >= alpha}``."""
    if not 0 < alpha < inst.n:
        raise PreconditionError(f"I_alpha needs 0 < alpha < n, got alpha={alpha}")
    model = get_model(inst)
    alg = algebra_basis(inst)
    d, fld = model.dim, model.field
    # coordinate (i, j) of a flattened partial map is column j
    forbidden_cols = np.flatnonzero(model.amax < alpha)
    flat = alg.flat()
    idx = (np.arange(d)[:, None] * d + forbidden_cols[None, :]).ravel()
    coeffs = left_kernel(flat[:, idx], fld) if alg.dim else None
    dim_direct = coeffs.dim if coeffs is not None else 0

    table = monoid_table(inst)
    seeds = [table.index_of(pm) for g, pm in zip(model.generators, model.gen_maps) if g.rho.amax >= alpha]
    words = table.elements[table.ideal(seeds)] if seeds else table.elements[:0]
    words = words[(words >= 0).any(axis=1)]
    span = rref(model.maps_flat(words), fld, ambient=d * d)
    if span.dim != dim_direct:
        raise InternalError(
            f"I_{alpha} at {inst.label()}: image criterion gives dim {dim_direct}, "
            f"generated ideal gives dim {span.dim}"
        )
    if span.dim and not image_in_L(span.basis, inst, alpha):
        raise InternalError(f"generated ideal escapes L_{alpha} at {inst.label()}")
    return IdealSubspace(inst, f"I_{alpha}", span, closed=True)


def ideal_chain(inst: Instance) -> dict:
    """Dimensions of ``I_1 >= I_2 >= ...`` and the witnesses separating them."""
    dims = {a: ideal_I(inst, a).dim for a in range(1, inst.n)}
    valid = [a for a in range(1, inst.n - 1) if subspace_L(inst, a + 1).dim > 0]
    steps = []
    for a in valid:
        w = Generator(Index(((0, 1),)), Index(((a, a + 1),)))
        M = generator_matrix(w, inst)
        inside = ideal_I(inst, a).contains(M)
        outside = not ideal_I(inst, a + 1).contains(M)
        steps.append({
            "alpha": a,
            "witness": str(w),
            "in_I_alpha": inside,
            "not_in_next": outside,
            "strict": dims[a] > dims[a + 1],
        })
    decreasing = all(dims[a] >= dims[a + 1] for a in range(1, inst.n - 1))
    return {
        "dims": {str(a): v for a, v in dims.items()},
        "decreasing": decreasing,
        "valid_range": valid,
        "steps": steps,
        "strict_on_valid_range": all(s["strict"] and s["in_I_alpha"] and s["not_in_next"] for s in steps),
    }


@dataclass
class ClosureReport:
    ideal: IdealSubspace
    generators_found: int
    first_generator: Optional[str]

    @property
    def contains_generator(self) -> bool:
        return self.generators_found > 0

    def to_dict(self) -> dict:
        return {
            **self.ideal.to_dict(),
            "contains_generator": self.contains_generator,
            "generators_found": self.generators_found,
            "first_generator": self.first_generator,
        }


def _monoid_vector(r: CanonicalForm, inst: Instance, table) -> np.ndarray:
    """``r`` as a vector over monoid indices (coordinate of the zero map dropped)."""
    model = get_model(inst)
    fld = model.field
    v = fld.zeros(table.elements.shape[0])
    if r.unit != 0:
        v[table.index_of(model.identity_map())] += r.unit
    for prod, c in r.terms.items():
        pm = model.identity_map()
        for g in prod.factors:
            pm = compose_maps(pm, model.generator_map(g))
        v[table.index_of(pm)] += c
    v[~table.nonzero] = 0
    return fld.norm(v)


def two_sided_closure(inst: Instance, r, verify_closed: bool = False) -> ClosureReport:
    """``RrR`` for nonzero ``r``.

    The saturation runs in the contracted monoid algebra over the same
    monoid, where multiplying by a generator permutes coordinates; its
    image in the matrix algebra is exactly ``RrR`` because the evaluation
    map is an algebra homomorphism onto ``R``.  The closure flag therefore
    holds by construction; ``verify_closed`` re-checks it on matrices."""
    model = get_model(inst)
    fld = model.field
    if isinstance(r, str):
        r = normalize(r, inst)
    M = realize(r, inst)
    if not M.any():
        raise PreconditionError("two-sided closure needs a nonzero element")
    table = monoid_table(inst)
    m = table.elements.shape[0]
    dead = np.flatnonzero(~table.nonzero)

    def images(batch: np.ndarray) -> np.ndarray:
        out = []
        for tab in (table.right, table.left):
            for gi in range(tab.shape[1]):
                Y = fld.zeros(batch.shape)
                np.add.at(Y, (slice(None), tab[:, gi]), batch)
                Y[:, dead] = 0
                out.append(fld.norm(Y))
        return np.vstack(out) if out else fld.zeros((0, m))

    start = rref(_monoid_vector(r, inst, table).reshape(1, -1), fld)
    free = saturate(start, images)
    span = rref(fld.matmul(free.basis, model.maps_flat(table.elements)), fld, ambient=model.dim ** 2)
    if not M.reshape(-1) in span:
        raise InternalError("monoid-algebra image lost the element itself")
    found, first = 0, None
    if model.generators:
        res = residual(model.maps_flat(model.gen_maps), span)
        hits = np.flatnonzero(~(res != 0).any(axis=1))
        found = int(hits.size)
        if found:
            first = str(model.generators[int(hits[0])])
    closed = is_two_sided_closed(span, inst) if verify_closed else True
    return ClosureReport(IdealSubspace(inst, "RrR", span, closed), found, first)


def ideal_noncomplement_step(inst: Instance, alpha: int, beta: int, r: CanonicalForm) -> dict:
    """Check ``s * r = 0`` with ``s = T[0,1->alpha,gamma]`` in ``I_alpha``
    but not ``I_beta``, for the least ``gamma`` whose pair ``(alpha, gamma)``
    occurs in no first-factor ``nu`` of ``r``."""
    if not 0 < alpha < beta < inst.n:
        raise PreconditionError(f"need 0 < alpha < beta < n, got ({alpha},{beta})")
    if r.is_zero():
        raise PreconditionError("r must be nonzero")
    if ideal_level(r, inst) < alpha:
        raise PreconditionError(f"r is not in I_{alpha} (level {ideal_level(r, inst)})")
    used = sorted({
        g for prod in r.terms for (a, g) in prod.first_nu.pairs if a == alpha
    })
    free = [g for g in range(alpha + 1, inst.n) if g not in used]
    out = {"alpha": alpha, "beta": beta, "r": str(r), "used_gammas": used}
    if not free:
        return {**out, "status": "exhausted", "ok": None}
    gamma = free[0]
    s = Generator(Index(((0, 1),)), Index(((alpha, gamma),)))
    S = generator_matrix(s, inst)
    R = realize(r, inst)
    in_a = image_in_L(S, inst, alpha)
    not_b = not image_in_L(S, inst, beta)
    kills = not get_model(inst).field.matmul(S, R).any()
    return {
        **out,
        "status": "checked",
        "gamma": gamma,
        "s": str(s),
        "s_in_I_alpha": in_a,
        "s_not_in_I_beta": not_b,
        "s_times_r_zero": kills,
        "ok": in_a and not_b and kills,
    }
