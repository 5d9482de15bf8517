"""The verification suite: one record per acceptance check, a few standing
findings about the truncated construction, and an optional per-instance sweep.

Every randomized check draws from ``random.Random(f"{seed}:{name}")`` so the
records do not depend on execution order.
"""

from __future__ import annotations

import json
import random
import time
from typing import Callable, Iterable, Optional

import numpy as np

from . import ideals, index, lattice, operators, rewrite
from .errors import CapExceeded, GammaLabError, RuleError
from .index import Index, Instance, enumerate_y, y_slice
from .lattice import (
    algebra_report,
    centralizer_dim,
    certify,
    closure,
    cofinality_check,
    distributivity_refutation,
    gamma_profile,
    is_generator_closed,
    pseudo_inverse_exists,
    verify_report,
)
from .operators import Generator, generator_matrix, get_model, subspace_L, subspace_Lab
from .report import Record, Report
from .rewrite import (
    compose_pair,
    ideal_level,
    normalize,
    random_canonical_form,
    random_product_expression,
    realize,
)

DEFAULT_SWEEP = (
    Instance(4, frozenset({0, 2}), prime=2),
    Instance(5, frozenset({0, 2}), prime=5),
    Instance(6, frozenset({0, 2, 4}), prime=5),
)

ANCHORS = {
    "gamma_profile": "E-set of the chain L_gamma is the range above gamma minus s",
    "oracle_agreement": "complemented-over: some X with W meet X = V and W + X = U",
    "rewrite_soundness": "product rules for pairs of generators agree with composition",
    "ideal_criterion": "r lies in I_alpha iff f = 0 and every final rho has amax >= alpha",
    "submodule_closure": "L_alpha and L_alpha,beta are submodules",
    "cyclic_generation": "L_alpha is generated by x_<(0,1),(alpha,alpha+1)>",
    "cofinality": "every nonzero cyclic submodule contains some L_alpha",
    "rigidity": "End_R(L_alpha) = F (expectation; truncation may enlarge it)",
    "non_regularity": "T_mu,phi has no pseudo-inverse in R",
    "non_distributivity": "the submodule lattice of L is not distributive",
    "ideal_chain": "I_alpha strictly decreasing and RrR contains a generator for r != 0",
    "ideal_noncomplement": "s(1 - r) = s lies in I_beta, refuting a complement candidate",
    "determinism": "identical seed gives identical report",
    "finding_algebra_independence": "irredundant products as a basis of R (truncated)",
    "finding_canonical_collision": "distinct canonical forms with equal realizations",
    "finding_rule_boundary": "rule for nu' = rho + tau emitting a symbol outside (*)",
}


def sub_rng(seed: int, name: str) -> random.Random:
    return random.Random(f"{seed}:{name}")


def clear_caches() -> None:
    for fn in (
        index._enumerate,
        operators.get_model,
        operators.subspace_L,
        operators.subspace_Lab,
        rewrite.successors,
        lattice.algebra_basis,
        lattice.monoid_table,
        ideals.ideal_I,
    ):
        fn.cache_clear()


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


# acceptance checks; each returns (status, payload)

def check_gamma_profile(seed: int):
    inst = Instance(6, frozenset({0, 2, 4}), prime=5)
    expected = {0: [1, 3], 2: [3]}
    out, ok = {}, True
    for gamma, want in expected.items():
        prof = gamma_profile(inst, gamma)
        predicted = [a for a in prof.valid_range if a not in inst.s]
        rechecked = all(verify_report(r, inst) for r in prof.reports)
        good = prof.e_set == want == predicted and rechecked
        ok &= good
        out[str(gamma)] = {**prof.to_dict(), "expected": want, "certificates_rechecked": rechecked}
    return _status(ok), {"instance": inst.label(), "profiles": out}


def oracle_triples(inst: Instance, lat) -> list[dict]:
    from .oracle import from_subspace, oracle_complemented

    chain = {a: subspace_L(inst, a) for a in range(inst.n)}
    rows = []
    for g in range(inst.n):
        for a in range(g, inst.n):
            for b in range(a + 1, inst.n):
                if chain[b].dim == 0 or not chain[b].dim < chain[a].dim <= chain[g].dim:
                    continue
                V, W, U = (from_subspace(chain[x]) for x in (b, a, g))
                oracle = oracle_complemented(lat, V, W, U)
                if a == g:
                    verdict, rechecked = "complemented", True
                else:
                    rep = certify(inst, g, a, b)
                    verdict, rechecked = rep.verdict, verify_report(rep, inst)
                rows.append({
                    "triple": [g, a, b],
                    "certificate": verdict,
                    "certificate_rechecked": rechecked,
                    "oracle": "complemented" if oracle else "not-complemented",
                    "agree": rechecked and (verdict == "complemented") == oracle,
                })
    return rows


def check_oracle_agreement(seed: int):
    from .oracle import enumerate_lattice, from_subspace, lattice_summary

    inst = Instance(4, frozenset({0, 2}), prime=2)
    lat = enumerate_lattice(inst)
    summary = lattice_summary(lat, seed)
    chain_present = all(from_subspace(subspace_L(inst, a)) in lat for a in range(inst.n))
    rows = oracle_triples(inst, lat)
    ok = chain_present and summary["sampled_meet_join_closed"] and rows and all(r["agree"] for r in rows)
    return _status(ok), {
        "instance": inst.label(),
        "lattice": summary,
        "chain_present": chain_present,
        "triples": rows,
    }


def _all_pairs_sound(inst: Instance) -> dict:
    model = get_model(inst)
    mats = [model.map_matrix(pm) for pm in model.gen_maps]
    rules = {"I": 0, "II": 0, "III": 0}
    bad = []
    for i, t1 in enumerate(model.generators):
        for j, t2 in enumerate(model.generators):
            rules[rewrite.relation(t1, t2)[0]] += 1
            lhs = realize(compose_pair(t1, t2, inst), inst)
            if not np.array_equal(lhs, model.field.matmul(mats[i], mats[j])):
                bad.append(f"{t1}*{t2}")
    return {"instance": inst.label(), "pairs": len(model.generators) ** 2, "rules": rules, "mismatches": bad[:10]}


def check_rewrite_soundness(seed: int):
    pairs = [_all_pairs_sound(Instance(n, frozenset({0, 2}))) for n in (4, 5)]
    inst = Instance(5, frozenset({0, 2}))
    rng = sub_rng(seed, "rewrite_soundness")
    bad, lengths = [], {}
    for _ in range(500):
        e = random_product_expression(rng, inst, max_len=4)
        k = len(e.terms[0][1])
        lengths[str(k)] = lengths.get(str(k), 0) + 1
        if not np.array_equal(realize(normalize(e, inst), inst), realize(e, inst)):
            bad.append(str(e))
    ok = all(not p["mismatches"] for p in pairs) and not bad
    return _status(ok), {"all_pairs": pairs, "random_products": 500, "lengths": lengths, "mismatches": bad[:10]}


def check_ideal_criterion(seed: int):
    inst = Instance(5, frozenset({0, 2}))
    model = get_model(inst)
    rng = sub_rng(seed, "ideal_criterion")
    bad = []
    for _ in range(200):
        c = random_canonical_form(rng, inst)
        M = realize(c, inst)
        cols = (M != 0).any(axis=0)
        image_level = int(model.amax[cols].min()) if cols.any() else inst.n
        level = ideal_level(c, inst)
        for alpha in range(inst.n):
            if (level >= alpha) != (image_level >= alpha):
                bad.append({"form": str(c), "alpha": alpha, "ideal_level": level})
                break
    return _status(not bad), {"instance": inst.label(), "forms": 200, "alphas": list(range(inst.n)), "mismatches": bad[:10]}


CLOSURE_INSTANCES = (
    (2, {0}), (3, {0, 1}), (4, {0, 2}), (5, {0, 2}), (5, {0, 1, 3}), (6, {0, 3}), (6, {0, 2, 4}),
)


def closure_facts(inst: Instance) -> dict:
    L_ok = all(is_generator_closed(subspace_L(inst, a), inst) for a in range(inst.n))
    pairs = [(a, b) for a in inst.s_list for b in range(a + 1, inst.n)]
    Lab_ok = all(is_generator_closed(subspace_Lab(inst, a, b), inst) for a, b in pairs)
    nested = all(subspace_L(inst, a + 1) <= subspace_L(inst, a) for a in range(inst.n - 1))
    return {
        "instance": inst.label(),
        "L_closed": L_ok,
        "Lab_pairs": len(pairs),
        "Lab_closed": Lab_ok,
        "nested": nested,
        "top_zero": subspace_L(inst, inst.n - 1).dim == 0,
    }


def check_submodule_closure(seed: int):
    rows = [closure_facts(Instance(n, frozenset(s))) for n, s in CLOSURE_INSTANCES]
    ok = all(r["L_closed"] and r["Lab_closed"] and r["nested"] and r["top_zero"] for r in rows)
    return _status(ok), {"instances": rows}


def cyclic_facts(inst: Instance) -> list[dict]:
    model = get_model(inst)
    rows = []
    for alpha in inst.s_list:
        if alpha == 0 or alpha + 1 >= inst.n or subspace_L(inst, alpha).dim == 0:
            continue
        eta = Index(((0, 1), (alpha, alpha + 1)))
        X = closure(model.basis_vector(eta).reshape(1, -1), inst)
        rows.append({
            "alpha": alpha,
            "vector": str(eta),
            "closure_dim": X.dim,
            "L_alpha_dim": subspace_L(inst, alpha).dim,
            "equal": X.space == subspace_L(inst, alpha),
        })
    return rows


def check_cyclic_generation(seed: int):
    out = {}
    for inst in (Instance(4, frozenset({0, 2})), Instance(6, frozenset({0, 2, 4}))):
        out[inst.label()] = cyclic_facts(inst)
    ok = all(rows and all(r["equal"] for r in rows) for rows in out.values())
    return _status(ok), out


def check_cofinality(seed: int):
    inst = Instance(5, frozenset({0, 2}))
    model = get_model(inst)
    rng = sub_rng(seed, "cofinality")
    failures, alphas = [], {}
    for _ in range(100):
        k = rng.randint(1, min(6, model.dim))
        v = model.field.zeros(model.dim)
        for i in rng.sample(range(model.dim), k):
            v[i] = rng.randrange(1, inst.prime)
        rep = cofinality_check(inst, v)
        alphas[str(rep["alpha"])] = alphas.get(str(rep["alpha"]), 0) + 1
        if not rep["success"]:
            failures.append(rep)
    return _status(not failures), {"instance": inst.label(), "vectors": 100, "alpha_histogram": alphas, "failures": failures[:5]}


def check_rigidity(seed: int):
    rows = []
    for inst in (Instance(4, frozenset({0, 2})), Instance(5, frozenset({0, 2}))):
        for alpha in (0, 1):
            rows.append({"instance": inst.label(), "alpha": alpha, "dim": centralizer_dim(inst, alpha)})
    over = [r for r in rows if r["dim"] != 1]
    status = "finding" if over else "pass"
    return status, {
        "methods_agree": True,
        "expected": 1,
        "values": rows,
        "note": (
            "both methods agree; values above 1 come from truncation: indices whose first "
            "pair ends at n-1 are killed by every generator and add commuting maps"
        ) if over else "",
    }


def check_non_regularity(seed: int):
    inst = Instance(5, frozenset({0, 2}))
    a = normalize("T[0,1->1,3]", inst)
    res = pseudo_inverse_exists(inst, a)
    unit = pseudo_inverse_exists(inst, normalize("1", inst))
    return _status(res is False and unit is True), {
        "instance": inst.label(),
        "element": str(a),
        "pseudo_inverse_exists": res,
        "control_unit_has_pseudo_inverse": unit,
    }


def check_non_distributivity(seed: int):
    rows = [distributivity_refutation(Instance(n, frozenset({0, 2})), 0) for n in (4, 5)]
    return _status(all(r["refuted"] for r in rows)), {"refutations": rows}


def check_ideal_chain(seed: int):
    chain = ideals.ideal_chain(Instance(6, frozenset({0, 2, 4})))
    inst = Instance(5, frozenset({0, 2}))
    rng = sub_rng(seed, "ideal_chain")
    misses, resampled, dims = [], 0, {}
    done = 0
    while done < 100:
        r = random_canonical_form(rng, inst)
        if not realize(r, inst).any():
            resampled += 1
            continue
        rep = ideals.two_sided_closure(inst, r, verify_closed=done < 10)
        dims[str(rep.ideal.dim)] = dims.get(str(rep.ideal.dim), 0) + 1
        if not (rep.contains_generator and rep.ideal.closed):
            misses.append(str(r))
        done += 1
    ok = chain["decreasing"] and chain["strict_on_valid_range"] and not misses
    return _status(ok), {
        "chain": {"instance": "n=6,s={0,2,4},p=5", **chain},
        "two_sided": {"instance": inst.label(), "samples": 100, "zero_realizations_resampled": resampled,
                      "dim_histogram": dims, "without_generator": misses[:5]},
    }


def check_ideal_noncomplement(seed: int):
    inst = Instance(6, frozenset({0, 2, 4}))
    rng = sub_rng(seed, "ideal_noncomplement")
    cases, failures, skipped = [], [], 0
    for _ in range(25):
        r = random_canonical_form(rng, inst, min_level=1)
        rep = ideals.ideal_noncomplement_step(inst, 1, 2, r)
        if rep["status"] == "exhausted":
            skipped += 1
        elif not rep["ok"]:
            failures.append(rep)
        cases.append({k: rep.get(k) for k in ("r", "status", "gamma", "s", "ok")})
    return _status(not failures), {
        "instance": inst.label(),
        "alpha": 1,
        "beta": 2,
        "samples": 25,
        "exhausted": skipped,
        "failures": failures,
        "cases": cases,
    }


# standing findings

def finding_algebra_independence(seed: int):
    rows = [algebra_report(Instance(n, frozenset(s))) | {"instance": Instance(n, frozenset(s)).label()}
            for n, s in ((4, {0, 2}), (5, {0, 2}), (6, {0, 2, 4}))]
    defect = any(r["independence_defect"] for r in rows)
    return ("finding" if defect else "pass"), {
        "instances": rows,
        "product_closed": all(lattice.product_closed(lattice.algebra_basis(Instance(n, frozenset(s))))
                              for n, s in ((4, {0, 2}), (5, {0, 2}))),
    }


def finding_canonical_collision(seed: int):
    inst = Instance(5, frozenset({0, 2}))
    t = normalize("T[0,1->1,2]*T[1,2;2,3->3,4]", inst)
    T = normalize("T[0,1;2,3->3,4]", inst)
    diff = normalize("T[0,1->1,2]*T[1,2;2,3->3,4] + 4*T[0,1;2,3->3,4]", inst)
    equal = bool(np.array_equal(realize(t, inst), realize(T, inst)))
    model = get_model(inst)
    level = ideal_level(diff, inst)
    # the zero matrix lies in every I_alpha, the form only up to its level
    breaks = [a for a in range(inst.n) if a > level]
    return ("finding" if equal and t != T else "pass"), {
        "instance": inst.label(),
        "product": str(t),
        "generator": str(T),
        "canonical_forms_differ": t != T,
        "realizations_equal": equal,
        "difference": str(diff),
        "difference_realizes_to_zero": not realize(diff, inst).any(),
        "difference_ideal_level": level,
        "ideal_criterion_fails_at_alpha": breaks,
        "dim_L": model.dim,
    }


def finding_rule_boundary(seed: int):
    inst = Instance(7, frozenset({0, 2, 4}))
    t1 = Generator.parse("T[0,1->2,3]")
    t2 = Generator.parse("T[2,3;4,5->5,6]")
    try:
        compose_pair(t1, t2, inst)
        raised = None
    except RuleError as e:
        raised = str(e)
    M = get_model(inst).field.matmul(generator_matrix(t1, inst), generator_matrix(t2, inst))
    return ("finding" if raised else "pass"), {
        "instance": inst.label(),
        "pair": f"{t1}*{t2}",
        "rule": rewrite.relation(t1, t2)[0],
        "rule_error": raised,
        "matrix_product_nonzero_rows": int((M != 0).any(axis=1).sum()),
    }


ACCEPTANCE: dict[str, Callable] = {
    "gamma_profile": check_gamma_profile,
    "oracle_agreement": check_oracle_agreement,
    "rewrite_soundness": check_rewrite_soundness,
    "ideal_criterion": check_ideal_criterion,
    "submodule_closure": check_submodule_closure,
    "cyclic_generation": check_cyclic_generation,
    "cofinality": check_cofinality,
    "rigidity": check_rigidity,
    "non_regularity": check_non_regularity,
    "non_distributivity": check_non_distributivity,
    "ideal_chain": check_ideal_chain,
    "ideal_noncomplement": check_ideal_noncomplement,
}

FINDINGS: dict[str, Callable] = {
    "finding_algebra_independence": finding_algebra_independence,
    "finding_canonical_collision": finding_canonical_collision,
    "finding_rule_boundary": finding_rule_boundary,
}


def run_check(name: str, fn: Callable, seed: int) -> Record:
    t0 = time.perf_counter()
    try:
        status, payload = fn(seed)
    except GammaLabError as e:
        status, payload = "fail", {"error": type(e).__name__, "message": str(e)}
    return Record(name, ANCHORS.get(name, name), status, payload, time.perf_counter() - t0)


# per-instance sweep

def sweep_records(inst: Instance, seed: int) -> list[Record]:
    tag = f"sweep[{inst.label()}]"
    out = []

    def add(name: str, anchor: str, fn: Callable[[], tuple]):
        t0 = time.perf_counter()
        try:
            status, payload = fn()
        except CapExceeded as e:
            status, payload = "skipped", {"reason": str(e)}
        except GammaLabError as e:
            status, payload = "fail", {"error": type(e).__name__, "message": str(e)}
        out.append(Record(f"{tag}:{name}", anchor, status, payload, time.perf_counter() - t0))

    def enum():
        ys = enumerate_y(inst)
        layers = {a: len(y_slice(inst, a, a)) for a in range(inst.n)}
        off = {a: layers[a] == inst.n - a - 1 for a in range(inst.n) if a not in inst.s}
        return _status(all(off.values())), {"size": len(ys), "layers": layers, "layer_count_outside_s": off}

    def closed():
        f = closure_facts(inst)
        return _status(f["L_closed"] and f["Lab_closed"] and f["nested"] and f["top_zero"]), f

    def cyclic():
        rows = cyclic_facts(inst)
        return _status(all(r["equal"] for r in rows)), {"cases": rows}

    def profile():
        rows = []
        for g in range(inst.n):
            if subspace_L(inst, g).dim == 0:
                continue
            p = gamma_profile(inst, g)
            want = [a for a in p.valid_range if a not in inst.s]
            rows.append({"gamma": g, "e_set": p.e_set, "valid_range": p.valid_range, "matches": p.e_set == want})
        return _status(all(r["matches"] for r in rows)), {"profiles": rows}

    def oracle():
        from .oracle import enumerate_lattice

        if inst.prime != 2:
            return "skipped", {"reason": "oracle runs over GF(2) only"}
        lat = enumerate_lattice(inst)
        rows = oracle_triples(inst, lat)
        return _status(all(r["agree"] for r in rows)), {"lattice_size": len(lat), "triples": rows}

    def algebra():
        rep = algebra_report(inst)
        return ("finding" if rep["independence_defect"] else "pass"), rep

    def endo():
        d = get_model(inst).dim
        if d > 30:
            return "skipped", {"reason": f"dim L = {d}; the stacked system would have {d ** 4} entries"}
        v = centralizer_dim(inst, 0)
        return ("pass" if v == 1 else "finding"), {"alpha": 0, "dim": v, "expected": 1}

    add("enum", "index set and its layers", enum)
    add("submodule_closure", ANCHORS["submodule_closure"], closed)
    add("cyclic_generation", ANCHORS["cyclic_generation"], cyclic)
    add("gamma_profile", ANCHORS["gamma_profile"], profile)
    add("oracle_agreement", ANCHORS["oracle_agreement"], oracle)
    add("algebra", ANCHORS["finding_algebra_independence"], algebra)
    add("rigidity", ANCHORS["rigidity"], endo)
    return out


def _fingerprint(records: Iterable[Record]) -> str:
    return json.dumps([r.to_dict(timing=False) for r in sorted(records, key=lambda r: r.name)], sort_keys=True)


def run_suite(seed: int = 1, sweep: Optional[Iterable[Instance]] = None,
              determinism: bool = True, only: Optional[Iterable[str]] = None) -> list[Record]:
    chosen = set(only) if only is not None else None
    table = {**ACCEPTANCE, **FINDINGS}
    names = [n for n in table if chosen is None or n in chosen]
    records = [run_check(n, table[n], seed) for n in names]
    for inst in sweep or ():
        records.extend(sweep_records(inst, seed))
    if determinism and (chosen is None or "determinism" in chosen):
        t0 = time.perf_counter()
        clear_caches()
        again = [run_check(n, table[n], seed) for n in names]
        for inst in sweep or ():
            again.extend(sweep_records(inst, seed))
        first, second = _fingerprint(records), _fingerprint(again)
        records.append(Record(
            "determinism", ANCHORS["determinism"], _status(first == second),
            {"records_compared": len(again), "identical": first == second},
            time.perf_counter() - t0,
        ))
    return records


def verify(seed: int = 1, sweep: Optional[Iterable[Instance]] = None, determinism: bool = True,
           only: Optional[Iterable[str]] = None) -> Report:
    sweep = list(sweep or ())
    recs = run_suite(seed, sweep, determinism, only)
    return Report("verify", {"seed": seed, "sweep": [i.to_dict() for i in sweep]}, recs)
