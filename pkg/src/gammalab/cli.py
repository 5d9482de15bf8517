"""Batch command-line front end.  Every command emits a report; exit status is
0 when no record failed, 1 otherwise, and 2 for configuration errors."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Callable, Optional

from .errors import CertificateFailure, GammaLabError, InternalError, RuleError
from .index import Instance, enumerate_y, y_slice
from .report import Record, Report

FORMATS = ("json", "csv", "text")

# option name -> (parser for config-file values, default)
OPTIONS: dict[str, tuple[Callable, object]] = {
    "n": (int, None),
    "s": (str, "0"),
    "prime": (int, 5),
    "seed": (int, 1),
    "max_oracle_dim": (int, 12),
    "format": (str, "json"),
    "out": (str, None),
    "expr": (str, None),
    "left": (str, None),
    "right": (str, None),
    "gamma": (int, None),
    "alpha": (int, None),
    "beta": (int, None),
    "beta1": (int, None),
    "beta2": (int, None),
    "action": (str, "chain"),
    "sweep": (lambda v: v.lower() in ("1", "true", "yes"), False),
    "determinism": (lambda v: v.lower() in ("1", "true", "yes"), True),
    "only": (str, None),
}


class ConfigError(Exception):
    pass


def parse_s(text: str) -> frozenset:
    try:
        return frozenset(int(x) for x in text.replace(" ", "").split(",") if x != "")
    except ValueError:
        raise ConfigError(f"--s expects a comma-separated list of integers, got {text!r}") from None


def read_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path!r} not found")
    out = {}
    for lineno, raw in enumerate(p.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "command":
            out["command"] = value
            continue
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}; allowed: command, {', '.join(sorted(OPTIONS))}")
        try:
            out[key] = OPTIONS[key][0](value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain key=value file; flags override it")
    common.add_argument("--n", type=int, help="truncation bound (n >= 2)")
    common.add_argument("--s", help="comma-separated parameter set containing 0, e.g. 0,2,4")
    common.add_argument("--prime", type=int, help="field characteristic: a prime below 2**16, or 0 for Q")
    common.add_argument("--seed", type=int, help="seed for randomized checks (default 1)")
    common.add_argument("--max-oracle-dim", dest="max_oracle_dim", type=int, help="oracle size cap (default 12)")
    common.add_argument("--format", choices=FORMATS, help="report format (default json)")
    common.add_argument("--out", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="gammalab", description=__doc__)
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def cmd(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, description=help_)

    cmd("enum", "list the index set, its layers and the chain dimensions")
    cmd("normalize", "canonical form of an expression").add_argument("--expr")
    c = cmd("compose", "apply the product rules to one pair of generators")
    c.add_argument("--left")
    c.add_argument("--right")
    cmd("gamma", "finite E-set of the chain above gamma").add_argument("--gamma", type=int)
    c = cmd("complement", "certificate for L_alpha over L_beta inside L_gamma")
    for k in ("gamma", "alpha", "beta"):
        c.add_argument(f"--{k}", type=int)
    cmd("lattice", "GF(2) brute-force submodule lattice and chain-triple verdicts")
    cmd("endo", "dimension of the centralizer on L_alpha").add_argument("--alpha", type=int)
    cmd("regular", "does an element have a pseudo-inverse in the algebra").add_argument("--expr")
    c = cmd("distrib", "distributivity failure built on top of L_(alpha+2)")
    for k in ("alpha", "beta1", "beta2"):
        c.add_argument(f"--{k}", type=int)
    c = cmd("ideal", "ideal chain, membership, two-sided closure or the refutation step")
    c.add_argument("--action", choices=("chain", "member", "closure", "step"))
    c.add_argument("--alpha", type=int)
    c.add_argument("--beta", type=int)
    c.add_argument("--expr")
    c = cmd("verify", "run the full acceptance suite")
    c.add_argument("--sweep", action="store_const", const=True, help="also sweep per-instance checks")
    c.add_argument("--no-determinism", dest="determinism", action="store_const", const=False,
                   help="skip the second run that checks reproducibility")
    c.add_argument("--only", help="comma-separated record names to run")
    return p


def resolve(args: argparse.Namespace) -> dict:
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    if conf.get("command") not in (None, args.command):
        raise ConfigError(f"config names command {conf['command']!r} but {args.command!r} was requested")
    merged = {k: d for k, (_, d) in OPTIONS.items()}
    merged.update({k: v for k, v in conf.items() if k != "command"})
    merged.update({k: v for k, v in vars(args).items() if k in OPTIONS and v is not None})
    if merged["format"] not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {merged['format']!r}")
    return merged


def make_instance(o: dict) -> Instance:
    n = o["n"]
    if n is None:
        raise ConfigError("--n is required for this command")
    s = parse_s(o["s"]) if isinstance(o["s"], str) else frozenset(o["s"])
    try:
        return Instance(n, s, o["prime"], o["max_oracle_dim"], o["seed"])
    except GammaLabError as e:
        raise ConfigError(str(e)) from None


def need(o: dict, *keys):
    missing = [k for k in keys if o.get(k) is None]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join('--' + k for k in missing)}")


# command bodies return (record name, anchor, status, payload)

def _enum(o, inst):
    from .operators import enumerate_generators, subspace_L

    ys = enumerate_y(inst)
    return "enum", "index set and its layers", "pass", {
        "size": len(ys),
        "indices": [str(y) for y in ys],
        "layers": {str(a): len(y_slice(inst, a, a)) for a in range(inst.n)},
        "L_dims": {str(a): subspace_L(inst, a).dim for a in range(inst.n)},
        "generators": len(enumerate_generators(inst)),
    }


def _normalize(o, inst):
    import numpy as np

    from .rewrite import ideal_level, normalize, realize

    need(o, "expr")
    c = normalize(o["expr"], inst)
    sound = bool(np.array_equal(realize(c, inst), realize(o["expr"], inst)))
    return "normalize", "canonical form of an operator expression", "pass" if sound else "fail", {
        "input": o["expr"],
        "canonical_form": c.to_dict(),
        "ideal_level": ideal_level(c, inst),
        "matrix_agrees": sound,
    }


def _compose(o, inst):
    import numpy as np

    from .operators import Generator, check_generator, generator_matrix, get_model
    from .rewrite import compose_pair, realize, relation

    need(o, "left", "right")
    t1, t2 = (check_generator(Generator.parse(o[k]), inst) for k in ("left", "right"))
    rule, tau = relation(t1, t2)
    prod = get_model(inst).field.matmul(generator_matrix(t1, inst), generator_matrix(t2, inst))
    try:
        c = compose_pair(t1, t2, inst)
    except RuleError as e:
        return "compose", "product rules for a pair of generators", "finding", {
            "left": str(t1), "right": str(t2), "rule": rule, "rule_error": str(e),
        }
    sound = bool(np.array_equal(realize(c, inst), prod))
    return "compose", "product rules for a pair of generators", "pass" if sound else "fail", {
        "left": str(t1),
        "right": str(t2),
        "rule": rule,
        "tau": ";".join(f"{a},{b}" for a, b in tau),
        "result": c.to_dict(),
        "matrix_agrees": sound,
    }


def _gamma(o, inst):
    from .lattice import gamma_profile, verify_report

    g = o["gamma"] if o["gamma"] is not None else 0
    prof = gamma_profile(inst, g)
    ok = all(verify_report(r, inst) for r in prof.reports)
    return "gamma", "E-set of the chain L_gamma", "pass" if ok else "fail", {**prof.to_dict(), "certificates_rechecked": ok}


def _complement(o, inst):
    from .lattice import certify, verify_report

    need(o, "gamma", "alpha", "beta")
    rep = certify(inst, o["gamma"], o["alpha"], o["beta"])
    ok = verify_report(rep, inst)
    return "complement", "complemented-over certificate", "pass" if ok else "fail", {**rep.to_dict(), "rechecked": ok}


def _lattice(o, inst):
    from .checks import oracle_triples
    from .oracle import enumerate_lattice, lattice_summary

    lat = enumerate_lattice(inst)
    rows = oracle_triples(inst, lat)
    ok = all(r["agree"] for r in rows)
    return "lattice", "brute-force submodule lattice", "pass" if ok else "fail", {
        **lattice_summary(lat, inst.seed), "triples": rows,
    }


def _endo(o, inst):
    from .lattice import centralizer_dim

    a = o["alpha"] if o["alpha"] is not None else 0
    v = centralizer_dim(inst, a)
    return "endo", "centralizer of the generators on L_alpha", "pass" if v == 1 else "finding", {
        "alpha": a, "dim": v, "expected": 1, "methods_agree": True,
    }


def _regular(o, inst):
    from .lattice import pseudo_inverse_exists
    from .rewrite import normalize

    need(o, "expr")
    c = normalize(o["expr"], inst)
    return "regular", "pseudo-inverse inside the algebra", "pass", {
        "element": str(c), "pseudo_inverse_exists": pseudo_inverse_exists(inst, c),
    }


def _distrib(o, inst):
    from .lattice import distributivity_refutation

    a = o["alpha"] if o["alpha"] is not None else 0
    rep = distributivity_refutation(inst, a, o["beta1"], o["beta2"])
    return "distrib", "non-distributivity witness", "pass" if rep["refuted"] else "fail", rep


def _ideal(o, inst):
    from . import ideals
    from .rewrite import ideal_level, normalize, realize

    action = o["action"]
    if action == "chain":
        rep = ideals.ideal_chain(inst)
        ok = rep["decreasing"] and rep["strict_on_valid_range"]
        return "ideal", "chain of ideals I_alpha", "pass" if ok else "fail", rep
    need(o, "expr")
    c = normalize(o["expr"], inst)
    if action == "member":
        need(o, "alpha")
        I = ideals.ideal_I(inst, o["alpha"])
        by_matrix = I.contains(realize(c, inst))
        by_form = ideal_level(c, inst) >= o["alpha"]
        return "ideal", "membership in I_alpha", "pass" if by_matrix == by_form else "finding", {
            "element": str(c), "alpha": o["alpha"], "I_alpha_dim": I.dim,
            "member_by_matrix": by_matrix, "member_by_canonical_form": by_form,
        }
    if action == "closure":
        rep = ideals.two_sided_closure(inst, c, verify_closed=True)
        ok = rep.contains_generator and rep.ideal.closed
        return "ideal", "two-sided ideal generated by r", "pass" if ok else "fail", {"element": str(c), **rep.to_dict()}
    need(o, "alpha", "beta")
    rep = ideals.ideal_noncomplement_step(inst, o["alpha"], o["beta"], c)
    status = {None: "skipped", True: "pass", False: "fail"}[rep["ok"]]
    return "ideal", "refutation step for a complement candidate", status, rep


BODIES = {
    "enum": _enum, "normalize": _normalize, "compose": _compose, "gamma": _gamma,
    "complement": _complement, "lattice": _lattice, "endo": _endo, "regular": _regular,
    "distrib": _distrib, "ideal": _ideal,
}


def run(o: dict, command: str) -> Report:
    if command == "verify":
        from .checks import DEFAULT_SWEEP, verify

        sweep = []
        if o["sweep"]:
            sweep = [make_instance(o)] if o["n"] is not None else list(DEFAULT_SWEEP)
        only = [x.strip() for x in o["only"].split(",")] if o["only"] else None
        return verify(o["seed"], sweep, o["determinism"], only)
    inst = make_instance(o)
    t0 = time.perf_counter()
    try:
        name, anchor, status, payload = BODIES[command](o, inst)
    except (CertificateFailure, InternalError) as e:
        name, anchor, status, payload = command, command, "fail", {"error": type(e).__name__, "message": str(e)}
    rec = Record(name, anchor, status, payload, time.perf_counter() - t0)
    return Report(command, inst.to_dict(), [rec])


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        o = resolve(args)
        report = run(o, args.command)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except GammaLabError as e:
        print(f"invalid input ({type(e).__name__}): {e}", file=sys.stderr)
        return 2
    text = report.render(o["format"])
    if o["out"]:
        Path(o["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
