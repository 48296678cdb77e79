"""Command line entry point: run verification suites and emit a deterministic report."""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import liealg, pbw, qdouble, starprod
from .presentation import SHIPPED, PresentationError
from .qdouble import ConventionConfig, DoublePresentation, VerificationReport

CHECKS = (
    "classical",
    "pbw",
    "bialgebra",
    "quasitriangular",
    "twist",
    "manin_pair",
    "quadruple",
    "sweep",
    "star",
    "ideal",
    "remarks",
)


@dataclass
class RunConfig:
    presentation: str = str(SHIPPED)
    order: int = 3
    degree: int = 2
    t: str = "2"
    convention: ConventionConfig = field(default_factory=ConventionConfig)
    checks: tuple = CHECKS
    format: str = "json"
    out: str = None


def parse_presentation(path, t=None):
    return DoublePresentation.from_file(path, t)


# ---------------------------------------------------------------- suites


def check_classical(dp, cfg):
    g = dp.lie
    beta = dp.beta(cfg.convention)
    gp, gm, H = liealg.standard_subspaces(g, beta)
    rep = VerificationReport({})
    axioms = g.check_axioms()
    rep.record("lie_axioms", all(axioms.values()), residual=[k for k, v in axioms.items() if not v] or None)
    quad = liealg.check_manin_quadruple(g, gp, gm, H)
    rep.record("manin_quadruple", quad.valid, info={"graded": quad.graded})
    r = liealg.r_matrix(g, gp, gm)
    rep.record("cybe", liealg.cybe_residual(g, r).is_zero())
    rep.record("r_symmetric_part", r + r.transpose() == g.canonical_element())
    data = liealg.classical_twist_data(g, H, gm, r)
    split = liealg.extract_lagrangian_splitting(g, data.r_HL, H)
    rep.record("splitting_round_trip", split["ok"] and split["L"] == gm, residual=split["failed"] or None)
    return rep


def confluence(alg):
    """Associativity of all generator triples; returns the failing triples."""
    gens = [alg.gen(i) for i in range(alg.n)]
    bad = []
    for i, x in enumerate(gens):
        for j, y in enumerate(gens):
            xy = x * y
            for k, z in enumerate(gens):
                if xy * z != x * (y * z):
                    bad.append((alg.generators[i], alg.generators[j], alg.generators[k]))
    return bad


def oracle_mismatches(alg, degree):
    """Monomial pairs of total degree <= degree where multiply and the dense oracle differ."""
    oracle = pbw.DenseOracle(alg, degree + 2 * alg.order)
    monos = alg.monomials_upto(degree)
    bad = []
    for u in monos:
        for m in monos:
            if sum(u) + sum(m) > degree:
                continue
            fast = (alg.monomial(u) * alg.monomial(m)).terms
            slow = {(w,): c for w, c in oracle.product(u, m).items()}
            if fast != slow:
                bad.append((u, m))
    return bad


def check_pbw(dp, cfg):
    rep = VerificationReport({})
    alg = dp.algebra(cfg.order)
    rep.record("table_shape", not alg.check_table(), residual=alg.check_table() or None)
    bad = confluence(alg)
    rep.record("confluence", not bad, residual=[list(b) for b in bad[:1]] or None)
    bad = oracle_mismatches(alg, 2 * cfg.degree)
    rep.record("dense_oracle", not bad, residual=[str(b) for b in bad[:1]] or None)
    return rep


def check_twist(dp, cfg):
    rep = VerificationReport({})
    for psi in ConventionConfig.CHOICES["psi_exponent"]:
        conv = ConventionConfig(psi_exponent=psi)
        F = dp.twist(conv, cfg.order)
        _, phi = qdouble.twist_coproduct_and_associator(dp, F, gens=())
        one = dp.algebra(cfg.order).one(3)
        rep.record(f"cocycle:{psi}", phi == one, residual=qdouble.residual_summary(phi - one))
        rep.record(f"in_1_plus_hbar_A0A0:{psi}", qdouble.in_A0_tensor(F))
    return rep


def check_sweep(dp, cfg):
    rep = VerificationReport({})
    rows = qdouble.convention_sweep(dp, cfg.order, cfg.degree)
    for label, row in rows.items():
        rep.record(f"row:{label}", all(row.values()), info=row, informational=True)
    pair_ok = any(row["cocycle"] and row["closure"] for row in rows.values())
    rep.record("cocycle_and_closure_somewhere", pair_ok)
    return rep


def run_suite(name, dp, cfg):
    conv = cfg.convention
    n, d = cfg.order, cfg.degree
    if name == "classical":
        return check_classical(dp, cfg)
    if name == "pbw":
        return check_pbw(dp, cfg)
    if name == "bialgebra":
        rep = qdouble.verify_bialgebra(dp, n, d)
        sub = qdouble.verify_bialgebra(dp, n, d, only=qdouble.A_PLUS)
        return rep.merge(sub, prefix="A_plus/")
    if name == "quasitriangular":
        return qdouble.verify_quasitriangular(dp, n)
    if name == "twist":
        return check_twist(dp, cfg)
    if name == "manin_pair":
        return qdouble.verify_manin_pair_quantization(dp, conv, n, d)
    if name == "quadruple":
        return qdouble.verify_quadruple_quantization(dp, conv, n, d)
    if name == "sweep":
        return check_sweep(dp, cfg)
    if name == "star":
        return starprod.verify_star_product(dp, conv, n, d)
    if name == "ideal":
        return starprod.ideal_and_quotient(dp, conv, n, d)
    if name == "remarks":
        return starprod.verify_remarks(dp, conv, n, d)
    raise ValueError(f"unknown check {name!r}")


def run_checks(cfg, dp=None):
    """Run the selected suites; returns (exit status, report dict)."""
    dp = dp or parse_presentation(cfg.presentation, cfg.t)
    entries = []
    for name in sorted(cfg.checks):
        try:
            rep = run_suite(name, dp, cfg)
        except (pbw.RewriteError, pbw.GrowthBoundViolation, starprod.DegreeOverflow, ArithmeticError) as exc:
            entries.append({"name": name, "status": "fail", "residual": f"{type(exc).__name__}: {exc}"})
            continue
        for key in sorted(rep.checks):
            c = rep.checks[key]
            entry = {"name": f"{name}/{key}", "status": c["status"]}
            for k in ("residual", "info", "informational", "reason"):
                if k in c:
                    entry[{"info": "detail"}.get(k, k)] = c[k]
            entries.append(entry)
    report = {
        "meta": {
            "order": cfg.order,
            "degree": cfg.degree,
            "t": cfg.t,
            "convention": cfg.convention.as_dict(),
            "presentation": Path(cfg.presentation).name,
        },
        "checks": entries,
    }
    failed = any(e["status"] == "fail" and not e.get("informational") for e in entries)
    return (1 if failed else 0), report


def render(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    meta = report["meta"]
    lines = [
        f"order={meta['order']} degree={meta['degree']} t={meta['t']} "
        + " ".join(f"{k}={v}" for k, v in meta["convention"].items())
    ]
    for e in report["checks"]:
        tag = e["status"].upper() + (" (info)" if e.get("informational") else "")
        extra = f"  {e['residual']}" if "residual" in e else ""
        lines.append(f"{tag:12} {e['name']}{extra}")
    return "\n".join(lines) + "\n"


def build_parser():
    p = argparse.ArgumentParser(prog="qhverify", description=__doc__)
    p.add_argument("--presentation", default=str(SHIPPED))
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--t", default="2", help="p/q, or 'symbolic' for rational functions in t")
    for name, choices in ConventionConfig.CHOICES.items():
        p.add_argument("--" + name.replace("_", "-"), choices=choices, default=choices[0])
    p.add_argument("--check", action="append", choices=CHECKS + ("all",), help="repeatable; default all")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    checks = CHECKS if not args.check or "all" in args.check else tuple(args.check)
    conv = ConventionConfig(**{k: getattr(args, k) for k in ConventionConfig.CHOICES})
    cfg = RunConfig(args.presentation, args.order, args.degree, args.t, conv, checks, args.format, args.out)
    try:
        dp = parse_presentation(cfg.presentation, cfg.t)
    except (PresentationError, OSError, ValueError) as exc:
        print(f"qhverify: {exc}", file=sys.stderr)
        return 2
    status, report = run_checks(cfg, dp)
    text = render(report, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
