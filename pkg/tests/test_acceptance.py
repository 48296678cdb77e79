"""The nine acceptance criteria, each at its stated order and exact tolerance.

Every test prints one ``PASS``/``FAIL`` line before asserting.
"""

import json
from pathlib import Path

import pytest

from qhverify import cli, liealg, qdouble, starprod
from qhverify.qdouble import CONSISTENT, PRINTED, ConventionConfig, DoublePresentation

SNAPSHOTS = Path(__file__).with_name("snapshots")


@pytest.fixture
def verdict(capsys):
    def emit(number, title, checks):
        failed = [name for name, ok in checks.items() if not ok]
        line = f"criterion {number} {title}: {'PASS' if not failed else 'FAIL ' + ', '.join(failed)}"
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line

    return emit


def test_1_classical(verdict):
    g = liealg.build_double_sl2()
    gp, gm, H = liealg.standard_subspaces(g, 1)
    quad = liealg.check_manin_quadruple(g, gp, gm, H)
    r = liealg.r_matrix(g, gp, gm)
    data = liealg.classical_twist_data(g, H, gm, r)
    split = liealg.extract_lagrangian_splitting(g, data.r_HL, H)
    verdict(
        1,
        "classical suite",
        {
            "quadruple valid": quad.valid,
            "quadruple nongraded": not quad.graded,
            "cybe residual zero": liealg.cybe_residual(g, r).is_zero(),
            "r + r21 = t": r + r.transpose() == g.canonical_element(),
            "splitting round trip": split["ok"] and split["L"] == gm,
        },
    )


def test_2_pbw(verdict, dp):
    verdict(
        2,
        "PBW engine",
        {
            "216-triple associativity at N=4": cli.confluence(dp.algebra(4)) == [],
            "dense oracle agreement, degree <= 4 at N=3": cli.oracle_mismatches(dp.algebra(3), 4) == [],
        },
    )


def test_3_bialgebra(verdict, dp):
    plus = qdouble.verify_bialgebra(dp, 4, only=qdouble.A_PLUS)
    full = qdouble.verify_bialgebra(dp, 4)
    text = json.dumps(full.to_json(), indent=2, sort_keys=True) + "\n"
    again = json.dumps(qdouble.verify_bialgebra(DoublePresentation.shipped("2"), 4).to_json(), indent=2, sort_keys=True) + "\n"
    verdict(
        3,
        "bialgebra",
        {
            "A+ sub-suite at N=4": plus.passed() and len(plus.checks) > 0,
            "full-A table deterministic": text == again,
            "full-A table matches snapshot": text == (SNAPSHOTS / "bialgebra_N4.json").read_text(),
        },
    )


def test_4_quasitriangular(verdict, dp):
    rep = qdouble.verify_quasitriangular(dp, 4, qybe_order=3, hexagon_order=3)
    checks = {f"intertwining {x} at N=4": rep.passed(f"intertwining:{x}") for x in dp.generators}
    checks["QYBE at N=3"] = rep.passed("qybe")
    checks["symmetric part = t_g"] = rep.passed("classical_limit_symmetric_part")
    checks["orientation recorded"] = rep.checks["classical_limit_orientation"]["info"] in ("g_plus_first", "g_minus_first")
    verdict(4, "quasitriangularity", checks)


def test_5_twist(verdict, dp):
    checks = {}
    for conv in (PRINTED, CONSISTENT):
        F = dp.twist(conv, 3)
        _, phi = qdouble.twist_coproduct_and_associator(dp, F, gens=())
        checks[f"Phi_B = 1 ({conv.psi_exponent})"] = phi == dp.algebra(3).one(3)
        checks[f"F in 1 + hbar(A0 (x) A0) ({conv.psi_exponent})"] = qdouble.in_A0_tensor(F)
    verdict(5, "twist", checks)


def test_6_sweep(verdict, dp):
    rows = qdouble.convention_sweep(dp, 3, 2)
    text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    again = json.dumps(qdouble.convention_sweep(DoublePresentation.shipped("2"), 3, 2), indent=2, sort_keys=True) + "\n"
    verdict(
        6,
        "convention sweep",
        {
            "16 configurations": len(rows) == 16,
            "byte-identical across runs": text == again,
            "cocycle and closure pass somewhere": any(r["cocycle"] and r["closure"] for r in rows.values()),
            "matrix matches snapshot": text == (SNAPSHOTS / "sweep_N3_D2_t2.json").read_text(),
        },
    )


def test_7_star_product(verdict, dp):
    rep = starprod.verify_star_product(dp, CONSISTENT, order=2, degree=2)
    checks = {name: rep.passed(name) for name in ("unit", "b_invariance", "associativity", "poisson_limit", "poisson_antisymmetry")}
    checks["flatness: 10 invariant dimensions per order"] = rep.passed("flatness") and rep.checks["flatness"]["info"]["invariant"] == [10, 10, 10]
    verdict(7, "star product", checks)


def test_8_quotient(verdict, dp):
    rep = starprod.ideal_and_quotient(dp, CONSISTENT, order=2, degree=2)
    verdict(
        8,
        "quotient",
        {
            "Ker rho = I": rep.passed("kernel_equals_ideal"),
            "rho surjective": rep.passed("rho_surjective"),
            "quotient dimension 6 at D=2": rep.passed("quotient_dimensions")
            and rep.checks["quotient_dimensions"]["info"]["2"] == 6,
            "two-sided ideal": rep.passed("two_sided_ideal"),
        },
    )


def test_9_remarks(verdict, dp):
    rep = starprod.verify_remarks(dp, CONSISTENT, order=2, degree=2)
    verdict(
        9,
        "remarks",
        {
            "twist modification by 1 + hbar E+ (x) E-": rep.passed("twist_modification_invariance"),
            "conjugation by 1 + hbar e+": rep.passed("conjugated_setup"),
        },
    )


def test_sweep_convention_used_above_is_a_passing_row(dp):
    row = qdouble.convention_sweep(dp, 3, 2)[CONSISTENT.label()]
    assert all(row.values())
    assert ConventionConfig(**CONSISTENT.as_dict()) == CONSISTENT
