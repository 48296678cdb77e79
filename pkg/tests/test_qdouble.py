import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhverify import liealg, pbw, qdouble
from qhverify.qdouble import CONSISTENT, PRINTED, ConventionConfig
from qhverify.series import TruncSeries

SNAPSHOTS = Path(__file__).with_name("snapshots")
N = 3


def sc(alg, coeffs, arity=2):
    return alg.scalar(TruncSeries(coeffs, alg.field), arity)


def test_coproduct_of_h(dp):
    alg = dp.algebra(N)
    h = alg.gen("h")
    assert dp.coproduct("h", N) == h @ alg.one() + alg.one() @ h


def test_coproduct_of_e_minus(dp):
    alg = dp.algebra(N)
    qmh = pbw.exp(alg.gen("h") * alg.scalar(TruncSeries.hbar(N, alg.field) * alg.series(-1)))
    assert dp.coproduct("e_minus", N) == alg.gen("e_minus") @ alg.one() + qmh @ alg.gen("e_minus")


def test_coproduct_of_h_star_leading_term(dp):
    alg = dp.algebra(N)
    hs = alg.gen("h_star")
    d = dp.coproduct("h_star", N)
    assert d.truncate(dp.algebra(0)) == (hs @ alg.one() + alg.one() @ hs).truncate(dp.algebra(0))
    # the first correction couples e+* and e-*
    es, ems = alg.gen("e_plus_star"), alg.gen("e_minus_star")
    assert d.coefficient(alg.mono("e_plus_star"), alg.mono("e_minus_star"))[1] == 8
    assert (es @ ems).coefficient(alg.mono("e_plus_star"), alg.mono("e_minus_star"))[0] == 1


def test_extend_coproduct_basics(dp):
    alg = dp.algebra(N)
    ep = alg.gen("e_plus")
    assert dp.extend_coproduct(alg.one()) == alg.one(2)
    assert dp.extend_coproduct(ep * ep) == dp.coproduct("e_plus", N) * dp.coproduct("e_plus", N)
    assert dp.coproduct("e_plus", N).apply_counit(0) == ep


@pytest.mark.parametrize("a, b", [(0, 3), (3, 0), (4, 5), (1, 2)])
def test_extend_coproduct_is_multiplicative(dp, a, b):
    alg = dp.algebra(2)
    x = alg.gen(a) * alg.gen(b) + alg.gen(a)
    y = alg.gen(b) * alg.gen(b)
    assert dp.extend_coproduct(x * y) == dp.extend_coproduct(x) * dp.extend_coproduct(y)


def test_A_plus_bialgebra_order_4(dp):
    assert qdouble.verify_bialgebra(dp, 4, only=qdouble.A_PLUS).passed()


def test_h_h_star_relation_under_coproduct(dp):
    assert qdouble.relation_residual(dp, "h", "h_star", N).is_zero()


def test_full_bialgebra_snapshot(dp):
    rep = qdouble.verify_bialgebra(dp, 4)
    got = json.dumps(rep.to_json(), indent=2, sort_keys=True) + "\n"
    assert got == (SNAPSHOTS / "bialgebra_N4.json").read_text()


def test_counit_is_multiplicative(dp):
    ok, where = qdouble.counit_is_multiplicative(dp, N, 4)
    assert ok, where


def test_r_matrix_expansion(dp):
    alg = dp.algebra(N)
    R = dp.r_matrix(N)
    assert R.truncate(dp.algebra(0)) == dp.algebra(0).one(2)
    assert R.apply_counit(0) == alg.one()
    g = dp.lie
    rho = qdouble.classical_limit(dp)
    e = {k: g.vec(**{k: 1}) for k in g.labels}
    expected = (
        liealg.Tensor.from_vectors(e["e_minus_star"], e["e_plus"]) * -2
        + liealg.Tensor.from_vectors(e["h_star"], e["h"]) * g.field.convert("1/2")
        + liealg.Tensor.from_vectors(e["e_plus_star"], e["e_minus"]) * 2
    )
    assert rho == expected
    assert qdouble.limit_orientation(dp, rho) == "g_minus_first"


def test_quasitriangular(dp):
    rep = qdouble.verify_quasitriangular(dp, 4, qybe_order=N, hexagon_order=N)
    assert rep.passed()
    assert rep.checks["classical_limit_orientation"]["info"] == "g_minus_first"


def test_qybe_at_order_2(dp):
    assert qdouble.verify_quasitriangular(dp, 2).passed("qybe")


def test_twist_expansion(dp):
    alg = dp.algebra(N)
    for conv, coeff in ((PRINTED, 1), (CONSISTENT, -2)):
        F = dp.twist(conv, N)
        assert F.truncate(dp.algebra(0)) == dp.algebra(0).one(2)
        assert F.apply_counit(0) == alg.one()
        assert F.apply_counit(1) == alg.one()
        # 2 (1 - psi) at t = 2
        assert F.coefficient(alg.mono("e_plus_star"), alg.mono("e_minus_star"))[1] == coeff
        assert qdouble.in_A0_tensor(F)


def test_trivial_twist(dp):
    one = dp.algebra(N).one(2)
    delta_B, phi = qdouble.twist_coproduct_and_associator(dp, one)
    assert phi == dp.algebra(N).one(3)
    assert all(delta_B[x] == dp.coproduct(x, N) for x in dp.generators)


@pytest.mark.parametrize("conv", [PRINTED, CONSISTENT], ids=["inv_t", "t"])
def test_cocycle(dp, conv):
    delta_B, phi = qdouble.twist_coproduct_and_associator(dp, dp.twist(conv, N), gens=("h",))
    assert phi == dp.algebra(N).one(3)
    assert delta_B["h"] == dp.coproduct("h", N)


def test_manin_pair_consistent(dp):
    rep = qdouble.verify_manin_pair_quantization(dp, CONSISTENT, N, 2)
    assert rep.passed()
    assert rep.checks["splitting"]["info"] == {"L_is_G_minus": True}


def test_manin_pair_flatness_degree_3(dp):
    ranks = qdouble.flatness_ranks(dp.algebra(2), dp.B_generators(2, CONSISTENT), 3)
    assert ranks == [20, 20, 20]


def test_manin_pair_printed_is_recorded(dp):
    rep = qdouble.verify_manin_pair_quantization(dp, PRINTED, N, 2)
    assert set(rep.checks) == {"flatness", "coproduct_closure", "associator_trivial", "splitting"}
    assert not rep.passed("coproduct_closure")


def test_splitting_with_plus_sign_fails(dp):
    plus = ConventionConfig(psi_exponent="t", twist_sign="plus")
    assert not qdouble.twist_splitting(dp, plus)["ok"]
    assert qdouble.twist_splitting(dp, CONSISTENT)["ok"]


def test_intersection_with_A_plus(dp):
    basis, equal = qdouble.intersection_with_A_plus(dp, CONSISTENT, 2, 3)
    assert equal
    assert basis == ["1", "h", "h^2", "h^3"]


def test_quadruple(dp):
    assert qdouble.verify_quadruple_quantization(dp, CONSISTENT, N, 2).passed()


def test_graded_condition_trivial_twist(dp):
    # with H = G+ and F = 1, F - 1 = 0 lies in any subspace
    assert qdouble.in_A0_tensor(dp.algebra(N).one(2))


def test_sweep_snapshot(dp):
    rows = qdouble.convention_sweep(dp, N, 2)
    assert len(rows) == 16
    assert all(row["cocycle"] for row in rows.values())
    got = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    assert got == (SNAPSHOTS / "sweep_N3_D2_t2.json").read_text()


def test_all_conventions_order():
    convs = qdouble.all_conventions()
    assert len(convs) == 16 and len(set(convs)) == 16
    assert convs[0] == PRINTED


def test_invalid_convention():
    with pytest.raises(ValueError):
        ConventionConfig(beta="t")


@given(st.integers(0, 4), st.integers(0, 4))
def test_counit_on_products(dp, a, b):
    alg = dp.algebra(2)
    x = alg.gen(a) * alg.gen(b)
    assert x.counit() == alg.series(0)
    assert (x + alg.one()).counit() == alg.series(1)


def test_symbolic_t_twist_cocycle():
    dp = qdouble.DoublePresentation.shipped("symbolic")
    F = dp.twist(CONSISTENT, 2)
    _, phi = qdouble.twist_coproduct_and_associator(dp, F, gens=())
    assert phi == dp.algebra(2).one(3)
