from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhverify import cli, liealg, pbw
from qhverify.series import NotInvertible, TruncSeries

N = 3


@pytest.fixture(scope="module")
def alg(dp):
    return dp.algebra(N)


def q(alg, k):
    return TruncSeries.q_power(k, alg.order, alg.field)


def test_shipped_table_is_complete(alg):
    assert alg.check_table() == []
    assert len(alg.rules) == 15


def test_e_plus_times_e_plus_star(alg):
    lhs = alg.gen("e_plus") * alg.gen("e_plus_star")
    es, e = alg.gen("e_plus_star"), alg.gen("e_plus")
    q2 = q(alg, 2)
    assert lhs == es * e * q2 - es * es * (q2 - alg.series(1))


def test_h_commutes_with_h_star(alg):
    h, hs = alg.gen("h"), alg.gen("h_star")
    assert h * hs == hs * h
    assert (h * hs).terms == {(alg.mono("h_star", "h"),): alg._one}


def test_e_minus_e_plus(alg):
    # (q^h - q^-h)/(q - q^-1) = h + hbar^2 (h^3 - h)/6 + O(hbar^4)
    h = alg.gen("h")
    sinh = h + (h ** 3 - h) * alg.scalar(TruncSeries([0, 0, "1/6", 0], alg.field))
    lhs = alg.gen("e_minus") * alg.gen("e_plus")
    assert lhs == alg.gen("e_plus") * alg.gen("e_minus") - sinh


def test_multiply_trivial_cases(alg):
    es = alg.gen("e_plus_star")
    a = alg.gen("e_minus") * alg.gen("e_plus") + es
    assert alg.one() * a == a
    assert (es * es).terms == {(alg.mono(e_plus_star=2),): alg._one}


def test_small_associativity(alg):
    ep, em = alg.gen("e_plus"), alg.gen("e_minus")
    assert (ep * em) * ep == ep * (em * ep)


def test_confluence_at_order_4(dp):
    assert cli.confluence(dp.algebra(4)) == []


def test_growth_bound_is_enforced():
    # a rule violating d + 2k at hbar^1 trips the assertion
    one = TruncSeries.constant(1, 1)
    h = TruncSeries.hbar(1)
    rules = {(1, 0): {(1, 1): one, (5, 0): h}}
    bad = pbw.Presentation(("x", "y"), rules, one.field, 1)
    with pytest.raises(pbw.GrowthBoundViolation):
        bad.gen("y") * bad.gen("x")


def test_tensor_products(alg):
    ep, em = alg.gen("e_plus"), alg.gen("e_minus")
    X = ep @ em + alg.one(2)
    assert alg.one(2) * X == X
    assert (ep @ alg.one()) * (alg.one() @ em) == ep @ em


@pytest.fixture(scope="module")
def theta(alg):
    es, ems = alg.gen("e_plus_star"), alg.gen("e_minus_star")
    c = q(alg, -1) * (q(alg, 1) - q(alg, -1)) * (q(alg, 1) - q(alg, -1))
    return (es @ ems) * alg.scalar(c, 2)


def test_series_inverse_examples(alg, theta):
    assert pbw.series_inverse(alg.one(2)) == alg.one(2)
    # the square of theta is O(hbar^4)
    assert pbw.series_inverse(alg.one(2) - theta) == alg.one(2) + theta
    with pytest.raises(NotInvertible):
        pbw.series_inverse(alg.gen("e_plus") @ alg.one())


def test_series_inverse_round_trip(alg, theta):
    F = pbw.exp_q2(theta + (alg.gen("h") @ alg.gen("e_plus")) * alg.scalar(TruncSeries.hbar(N, alg.field), 2))
    assert F * pbw.series_inverse(F) == alg.one(2)
    assert pbw.series_inverse(F) * F == alg.one(2)


def test_exp_q2_zero(alg):
    assert pbw.exp_q2(alg.zero(2)) == alg.one(2)


def test_exp_q2_first_terms(dp):
    alg = dp.algebra(2)
    qq = TruncSeries.q_power(1, 2, alg.field) - TruncSeries.q_power(-1, 2, alg.field)
    base = alg.gen("e_plus_star") @ alg.gen("e_minus_star")
    got = pbw.exp_q2(base * alg.scalar(-qq, 2))
    # 1 - 2 hbar X + hbar^2 (4 X^2 / [2]!) with [2]! = 2 at hbar^0
    expected = alg.one(2) + base * alg.scalar(TruncSeries([0, -2, 0], alg.field), 2)
    expected = expected + (base * base) * alg.scalar(TruncSeries([0, 0, 2], alg.field), 2)
    assert got == expected


def test_log_round_trip(dp):
    big, small = dp.algebra(N + 1), dp.algebra(N)
    y = pbw.exp(big.gen("h") * big.scalar(TruncSeries.hbar(N + 1, big.field)))
    assert pbw.log_over_hbar(y, small) == small.gen("h")


def test_exp_requires_nilpotent(alg):
    with pytest.raises(pbw.NotTopologicallyNilpotent):
        pbw.exp(alg.gen("h"))


@given(st.integers(0, 7), st.integers(-3, 3))
def test_exp_of_scaled_h(dp, a, b):
    alg = dp.algebra(2)
    x = alg.gen("h") * alg.scalar(TruncSeries([0, a, b], alg.field))
    assert pbw.exp(x) * pbw.exp(-x) == alg.one()


def test_span_membership_indicator(alg):
    S = [alg.gen("h"), alg.gen("e_plus"), alg.gen("e_minus") * alg.gen("e_plus")]
    dec = pbw.span_membership(S[1], S)
    assert dec.ok and {k: v for k, v in dec.items() if not v.is_zero()} == {1: alg._one}


def _coset_spanning_set(alg, beta):
    b = alg.field.convert(beta)
    b0 = [alg.gen("h"), alg.gen("e_plus") + alg.gen("e_plus_star") * b, alg.gen("e_minus") + alg.gen("e_minus_star") * b]
    aplus = [alg.monomial(m) for m in alg.monomials_upto(1, among=[3, 4, 5])]
    left = [alg.monomial(m) * x for m in alg.monomials_upto(1) for x in b0]
    return aplus, left


def test_span_membership_e_plus_star(alg):
    aplus, left = _coset_spanning_set(alg, 1)
    dec = pbw.span_membership(alg.gen("e_plus_star"), aplus + left)
    assert dec.ok
    recon = alg.zero()
    for i, c in dec.items():
        recon = recon + (aplus + left)[i] * alg.scalar(c)
    assert recon == alg.gen("e_plus_star")


def test_span_membership_counit_obstruction(alg):
    _, left = _coset_spanning_set(alg, 1)
    out = pbw.span_membership(alg.one(), left)
    assert not out.ok and out.residual


def test_dense_oracle_identity_and_product(alg):
    oracle = pbw.DenseOracle(alg, 4)
    one = alg.unit_mono
    es = alg.mono("e_plus_star")
    assert oracle.product(one, es) == {es: alg._one}
    nf = (alg.gen("e_plus") * alg.gen("e_plus_star")).terms
    got = oracle.apply(alg.index("e_plus"), oracle.apply(alg.index("e_plus_star"), {one: alg._one}))
    assert {(m,): c for m, c in got.items()} == nf


def test_dense_oracle_commutator(alg):
    # room for the hbar-degree growth of the intermediate products
    oracle = pbw.DenseOracle(alg, 4 + 2 * alg.order)
    h, ep = alg.index("h"), alg.index("e_plus")
    for m in alg.monomials_upto(3):
        v = {m: alg._one}
        comm = dict(oracle.apply(h, oracle.apply(ep, v)))
        pbw._accumulate(comm, oracle.apply(ep, oracle.apply(h, v)), alg.series(-1))
        assert comm == {k: c * alg.series(2) for k, c in oracle.apply(ep, v).items()}


def test_oracle_agreement(alg):
    assert cli.oracle_mismatches(alg, 4) == []


def test_oracle_overflow(alg):
    with pytest.raises(OverflowError):
        pbw.DenseOracle(alg, 1).column(0, alg.mono("h", "h"))


def test_classical_enveloping_algebra():
    g = liealg.build_double_sl2()
    U = pbw.lie_presentation(g, ["e_plus_star", "h_star", "e_minus_star", "e_plus", "h", "e_minus"])
    assert U.check_table() == []
    assert cli.confluence(U) == []
    h, ep = U.gen("h"), U.gen("e_plus")
    assert h * ep - ep * h == ep * 2


@given(st.lists(st.sampled_from(range(6)), min_size=1, max_size=5))
def test_normal_form_matches_products(dp, word):
    alg = dp.algebra(2)
    prod = alg.one()
    for i in word:
        prod = prod * alg.gen(i)
    assert alg.normal_form(word) == prod


@given(st.lists(st.sampled_from(range(6)), min_size=2, max_size=4), st.integers(1, 3))
def test_truncation_commutes_with_products(dp, word, k):
    big = dp.algebra(3)
    small = dp.algebra(3 - (k % 3))
    assert big.normal_form(word).truncate(small) == small.normal_form(word)


def test_monomials_upto_counts(alg):
    for d, count in product(range(4), [None]):
        assert len(alg.monomials_upto(d)) == [1, 7, 28, 84][d]
