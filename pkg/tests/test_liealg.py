from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhverify import liealg
from qhverify.liealg import Subspace, Tensor

g = liealg.build_double_sl2()
E = {name: g.vec(**{name: 1}) for name in g.labels}
BETA = 1  # t - 1 at t = 2
GP, GM, H = liealg.standard_subspaces(g, BETA)


def T(*pairs):
    out = Tensor(2)
    for c, a, b in pairs:
        out = out + Tensor.from_vectors(E[a], E[b]) * Fraction(c)
    return out


def combo(**c):
    return g.vec(**{k: Fraction(v) for k, v in c.items()})


def test_axioms():
    assert all(g.check_axioms().values())


@pytest.mark.parametrize(
    "x, y, expected",
    [
        ("h", "e_plus", combo(e_plus=2)),
        ("h", "h_star", combo()),
        ("e_plus", "e_minus_star", combo(h=Fraction(1, 2), h_star=Fraction(-1, 2))),
    ],
)
def test_brackets(x, y, expected):
    assert g.bracket(E[x], E[y]) == expected


@pytest.mark.parametrize(
    "x, y, value",
    [("h", "h_star", 2), ("e_minus", "e_plus_star", "1/2"), ("e_plus", "e_minus_star", "-1/2"), ("h", "h", 0)],
)
def test_form_values(x, y, value):
    assert g.pair(E[x], E[y]) == Fraction(value)


def test_quadruple_nongraded():
    rep = liealg.check_manin_quadruple(g, GP, GM, H)
    assert rep.valid and not rep.graded


def test_quadruple_with_H_equal_G_plus():
    rep = liealg.check_manin_quadruple(g, GP, GM, GP)
    assert rep.valid and rep.graded


def test_quadruple_invalid():
    bad = Subspace([E["e_plus"], E["h"], E["e_minus_star"]], g.dim)
    assert not liealg.check_manin_quadruple(g, GP, GM, bad).valid


def test_span_with_e_plus_star_is_a_graded_lagrangian():
    # e+, h, e+* pair to zero and close under the bracket
    S = Subspace([E["e_plus"], E["h"], E["e_plus_star"]], g.dim)
    rep = liealg.check_manin_quadruple(g, GP, GM, S)
    assert rep.valid and rep.graded


def test_dual_bases_pairing_is_identity():
    upper, lower = liealg.dual_bases(g, GP, GM)
    for i, u in enumerate(upper):
        for j, l in enumerate(lower):
            assert g.pair(u, l) == (1 if i == j else 0)


def test_r_matrix_value():
    r = liealg.r_matrix(g, GP, GM)
    assert r == T((-2, "e_plus", "e_minus_star"), ("1/2", "h", "h_star"), (2, "e_minus", "e_plus_star"))


def test_r_symmetric_part():
    r = liealg.r_matrix(g, GP, GM)
    assert r + r.transpose() == g.canonical_element()


def test_cybe():
    assert liealg.cybe_residual(g, Tensor(2)).is_zero()
    assert liealg.cybe_residual(g, liealg.r_matrix(g, GP, GM)).is_zero()
    perturbed = g.canonical_element() * Fraction(1, 2) + T((1, "e_plus", "h"), (-1, "h", "e_plus"))
    assert not liealg.cybe_residual(g, perturbed).is_zero()


@pytest.fixture(scope="module")
def twist_data():
    return liealg.classical_twist_data(g, H, GM, liealg.r_matrix(g, GP, GM))


def test_r_HL_value(twist_data):
    expected = T(
        ("1/2", "h", "h_star"),
        (-2, "e_plus", "e_minus_star"),
        (-2 * BETA, "e_plus_star", "e_minus_star"),
        (2, "e_minus", "e_plus_star"),
        (2 * BETA, "e_minus_star", "e_plus_star"),
    )
    assert twist_data.r_HL == expected


def test_f_and_phi_antisymmetric(twist_data):
    f = twist_data.f_HL
    assert f + f.transpose() == Tensor(2)
    assert liealg.is_totally_antisymmetric(twist_data.phi_HL, len(twist_data.L_basis))


def test_cocycle_image():
    t = g.canonical_element()
    assert liealg.cocycle_image(g, E["h"], t).is_zero()
    r_HL = liealg.classical_twist_data(g, H, GM, liealg.r_matrix(g, GP, GM)).r_HL
    for x in H.basis:
        img = liealg.cocycle_image(g, x, r_HL)
        assert liealg.tensor_in(g, img, (H, H))
        assert img + img.transpose() == Tensor(2)


def test_cocycle_image_of_zero():
    # the double is semisimple, so 0 is the only central element
    assert liealg.cocycle_image(g, combo(), T((3, "e_plus", "e_minus"))).is_zero()


def test_drinfeld_bivector_trivial_quotient():
    xi, q = liealg.drinfeld_bivector(g, GP, GP, GM)
    assert q == [] and xi.is_zero()


def test_drinfeld_bivector_full_quotient():
    # P n V = 0; the class of r21 modulo G- vanishes, and so does xi
    xi, q = liealg.drinfeld_bivector(g, GM, GP, GM)
    assert len(q) == 3 and xi.is_zero()


def test_drinfeld_bivector_H_is_class_of_r21():
    r = liealg.r_matrix(g, GP, GM)
    xi, q = liealg.drinfeld_bivector(g, H, GP, GM)
    # compare classes in (g/H)^{(x)2} by pairing against H-perp (x) H-perp = H (x) H
    diff = xi - r.transpose()
    assert all(not liealg.pair_tensor(g, diff, (u, w)) for u in H.basis for w in H.basis)


def test_extract_splitting_round_trip(twist_data):
    out = liealg.extract_lagrangian_splitting(g, twist_data.r_HL, H)
    assert out["ok"] and out["L"] == GM


def test_extract_splitting_failure_on_half_t():
    out = liealg.extract_lagrangian_splitting(g, g.canonical_element() * Fraction(1, 2), H)
    assert not out["ok"] and "first_leg_in_H" in out["failed"]


def test_extract_splitting_with_H_equal_G_plus():
    out = liealg.extract_lagrangian_splitting(g, liealg.r_matrix(g, GP, GM), GP)
    assert out["ok"] and out["L"] == GM


@given(st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(bool))
def test_H_beta_family(beta):
    gp, gm, h = liealg.standard_subspaces(g, beta)
    assert liealg.check_manin_quadruple(g, gp, gm, h).valid
    data = liealg.classical_twist_data(g, h, gm, liealg.r_matrix(g, gp, gm))
    out = liealg.extract_lagrangian_splitting(g, data.r_HL, h)
    assert out["ok"] and out["L"] == gm
    sym = liealg.r_matrix(g, gp, gm)
    assert liealg.in_H_g_plus_g_H(g, g.canonical_element(), h)
    assert sym + sym.transpose() == data.r_HL + data.r_HL.transpose()


@given(st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(bool))
def test_dual_bases_sum_is_canonical(beta):
    # H_beta and G- are complementary for every nonzero beta
    _, gm, h = liealg.standard_subspaces(g, beta)
    up, low = liealg.dual_bases(g, h, gm)
    s = liealg.r_from_dual(up, low)
    assert s + s.transpose() == g.canonical_element()
