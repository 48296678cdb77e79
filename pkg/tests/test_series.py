from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhverify.series import QQ, BaseField, NotInvertible, StructuralError, TruncSeries, q_factorial

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def series(draw, order=None):
    n = draw(st.integers(0, 6)) if order is None else order
    return TruncSeries(draw(st.lists(fractions, min_size=n + 1, max_size=n + 1)))


@st.composite
def triples(draw):
    n = draw(st.integers(0, 6))
    return draw(series(n)), draw(series(n)), draw(series(n))


@given(triples())
def test_ring_axioms(abc):
    a, b, c = abc
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == TruncSeries.constant(0, a.order)


@given(series())
def test_inverse_round_trip(a):
    if not a[0]:
        with pytest.raises(NotInvertible):
            a.invert()
        return
    assert a * a.invert() == TruncSeries.constant(1, a.order)


def test_q_minus_q_inverse():
    q = TruncSeries.q_power(1, 3)
    assert q - TruncSeries.q_power(-1, 3) == TruncSeries([0, 2, 0, Fraction(1, 3)])


@pytest.mark.parametrize(
    "coeffs, expected",
    [
        ([1, 1], [1, -1]),
        ([2, 1, 0], [Fraction(1, 2), Fraction(-1, 4), Fraction(1, 8)]),
        ([1, 0, 0, 0], [1, 0, 0, 0]),
    ],
)
def test_invert_examples(coeffs, expected):
    assert TruncSeries(coeffs).invert() == TruncSeries(expected)


def test_invert_zero_constant():
    with pytest.raises(NotInvertible):
        TruncSeries.hbar(3).invert()


@pytest.mark.parametrize("n", range(9))
def test_q_factorial_classical_value(n):
    assert q_factorial(n, 3)[0] == factorial(n)


def test_q_factorial_two():
    # [2]! = 1 + q^2 = 2 + 2h + 2h^2 + ...
    assert q_factorial(2, 2) == TruncSeries([2, 2, 2])


def test_mismatched_orders():
    with pytest.raises(StructuralError):
        TruncSeries([1, 2]) + TruncSeries([1, 2, 3])


def test_mismatched_fields():
    f = BaseField.specialized(2)
    with pytest.raises(StructuralError):
        TruncSeries([1, 2], f) * TruncSeries([1, 2], QQ)


def test_shift_down_requires_divisibility():
    s = TruncSeries([0, 0, 3, 4])
    assert s.shift_down(2) == TruncSeries([3, 4])
    with pytest.raises(ArithmeticError):
        s.shift_down(3)


def test_specialized_field_rejects_degenerate_t():
    for bad in ("0", "1"):
        with pytest.raises(ValueError):
            BaseField.specialized(bad)


def test_rational_functions():
    f = BaseField("rational_functions")
    t = f.t
    s = TruncSeries([t, 1], f)
    inv = s.invert()
    assert s * inv == TruncSeries.constant(1, 1, f)
    num, den = f.canonical(inv[1])
    assert den.LC == 1
