"""Exact scalars: base fields and power series in hbar truncated at a fixed order."""

from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq


class StructuralError(ValueError):
    """Operands live in different coefficient rings."""


class NotInvertible(ArithmeticError):
    pass


class BaseField:
    """An exact coefficient field.

    kind is one of ``"rationals"``, ``"rational_functions"`` (in a formal
    variable t) or ``"specialized"`` (rationals, with t bound to a rational
    value other than 0 and 1).
    """

    KINDS = ("rationals", "rational_functions", "specialized")

    def __init__(self, kind="rationals", t=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown field kind {kind!r}")
        self.kind = kind
        self._t = None
        self._zero = self._one = None
        if kind == "rational_functions":
            from sympy import QQ, symbols

            self._K = QQ.frac_field(symbols("t"))
            self._t = self._K.gens[0]
        elif kind == "specialized":
            if t is None:
                raise ValueError("specialized field needs a value for t")
            value = self.convert(t)
            if value == 0 or value == 1:
                raise ValueError("t must differ from 0 and 1")
            self._t = value
        elif t is not None:
            raise ValueError("plain rationals carry no t")

    @classmethod
    def specialized(cls, t):
        return cls("specialized", t)

    @property
    def zero(self):
        if self._zero is None:
            self._zero = self.convert(0)
        return self._zero

    @property
    def one(self):
        if self._one is None:
            self._one = self.convert(1)
        return self._one

    @property
    def t(self):
        if self._t is None:
            raise ValueError("this field has no parameter t")
        return self._t

    def convert(self, x):
        if self.kind == "rational_functions":
            if isinstance(x, (Fraction, type(mpq()))):
                return self._K(int(x.numerator)) / self._K(int(x.denominator))
            if isinstance(x, str):
                num, _, den = x.partition("/")
                return self._K(int(num)) / self._K(int(den or 1))
            return self._K(x)
        if isinstance(x, Fraction):
            return mpq(x.numerator, x.denominator)
        return mpq(x)

    def canonical(self, x):
        """(numerator, denominator) with monic denominator; rationals give (p, q) with q > 0."""
        if self.kind == "rational_functions":
            den = x.denom
            lc = den.LC
            return (x.numer.quo_ground(lc), den.quo_ground(lc))
        return (x.numerator, x.denominator)

    def to_str(self, x):
        if self.kind == "rational_functions":
            num, den = self.canonical(x)
            return str(num.as_expr()) if den == 1 else f"({num.as_expr()})/({den.as_expr()})"
        return str(x)

    def __eq__(self, other):
        return isinstance(other, BaseField) and (self.kind, self._t) == (other.kind, other._t)

    def __hash__(self):
        return hash((self.kind, str(self._t)))

    def __repr__(self):
        if self.kind == "specialized":
            return f"BaseField('specialized', t={self._t})"
        return f"BaseField({self.kind!r})"


QQ = BaseField()


class TruncSeries:
    """c_0 + c_1 hbar + ... + c_N hbar^N, computed modulo hbar^(N+1).

    Immutable. Arithmetic with ints and field elements promotes them to
    constant series.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, coeffs, field=QQ, order=None):
        coeffs = [field.convert(c) if not _is_elem(c) else c for c in coeffs]
        if order is not None:
            coeffs = (coeffs + [field.zero] * (order + 1))[: order + 1]
        if not coeffs:
            raise ValueError("a series needs at least one coefficient")
        self.field = field
        self.coeffs = tuple(coeffs)

    @classmethod
    def _raw(cls, coeffs, field):
        s = object.__new__(cls)
        s.field = field
        s.coeffs = coeffs
        return s

    @classmethod
    def constant(cls, c, order, field=QQ):
        z = field.zero
        return cls._raw((field.convert(c),) + (z,) * order, field)

    @classmethod
    def hbar(cls, order, field=QQ):
        coeffs = [field.zero] * (order + 1)
        if order >= 1:
            coeffs[1] = field.one
        return cls._raw(tuple(coeffs), field)

    @classmethod
    def q_power(cls, k, order, field=QQ):
        """q^k = exp(k hbar)."""
        coeffs = []
        term = field.one
        for n in range(order + 1):
            coeffs.append(term)
            term = term * field.convert(k) / field.convert(n + 1)
        return cls._raw(tuple(coeffs), field)

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def _coerce(self, other):
        if isinstance(other, TruncSeries):
            if other.field != self.field or len(other.coeffs) != len(self.coeffs):
                raise StructuralError(
                    f"series mismatch: order {self.order}/{other.order}, "
                    f"field {self.field}/{other.field}"
                )
            return other
        return TruncSeries.constant(other, self.order, self.field)

    def __add__(self, other):
        other = self._coerce(other)
        return TruncSeries._raw(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.field)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries._raw(tuple(-a for a in self.coeffs), self.field)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            if isinstance(other, (int, Fraction)):
                other = self.field.convert(other)
            return TruncSeries._raw(tuple(a * other for a in self.coeffs), self.field)
        a, b = self.coeffs, other.coeffs
        n = len(a)
        if len(b) != n or (other.field is not self.field and other.field != self.field):
            self._coerce(other)
        out = [self.field.zero] * n
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j in range(n - i):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
        return TruncSeries._raw(tuple(out), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).invert()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.invert()

    def __pow__(self, n):
        if n < 0:
            return self.invert() ** (-n)
        result = TruncSeries.constant(1, self.order, self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def invert(self):
        a = self.coeffs
        if not a[0]:
            raise NotInvertible(f"constant term of {self} is zero")
        inv0 = self.field.one / a[0]
        out = [inv0]
        for k in range(1, len(a)):
            acc = self.field.zero
            for j in range(1, k + 1):
                if a[j]:
                    acc += a[j] * out[k - j]
            out.append(-acc * inv0)
        return TruncSeries._raw(tuple(out), self.field)

    def valuation(self):
        """Index of the first nonzero coefficient, None for the zero series."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def is_zero(self):
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def shift_down(self, k):
        """Divide by hbar^k; the result has order N - k. Low coefficients must vanish."""
        if any(self.coeffs[:k]):
            raise ArithmeticError(f"series not divisible by hbar^{k}")
        return TruncSeries._raw(self.coeffs[k:], self.field)

    def shift_up(self, k):
        """Multiply by hbar^k, keeping the order."""
        z = self.field.zero
        return TruncSeries._raw(((z,) * k + self.coeffs)[: len(self.coeffs)], self.field)

    def truncate(self, order):
        if order > self.order:
            raise StructuralError("cannot raise the order of a truncated series")
        return TruncSeries._raw(self.coeffs[: order + 1], self.field)

    def __eq__(self, other):
        if isinstance(other, TruncSeries):
            return self.field == other.field and self.coeffs == other.coeffs
        try:
            return self.coeffs == self._coerce(other).coeffs
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            s = self.field.to_str(c)
            terms.append(s if k == 0 else f"({s})*hbar^{k}")
        return " + ".join(terms) if terms else "0"


def _is_elem(c):
    return not isinstance(c, (int, str, Fraction))


@lru_cache(maxsize=None)
def q_factorial(n, order, field=QQ):
    """[n]! = prod_{k=1..n} (1 + q^2 + ... + q^(2k-2)) with q = exp(hbar)."""
    result = TruncSeries.constant(1, order, field)
    for k in range(1, n + 1):
        bracket = TruncSeries.constant(0, order, field)
        for j in range(k):
            bracket = bracket + TruncSeries.q_power(2 * j, order, field)
        result = result * bracket
    return result
