"""PBW normal forms for algebras given by ordered commutation rules.

A monomial is a tuple of exponents over the ordered generators. An
:class:`Element` of arity k is a finite sum of k-fold tensors of monomials
with :class:`~qhverify.series.TruncSeries` coefficients; arity 1 is the
algebra itself.
"""

import sys
from itertools import product

from .linalg import Echelon, flatten_series, shifted
from .series import NotInvertible, StructuralError, TruncSeries, q_factorial

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class RewriteError(RuntimeError):
    """Rewriting did not terminate within budget, or hit a missing rule."""


class GrowthBoundViolation(AssertionError):
    pass


class NotTopologicallyNilpotent(ValueError):
    pass


class Presentation:
    """Generators x_0 < x_1 < ... with a rule for every out-of-order pair x_b x_a (b > a).

    ``rules[(b, a)]`` is a dict {monomial: TruncSeries} giving the normal
    form of x_b x_a. Normal forms are computed by always rewriting the
    leftmost out-of-order adjacent pair; results for (generator, monomial)
    products are memoised.
    """

    def __init__(self, generators, rules, field, order, check_growth=True, budget=2_000_000):
        self.generators = tuple(generators)
        self.n = len(self.generators)
        self.field = field
        self.order = order
        self.rules = rules
        self.check_growth = check_growth
        self.budget = budget
        self._steps = 0
        self._gen_cache = {}
        self._mono_cache = {}
        self._active = set()
        self.unit_mono = (0,) * self.n
        self._one = TruncSeries.constant(1, order, field)

    # construction helpers -------------------------------------------------

    def index(self, name):
        try:
            return self.generators.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None

    def mono(self, *names, **powers):
        exps = [0] * self.n
        for name in names:
            exps[self.index(name)] += 1
        for name, p in powers.items():
            exps[self.index(name)] += p
        return tuple(exps)

    def series(self, c):
        if isinstance(c, TruncSeries):
            if c.order != self.order or c.field != self.field:
                raise StructuralError("series does not match the presentation")
            return c
        return TruncSeries.constant(c, self.order, self.field)

    def zero(self, arity=1):
        return Element(self, arity, {})

    def one(self, arity=1):
        return Element(self, arity, {(self.unit_mono,) * arity: self._one})

    def scalar(self, c, arity=1):
        return Element(self, arity, {(self.unit_mono,) * arity: self.series(c)})

    def gen(self, name):
        i = name if isinstance(name, int) else self.index(name)
        return Element(self, 1, {(self._e(i),): self._one})

    def monomial(self, m, coeff=1):
        return Element(self, 1, {(tuple(m),): self.series(coeff)})

    def _e(self, i):
        return tuple(1 if j == i else 0 for j in range(self.n))

    # rewriting ------------------------------------------------------------

    def missing_rules(self):
        return [(b, a) for b in range(self.n) for a in range(b) if (b, a) not in self.rules]

    def gen_times(self, i, m):
        """Normal form of x_i * m for a normal monomial m, as {monomial: series}."""
        key = (i, m)
        cached = self._gen_cache.get(key)
        if cached is not None:
            return cached
        j = next((k for k, a in enumerate(m) if a), None)
        if j is None or i <= j:
            result = {m[:i] + (m[i] + 1,) + m[i + 1 :]: self._one}
        else:
            rule = self.rules.get((i, j))
            if rule is None:
                raise RewriteError(
                    f"no rule for {self.generators[i]}*{self.generators[j]}"
                )
            if key in self._active:
                raise RewriteError(f"rewriting cycle at {self.generators[i]} * {m}")
            self._steps += 1
            if self._steps > self.budget:
                raise RewriteError("rewrite step budget exhausted")
            self._active.add(key)
            try:
                rest = m[:j] + (m[j] - 1,) + m[j + 1 :]
                result = {}
                for u, c in rule.items():
                    _accumulate(result, self.mono_mul(u, rest), c)
            finally:
                self._active.discard(key)
        self._gen_cache[key] = result
        return result

    def mono_mul(self, u, m):
        """Normal form of the product of normal monomials u * m."""
        key = (u, m)
        cached = self._mono_cache.get(key)
        if cached is not None:
            return cached
        if not any(u):
            result = {m: self._one}
        elif not any(m):
            result = {u: self._one}
        else:
            # peel the last generator of u: u = u' x_k, so u*m = u' * (x_k * m)
            k = max(i for i, a in enumerate(u) if a)
            head = u[:k] + (u[k] - 1,) + u[k + 1 :]
            inner = self.gen_times(k, m)
            result = {}
            for w, c in inner.items():
                _accumulate(result, self.mono_mul(head, w), c)
            if self.check_growth:
                self._assert_growth(sum(u) + sum(m), result)
        self._mono_cache[key] = result
        return result

    def _assert_growth(self, d, result):
        for w, c in result.items():
            deg = sum(w)
            for k, x in enumerate(c.coeffs):
                if x and deg > d + 2 * k:
                    raise GrowthBoundViolation(
                        f"hbar^{k} coefficient has degree {deg} > {d} + 2*{k}"
                    )

    def normal_form(self, word, coeff=1):
        """Normal form of a word (sequence of generator names or indices)."""
        result = {self.unit_mono: self.series(coeff)}
        for g in reversed(list(word)):
            i = g if isinstance(g, int) else self.index(g)
            new = {}
            for m, c in result.items():
                _accumulate(new, self.gen_times(i, m), c)
            result = new
        return Element(self, 1, {(m,): c for m, c in result.items()})

    def multiply(self, a, b):
        return a * b

    def at_order(self, order):
        """Same rules truncated to a lower order."""
        if order > self.order:
            raise StructuralError("cannot raise the order of a presentation")
        rules = {k: {m: c.truncate(order) for m, c in v.items()} for k, v in self.rules.items()}
        rules = {k: {m: c for m, c in v.items() if not c.is_zero()} for k, v in rules.items()}
        return Presentation(self.generators, rules, self.field, order, self.check_growth, self.budget)

    def check_table(self):
        """Invariants of the rule table: full coverage, classical PBW shape at hbar^0."""
        problems = []
        for b, a in self.missing_rules():
            problems.append(f"missing rule for {self.generators[b]}*{self.generators[a]}")
        for (b, a), rhs in self.rules.items():
            if b <= a:
                problems.append(f"rule for ordered pair {self.generators[b]}*{self.generators[a]}")
                continue
            lead = tuple(1 if i in (a, b) else 0 for i in range(self.n))
            top = {m: c[0] for m, c in rhs.items() if c[0] and sum(m) >= 2}
            if top != {lead: self.field.one}:
                problems.append(
                    f"rule {self.generators[b]}*{self.generators[a]} lacks PBW shape at hbar^0"
                )
        return problems

    def monomials_upto(self, degree, among=None):
        """All monomials of total degree <= degree, optionally only in the given generator indices."""
        idx = list(range(self.n)) if among is None else list(among)
        out = []

        def rec(pos, left, cur):
            if pos == len(idx):
                m = [0] * self.n
                for i, a in zip(idx, cur):
                    m[i] = a
                out.append(tuple(m))
                return
            for a in range(left + 1):
                rec(pos + 1, left - a, cur + [a])

        rec(0, degree, [])
        out.sort(key=lambda m: (sum(m), tuple(-x for x in m)))
        return out


def _accumulate(target, source, scale):
    """target += scale * source for {key: series} dicts; drops zeros."""
    for k, c in source.items():
        prod = c * scale
        if prod.is_zero():
            continue
        old = target.get(k)
        if old is None:
            target[k] = prod
        else:
            new = old + prod
            if new.is_zero():
                del target[k]
            else:
                target[k] = new


class Element:
    """Sum of k-fold tensors of PBW monomials with truncated-series coefficients."""

    __slots__ = ("alg", "arity", "terms")

    def __init__(self, alg, arity, terms):
        self.alg = alg
        self.arity = arity
        self.terms = {k: c for k, c in terms.items() if not c.is_zero()}

    # structure ------------------------------------------------------------

    def _check(self, other):
        if other.alg is not self.alg:
            if other.alg.order != self.alg.order or other.alg.field != self.alg.field:
                raise StructuralError("elements belong to different truncations")

    def _promote(self, other):
        if isinstance(other, Element):
            self._check(other)
            if other.arity == self.arity:
                return other
            if other.arity == 1 and other.is_scalar():
                return other.alg.scalar(other.scalar_part(), self.arity)
            if self.arity == 1 and self.is_scalar():
                return other
            raise StructuralError(f"arity mismatch {self.arity} vs {other.arity}")
        return self.alg.scalar(other, self.arity)

    def is_scalar(self):
        unit = (self.alg.unit_mono,) * self.arity
        return all(k == unit for k in self.terms)

    def scalar_part(self):
        """Coefficient of the identity monomial (1 (x) ... (x) 1)."""
        unit = (self.alg.unit_mono,) * self.arity
        return self.terms.get(unit, TruncSeries.constant(0, self.alg.order, self.alg.field))

    def coefficient(self, *monos):
        key = tuple(tuple(m) for m in monos)
        return self.terms.get(key, TruncSeries.constant(0, self.alg.order, self.alg.field))

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Element) and other.arity != self.arity and self.arity == 1 and self.is_scalar():
            return other + self
        other = self._promote(other)
        terms = dict(self.terms)
        _accumulate(terms, other.terms, self.alg._one)
        return Element(self.alg, self.arity, terms)

    __radd__ = __add__

    def __neg__(self):
        return Element(self.alg, self.arity, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, Element) and other.arity != self.arity and self.arity == 1 and self.is_scalar():
            return (-other) + self
        return self + (-self._promote(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Element):
            s = self.alg.series(other) if not isinstance(other, TruncSeries) else other
            if isinstance(other, TruncSeries):
                self.alg.series(other)
            return Element(self.alg, self.arity, {k: c * s for k, c in self.terms.items()})
        self._check(other)
        if other.arity != self.arity:
            if other.arity == 1 and other.is_scalar():
                return self * other.scalar_part()
            if self.arity == 1 and self.is_scalar():
                return other * self.scalar_part()
            raise StructuralError(f"arity mismatch {self.arity} vs {other.arity}")
        alg = self.alg
        out = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                c = ca * cb
                if c.is_zero():
                    continue
                legs = [alg.mono_mul(u, m) for u, m in zip(ka, kb)]
                if self.arity == 1:
                    _accumulate(out, {(m,): s for m, s in legs[0].items()}, c)
                    continue
                for combo in product(*(leg.items() for leg in legs)):
                    key = tuple(m for m, _ in combo)
                    coef = c
                    for _, s in combo:
                        coef = coef * s
                    if coef.is_zero():
                        continue
                    old = out.get(key)
                    out[key] = coef if old is None else old + coef
        return Element(alg, self.arity, out)

    def __rmul__(self, other):
        # scalars commute with everything
        return self * other

    def __matmul__(self, other):
        """Tensor product: arities add."""
        if not isinstance(other, Element):
            other = self.alg.scalar(other)
        self._check(other)
        out = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                c = ca * cb
                if not c.is_zero():
                    out[ka + kb] = c
        return Element(self.alg, self.arity + other.arity, out)

    def __pow__(self, n):
        if n < 0:
            return series_inverse(self) ** (-n)
        result = self.alg.one(self.arity)
        for _ in range(n):
            result = result * self
        return result

    def __truediv__(self, other):
        if isinstance(other, Element):
            if not other.is_scalar():
                raise StructuralError("can only divide by a scalar")
            other = other.scalar_part()
        other = self.alg.series(other) if not isinstance(other, TruncSeries) else other
        return self * other.invert()

    def __eq__(self, other):
        if not isinstance(other, Element):
            other = self.alg.scalar(other, self.arity)
        return self.arity == other.arity and (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self.terms))

    def is_zero(self):
        return not self.terms

    # queries --------------------------------------------------------------

    def valuation(self):
        vals = [c.valuation() for c in self.terms.values()]
        return min(vals) if vals else None

    def max_degree(self):
        return max((sum(sum(m) for m in k) for k in self.terms), default=0)

    def hbar_part(self, k):
        """{key: field element} of the hbar^k coefficient."""
        return {key: c[k] for key, c in self.terms.items() if c[k]}

    def first_residual(self):
        """(hbar order, key) of the first nonzero coefficient in canonical order, or None."""
        best = None
        for key, c in self.terms.items():
            k = c.valuation()
            cand = (k, key)
            if best is None or cand < best:
                best = cand
        return best

    def truncate(self, alg):
        """Re-express in a presentation of lower (or equal) order."""
        terms = {k: c.truncate(alg.order) for k, c in self.terms.items()}
        return Element(alg, self.arity, terms)

    def divide_hbar(self, k, alg):
        """self / hbar^k as an element of alg (order self.order - k)."""
        if alg.order != self.alg.order - k:
            raise StructuralError("target presentation has the wrong order")
        return Element(alg, self.arity, {key: c.shift_down(k) for key, c in self.terms.items()})

    def counit(self):
        """Apply the counit on every leg (eps(x_i) = 0)."""
        return self.scalar_part()

    def apply_counit(self, leg):
        """eps on one leg; arity drops by one."""
        unit = self.alg.unit_mono
        out = {}
        for key, c in self.terms.items():
            if key[leg] == unit:
                new = key[:leg] + key[leg + 1 :]
                _accumulate(out, {new: c}, self.alg._one)
        return Element(self.alg, self.arity - 1, out)

    def permute(self, perm):
        """Leg j of the result is leg perm[j] of self."""
        return Element(self.alg, self.arity, {tuple(k[p] for p in perm): c for k, c in self.terms.items()})

    def transpose(self):
        return self.permute((1, 0))

    def embed(self, positions, arity):
        """Place leg i of self at position positions[i] of an arity-``arity`` tensor, 1 elsewhere."""
        unit = self.alg.unit_mono
        out = {}
        for key, c in self.terms.items():
            new = [unit] * arity
            for leg, pos in zip(key, positions):
                new[pos] = leg
            out[tuple(new)] = c
        return Element(self.alg, arity, out)

    def map_leg(self, leg, f):
        """Replace leg ``leg`` by f(monomial), an Element of some arity m; result arity grows by m-1."""
        out = None
        for key, c in self.terms.items():
            image = f(key[leg])
            left = key[:leg]
            right = key[leg + 1 :]
            piece = {}
            for ik, ic in image.terms.items():
                s = c * ic
                if not s.is_zero():
                    piece[left + ik + right] = s
            part = Element(self.alg, self.arity - 1 + image.arity, piece)
            out = part if out is None else out + part
        if out is None:
            return self.alg.zero(self.arity)
        return out

    def legs_in(self, subsets):
        """True if, for every term, leg i only involves generator indices in subsets[i]."""
        for key in self.terms:
            for m, allowed in zip(key, subsets):
                if any(a and i not in allowed for i, a in enumerate(m)):
                    return False
        return True

    def __repr__(self):
        if not self.terms:
            return "0"
        gens = self.alg.generators
        parts = []
        for key in sorted(self.terms):
            legs = []
            for m in key:
                w = "*".join(g if a == 1 else f"{g}^{a}" for g, a in zip(gens, m) if a) or "1"
                legs.append(w)
            parts.append(f"({self.terms[key]})*{' @ '.join(legs)}")
        return " + ".join(parts)


# element-level series functions ----------------------------------------------


def series_inverse(x):
    """Inverse of x = c (1 + n) with c a nonzero constant and n = 0 mod hbar."""
    alg = x.alg
    unit = (alg.unit_mono,) * x.arity
    c0 = x.scalar_part()[0]
    low = {k: c[0] for k, c in x.terms.items() if c[0]}
    if not c0 or set(low) != {unit}:
        raise NotInvertible("hbar^0 part is not a nonzero multiple of the identity")
    inv_c = alg.field.one / c0
    n = x * inv_c - alg.one(x.arity)
    result = alg.one(x.arity)
    power = alg.one(x.arity)
    for _ in range(alg.order):
        power = power * (-n)
        if power.is_zero():
            break
        result = result + power
    return result * inv_c


def _require_nilpotent(x):
    if any(c[0] for c in x.terms.values()):
        raise NotTopologicallyNilpotent("argument must vanish modulo hbar")


def exp(x):
    _require_nilpotent(x)
    alg = x.alg
    result = alg.one(x.arity)
    term = alg.one(x.arity)
    for n in range(1, alg.order + 1):
        term = term * x / n
        if term.is_zero():
            break
        result = result + term
    return result


def exp_q2(x):
    """sum_n x^n / [n]!  with the q-factorial of q = exp(hbar)."""
    _require_nilpotent(x)
    alg = x.alg
    result = alg.one(x.arity)
    power = alg.one(x.arity)
    for n in range(1, alg.order + 1):
        power = power * x
        if power.is_zero():
            break
        result = result + power * q_factorial(n, alg.order, alg.field).invert()
    return result


def log_over_hbar(y, target):
    """The X with exp(hbar X) = y, for y = 1 mod hbar given at order N+1; X lives in ``target`` (order N)."""
    alg = y.alg
    d = y - alg.one(y.arity)
    _require_nilpotent(d)
    result = alg.zero(y.arity)
    power = alg.one(y.arity)
    for n in range(1, alg.order + 1):
        power = power * d
        if power.is_zero():
            break
        sign = 1 if n % 2 else -1
        result = result + power * alg.field.convert(sign) / n
    return result.divide_hbar(1, target)


# membership ---------------------------------------------------------------------


class Decomposition(dict):
    """{index in S: TruncSeries} with x == sum c_i S_i."""

    ok = True


class MembershipFailure:
    ok = False

    def __init__(self, residual):
        self.residual = residual

    def __repr__(self):
        return f"MembershipFailure(residual terms={len(self.residual)})"


def span_membership(x, S):
    """Solve x = sum c_i S_i with c_i in Q[hbar]/hbar^(N+1), exactly.

    Works order by order over the base field by spanning the module with
    hbar^j S_i. On failure returns the residual of x after projection onto
    the span (flattened as {(hbar order, key): coefficient}).
    """
    order = x.alg.order
    ech = Echelon()
    for i, s in enumerate(S):
        flat = flatten_series(s.terms)
        for j in range(order + 1):
            ech.add(shifted(flat, j, order), label=(i, j))
    target = flatten_series(x.terms)
    sol = ech.solve(target)
    if sol is None:
        residual, _ = ech.reduce(target)
        return MembershipFailure(residual)
    coeffs = Decomposition()
    field = x.alg.field
    for (i, j), c in sol.items():
        cur = coeffs.get(i)
        vec = [field.zero] * (order + 1)
        vec[j] = c
        s = TruncSeries(vec, field)
        coeffs[i] = s if cur is None else cur + s
    return coeffs


# independent oracle ---------------------------------------------------------------


class DenseOracle:
    """Left-multiplication matrices of the generators on PBW monomials of degree <= D.

    Columns are produced by naive rewriting of words (leftmost out-of-order
    pair first, no memoisation of sub-products), straight from the rule
    table. Products of monomials are obtained by composing these matrices.
    """

    def __init__(self, alg, degree):
        self.alg = alg
        self.degree = degree
        self._cols = {}

    def column(self, i, m):
        if sum(m) > self.degree:
            raise OverflowError(f"monomial {m} exceeds oracle degree {self.degree}")
        key = (i, m)
        if key not in self._cols:
            self._cols[key] = self._rewrite_word([i] + _word(m))
        return self._cols[key]

    def _rewrite_word(self, word):
        alg = self.alg
        done = {}
        todo = [(tuple(word), alg._one)]
        while todo:
            w, c = todo.pop()
            pos = next((p for p in range(len(w) - 1) if w[p] > w[p + 1]), None)
            if pos is None:
                m = [0] * alg.n
                for g in w:
                    m[g] += 1
                _accumulate(done, {tuple(m): c}, alg._one)
                continue
            rule = alg.rules[(w[pos], w[pos + 1])]
            for u, s in rule.items():
                coef = c * s
                if not coef.is_zero():
                    todo.append((w[:pos] + tuple(_word(u)) + w[pos + 2 :], coef))
        return done

    def matrix(self, i):
        """Sparse matrix {column monomial: {row monomial: series}} over all monomials of degree <= D."""
        return {m: self.column(i, m) for m in self.alg.monomials_upto(self.degree)}

    def apply(self, i, vec):
        out = {}
        for m, c in vec.items():
            _accumulate(out, self.column(i, m), c)
        return out

    def product(self, u, m):
        vec = {m: self.alg._one}
        for i in reversed(_word(u)):
            vec = self.apply(i, vec)
        return vec


def _word(m):
    w = []
    for i, a in enumerate(m):
        w.extend([i] * a)
    return w


def lie_presentation(g, names, order=0):
    """Classical enveloping algebra U(g) from structure constants, generators in the given order.

    names lists basis labels of g in PBW order; rules are x_b x_a = x_a x_b + [x_b, x_a].
    """
    field = g.field
    n = len(names)
    idx = [g.index(nm) for nm in names]
    one = TruncSeries.constant(1, order, field)
    rules = {}
    for b in range(n):
        for a in range(b):
            rhs = {}
            m = [0] * n
            m[a] += 1
            m[b] += 1
            rhs[tuple(m)] = one
            br = g.bracket(g.basis_vector(idx[b]), g.basis_vector(idx[a]))
            for pos, label_idx in enumerate(idx):
                c = br[label_idx]
                if c:
                    e = tuple(1 if k == pos else 0 for k in range(n))
                    rhs[e] = TruncSeries.constant(c, order, field)
            rules[(b, a)] = rhs
    return Presentation(names, rules, field, order)
