"""Right-B-invariant functionals on A, their star product and the quotient by A+^perp.

An invariant functional vanishes on the left ideal A B0, so it is a
functional on A / A B0. That quotient has the basis of C-monomials, the PBW
monomials in (e_plus_star, h_star, e_minus_star); :class:`CosetDecomposition`
computes the class of any element in that basis.
"""

from dataclasses import dataclass
from itertools import product

from . import liealg, pbw
from .linalg import Echelon, flatten_series, layer_ranks, series_kernel, shifted
from .qdouble import CONSISTENT, A_PLUS, VerificationReport, format_key
from .series import TruncSeries

C_GENS = ("e_plus_star", "h_star", "e_minus_star")


class DegreeOverflow(ArithmeticError):
    """A functional was evaluated beyond the degree it is known to."""


def c_monomials(alg, degree):
    return alg.monomials_upto(degree, among=[alg.index(g) for g in C_GENS])


def _acc(target, source, scale):
    pbw._accumulate(target, source, scale)


class CosetDecomposition:
    """Classes modulo the left ideal A B0 with B0 = (h, e_plus + beta e_plus_star, e_minus + beta e_minus_star).

    For an ordered monomial m with last letter x:
      x among the C generators -> m is itself a C-monomial;
      x = h                     -> m lies in A h, class 0;
      x = e_plus / e_minus      -> m = m' x = m' (x + beta x*) - beta m' x*, class of -beta m' x*.
    """

    def __init__(self, alg, beta):
        self.alg = alg
        self.beta = alg.series(beta)
        self.idx = {g: alg.index(g) for g in alg.generators}
        self.c_idx = {self.idx[g] for g in C_GENS}
        self.h = self.idx["h"]
        self.partner = {self.idx["e_plus"]: self.idx["e_plus_star"], self.idx["e_minus"]: self.idx["e_minus_star"]}
        self._memo = {}
        self._active = set()
        self._plus = {}

    @classmethod
    def for_double(cls, dp, conv=CONSISTENT, order=None):
        order = dp.file.order if order is None else order
        return cls(dp.algebra(order), dp.beta(conv))

    def reduce_monomial(self, m):
        hit = self._memo.get(m)
        if hit is not None:
            return hit
        k = max((i for i, a in enumerate(m) if a), default=None)
        if k is None or k in self.c_idx:
            out = {m: self.alg._one}
        elif k == self.h:
            out = {}
        else:
            if m in self._active:
                raise pbw.RewriteError(f"reduction cycle at {m}")
            self._active.add(m)
            try:
                rest = m[:k] + (m[k] - 1,) + m[k + 1 :]
                star = tuple(1 if i == self.partner[k] else 0 for i in range(self.alg.n))
                out = {}
                for w, c in self.alg.mono_mul(rest, star).items():
                    _acc(out, self.reduce_monomial(w), -c * self.beta)
            finally:
                self._active.discard(m)
        self._memo[m] = out
        return out

    def reduce(self, x):
        """{C-monomial: series} for an arity-1 element."""
        out = {}
        for (m,), c in x.terms.items():
            _acc(out, self.reduce_monomial(m), c)
        return out

    def reduce_tensor(self, X):
        """Apply the class map on every leg: {(c1, ..., ck): series}."""
        out = {}
        for key, c in X.terms.items():
            legs = [self.reduce_monomial(m) for m in key]
            for combo in product(*(leg.items() for leg in legs)):
                coef = c
                for _, s in combo:
                    coef = coef * s
                if coef.is_zero():
                    continue
                k = tuple(w for w, _ in combo)
                old = out.get(k)
                new = coef if old is None else old + coef
                if new.is_zero():
                    out.pop(k, None)
                else:
                    out[k] = new
        return out

    def plus_image(self, degree):
        """Echelon of the module spanned by classes of A+ monomials of degree <= degree."""
        if degree not in self._plus:
            alg = self.alg
            idx = [alg.index(g) for g in A_PLUS]
            ech = Echelon(track=False)
            for m in alg.monomials_upto(degree, among=idx):
                flat = flatten_series(self.reduce_monomial(m))
                for j in range(alg.order + 1):
                    ech.add(shifted(flat, j, alg.order))
            self._plus[degree] = ech
        return self._plus[degree]


def adapted_reduce(alg, beta, m, max_degree):
    """Independent route: solve m = sum coeff * c * b over adapted monomials and keep the b = 1 part.

    c runs over C-monomials and b over ordered products of (E_plus, h, E_minus),
    with total degree <= max_degree. Returns None if m is not in that span.
    """
    beta = alg.series(beta)
    E_plus = alg.gen("e_plus") + alg.gen("e_plus_star") * beta
    E_minus = alg.gen("e_minus") + alg.gen("e_minus_star") * beta
    h = alg.gen("h")
    span, labels = [], []
    for c in c_monomials(alg, max_degree):
        left = alg.monomial(c)
        for a, b, d in product(range(max_degree + 1), repeat=3):
            if sum(c) + a + b + d > max_degree:
                continue
            span.append(left * E_plus**a * h**b * E_minus**d)
            labels.append((c, (a, b, d)))
    sol = pbw.span_membership(alg.monomial(m), span)
    if not sol.ok:
        return None
    out = {}
    for i, coeff in sol.items():
        c, bexp = labels[i]
        if bexp == (0, 0, 0):
            _acc(out, {c: alg._one}, coeff)
    return out


# ---------------------------------------------------------------- functionals


@dataclass(frozen=True)
class Functional:
    """Values on C-monomials; ``bound`` is the degree up to which they are known (None: exact everywhere)."""

    values: tuple  # sorted ((monomial, series), ...)
    bound: object = None

    @classmethod
    def of(cls, values, bound=None):
        return cls(tuple(sorted((m, s) for m, s in values.items() if not s.is_zero())), bound)

    @classmethod
    def delta(cls, alg, m):
        return cls.of({tuple(m): alg._one})

    @classmethod
    def counit(cls, alg):
        return cls.delta(alg, alg.unit_mono)

    def as_dict(self):
        return dict(self.values)

    def __call__(self, vec):
        """Evaluate on a reduced vector {C-monomial: series}."""
        vals = self.as_dict()
        total = None
        for m, c in vec.items():
            if self.bound is not None and sum(m) > self.bound:
                raise DegreeOverflow(f"needs degree {sum(m)} > {self.bound}")
            v = vals.get(m)
            if v is None:
                continue
            term = c * v
            total = term if total is None else total + term
        return total

    def restrict(self, degree):
        return Functional.of({m: s for m, s in self.values if sum(m) <= degree}, degree)

    def __add__(self, other):
        out = self.as_dict()
        for m, s in other.values:
            out[m] = out[m] + s if m in out else s
        return Functional.of(out, _min_bound(self.bound, other.bound))

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return Functional.of({m: s * c for m, s in self.values}, self.bound)

    def agrees(self, other, degree):
        a = {m: s for m, s in self.values if sum(m) <= degree}
        b = {m: s for m, s in other.values if sum(m) <= degree}
        return a == b


def _min_bound(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _zero(alg):
    return TruncSeries.constant(0, alg.order, alg.field)


class StarProduct:
    """(l * l')(a) = (l (x) l')(Delta(a) F^-1), with both legs reduced."""

    def __init__(self, dp, cd, F):
        self.dp = dp
        self.cd = cd
        self.alg = cd.alg
        self.F = F
        self.Finv = pbw.series_inverse(F)
        self._tables = {}

    def table_of(self, x):
        """Reduced Delta(x) F^-1 for an arity-1 element."""
        return self.cd.reduce_tensor(self.dp.extend_coproduct(x) * self.Finv)

    def table(self, m):
        hit = self._tables.get(m)
        if hit is None:
            hit = self.table_of(self.alg.monomial(m))
            self._tables[m] = hit
        return hit

    def pair_value(self, table, l1, l2):
        total = _zero(self.alg)
        v1, v2 = l1.as_dict(), l2.as_dict()
        for (i, j), c in table.items():
            for l, k in ((l1, i), (l2, j)):
                if l.bound is not None and sum(k) > l.bound:
                    raise DegreeOverflow(f"needs degree {sum(k)} > {l.bound}")
            a, b = v1.get(i), v2.get(j)
            if a is not None and b is not None:
                total = total + c * a * b
        return total

    def star(self, l1, l2, degree):
        vals = {m: self.pair_value(self.table(m), l1, l2) for m in c_monomials(self.alg, degree)}
        return Functional.of(vals, degree)

    def evaluate(self, l1, l2, x):
        """(l1 * l2)(x) for an arbitrary arity-1 element x."""
        return self.pair_value(self.table_of(x), l1, l2)


def module_action(cd, a, l, degree):
    """(a l)(a') = l(a a') on C-monomials of degree <= degree."""
    alg = cd.alg
    vals = {m: l(cd.reduce(a * alg.monomial(m))) or _zero(alg) for m in c_monomials(alg, degree)}
    return Functional.of(vals, degree)


# ---------------------------------------------------------------- classical side


class ClassicalModel:
    """U(g) from structure constants, primitive coproduct, and reduction mod U(g) H."""

    def __init__(self, g, beta, names):
        self.g = g
        self.alg = pbw.lie_presentation(g, names, order=0)
        self.cd = CosetDecomposition(self.alg, beta)
        self._delta = {}

    def delta(self, m):
        if m not in self._delta:
            alg = self.alg
            if not any(m):
                val = alg.one(2)
            else:
                i = next(k for k, a in enumerate(m) if a)
                rest = m[:i] + (m[i] - 1,) + m[i + 1 :]
                x = alg.gen(i)
                val = (x @ alg.one() + alg.one() @ x) * self.delta(rest)
            self._delta[m] = val
        return self._delta[m]

    def tensor_element(self, T):
        """liealg Tensor (rank 2) -> arity-2 element."""
        alg = self.alg
        out = alg.zero(2)
        for (i, j), c in T.terms.items():
            a = alg.gen(self.g.labels[i])
            b = alg.gen(self.g.labels[j])
            out = out + (a @ b) * c
        return out


def poisson_oracle(model, r, l1, l2, m):
    """-(l1 (x) l2)(r Delta0(m)) on a C-monomial m, at hbar^0."""
    X = model.tensor_element(r) * model.delta(m)
    table = model.cd.reduce_tensor(X)
    total = model.alg.field.zero
    v1, v2 = l1, l2
    for (i, j), c in table.items():
        total += c[0] * v1.get(i, 0) * v2.get(j, 0)
    return -total


def poisson_limit(sp, i, j, m):
    """hbar^1 coefficient of (d_i * d_j - d_j * d_i)(m) for dual-basis functionals; also the hbar^0 part."""
    T = sp.table(m)
    zero = _zero(sp.alg)
    diff = T.get((i, j), zero) - T.get((j, i), zero)
    return diff[0], diff[1]


# ---------------------------------------------------------------- suite


def _binom3(d):
    return (d + 3) * (d + 2) * (d + 1) // 6


def adapted_monomials(cd, degree):
    """(c, b-exponents, c * E_plus^a h^b E_minus^d) for total degree <= degree."""
    alg = cd.alg
    E_plus, E_minus, h = cd_gen(cd, "e_plus"), cd_gen(cd, "e_minus"), alg.gen("h")
    out = []
    for c in c_monomials(alg, degree):
        left = alg.monomial(c)
        for a, b, d in product(range(degree + 1), repeat=3):
            if sum(c) + a + b + d <= degree:
                out.append((c, (a, b, d), left * E_plus**a * h**b * E_minus**d))
    return out


def flatness_table(cd, degree):
    """Per-hbar-layer ranks of the adapted monomials of degree <= degree and of those lying in A B0.

    Their difference is the dimension of invariant functionals in that degree.
    The layer ranks of the classes of all PBW monomials of degree <= degree are
    reported too; hbar-corrections of higher degree make that module non-free.
    """
    alg = cd.alg
    adapted = adapted_monomials(cd, degree)
    total = layer_ranks([x.terms for _, _, x in adapted], alg.order)
    in_ideal = layer_ranks([x.terms for _, b, x in adapted if any(b)], alg.order)
    classes = layer_ranks([cd.reduce_monomial(m) for m in alg.monomials_upto(degree)], alg.order)
    return {
        "adapted": total,
        "adapted_in_ideal": in_ideal,
        "invariant": [a - b for a, b in zip(total, in_ideal)],
        "classes_of_monomials": classes,
    }


def cd_gen(cd, name):
    alg = cd.alg
    return alg.gen(name) + alg.gen(name + "_star") * cd.beta


def dual_basis(alg, degree):
    return [Functional.delta(alg, m) for m in c_monomials(alg, degree)]


def verify_star_product(dp, conv=CONSISTENT, order=2, degree=2):
    report = VerificationReport({"order": order, "degree": degree, "convention": conv.as_dict()})
    alg = dp.algebra(order)
    cd = CosetDecomposition(alg, dp.beta(conv))
    sp = StarProduct(dp, cd, dp.twist(conv, order))
    cs = c_monomials(alg, degree)
    basis = dual_basis(alg, degree)
    eps = Functional.counit(alg)
    ok = all(
        sp.star(eps, l, degree).agrees(l, degree) and sp.star(l, eps, degree).agrees(l, degree)
        for l in basis
    )
    report.record("unit", ok)

    # B-invariance of products: (l*l')(a b) = 0 for b a generator of B0
    bad = None
    bgen = {"h": alg.gen("h"), "E_plus": cd_gen(cd, "e_plus"), "E_minus": cd_gen(cd, "e_minus")}
    for m in alg.monomials_upto(degree):
        for name, b in bgen.items():
            if sp.table_of(alg.monomial(m) * b):
                bad = {"monomial": format_key(alg, (m,)), "b": name}
                break
        if bad:
            break
    report.record("b_invariance", bad is None, residual=bad)

    # associativity on all dual-basis triples
    d_eval = degree + 2 * order
    bad = None
    left_cache = {}
    for i, j in product(cs, repeat=2):
        left_cache[(i, j)] = sp.star(basis[cs.index(i)], basis[cs.index(j)], d_eval)
    for (i, j, k) in product(range(len(cs)), repeat=3):
        li, lj, lk = basis[i], basis[j], basis[k]
        left = sp.star(left_cache[(cs[i], cs[j])], lk, degree)
        right = sp.star(li, left_cache[(cs[j], cs[k])], degree)
        if not left.agrees(right, degree):
            bad = {"triple": [format_key(alg, (cs[x],)) for x in (i, j, k)]}
            break
    report.record("associativity", bad is None, residual=bad)

    table = flatness_table(cd, degree)
    expected = _binom3(degree)
    n_all = len(alg.monomials_upto(degree))
    report.record(
        "flatness",
        table["invariant"] == [expected] * (order + 1) and table["adapted"] == [n_all] * (order + 1),
        info=table,
    )

    model = ClassicalModel(dp.lie, dp.beta(conv), dp.generators)
    rho = _poisson_r(dp)
    bad = None
    anti_bad = None
    for i, j in product(cs, repeat=2):
        for m in cs:
            c0, c1 = poisson_limit(sp, i, j, m)
            ov = poisson_oracle(model, rho, {i: 1}, {j: 1}, m)
            if c0 or c1 != ov:
                bad = bad or {"pair": [format_key(alg, (i,)), format_key(alg, (j,))], "at": format_key(alg, (m,))}
            if ov + poisson_oracle(model, rho, {j: 1}, {i: 1}, m):
                anti_bad = anti_bad or {"pair": [format_key(alg, (i,)), format_key(alg, (j,))]}
    report.record("poisson_limit", bad is None, residual=bad)
    report.record("poisson_antisymmetry", anti_bad is None, residual=anti_bad)
    return report


def _poisson_r(dp):
    """The classical r-matrix of the double, taken in the orientation of the R-matrix limit."""
    from .qdouble import classical_limit

    return classical_limit(dp)


# ---------------------------------------------------------------- ideal and quotient


def ideal_rows(cd, degree, among):
    alg = cd.alg
    idx = [alg.index(g) for g in among]
    return [cd.reduce_monomial(m) for m in alg.monomials_upto(degree, among=idx)]


def quotient_rows(cd, degree):
    """Classes of e_plus^a e_minus^c, a + c <= degree: a basis of A+ / A+ h."""
    alg = cd.alg
    ep, em = alg.index("e_plus"), alg.index("e_minus")
    rows = []
    for total in range(degree + 1):
        for a in range(total, -1, -1):
            m = [0] * alg.n
            m[ep], m[em] = a, total - a
            rows.append(((a, total - a), cd.reduce_monomial(tuple(m))))
    return rows


def ideal_and_quotient(dp, conv=CONSISTENT, order=2, degree=2):
    """I = invariant functionals vanishing on A+, the restriction map rho, and the checks relating them."""
    report = VerificationReport({"order": order, "degree": degree, "convention": conv.as_dict()})
    alg = dp.algebra(order)
    cd = CosetDecomposition(alg, dp.beta(conv))
    field = alg.field
    dims = {}
    ok_kernel = ok_surj = ok_dim = True
    for d in range(degree + 1):
        d_eval = d + 2 * order
        cols = c_monomials(alg, d_eval)
        I, free_I = series_kernel(ideal_rows(cd, d, A_PLUS), cols, order, field)
        rho_rows = [row for _, row in quotient_rows(cd, d)]
        K, free_K = series_kernel(rho_rows, cols, order, field)
        same = _same_module(I, K, order)
        ok_kernel &= same and free_I and free_K
        # surjectivity: the rows of rho are independent modulo hbar
        low = Echelon(track=False)
        for row in rho_rows:
            low.add({k: s[0] for k, s in row.items() if s[0]})
        ok_surj &= low.rank == len(rho_rows)
        dims[d] = len(cols) - len(I)
        ok_dim &= dims[d] == (d + 1) * (d + 2) // 2
    report.record("kernel_equals_ideal", ok_kernel)
    report.record("rho_surjective", ok_surj)
    report.record("quotient_dimensions", ok_dim, info={str(k): v for k, v in dims.items()})

    # two-sidedness: I computed to degree degree + 2N so that products can be evaluated
    sp = StarProduct(dp, cd, dp.twist(conv, order))
    d_big = degree + 2 * order
    cols = c_monomials(alg, d_big + 2 * order)
    I_big, _ = series_kernel(ideal_rows(cd, d_big, A_PLUS), cols, order, field)
    ideal_funcs = [Functional.of(v) for v in I_big]
    test_points = alg.monomials_upto(degree, among=[alg.index(g) for g in A_PLUS])
    bad = None
    for l in ideal_funcs:
        for c in c_monomials(alg, degree):
            d = Functional.delta(alg, c)
            for name, (a, b) in (("left", (l, d)), ("right", (d, l))):
                for m in test_points:
                    v = sp.pair_value(sp.table(m), a, b)
                    if not v.is_zero():
                        bad = {"side": name, "at": format_key(alg, (m,)), "delta": format_key(alg, (c,))}
                        break
                if bad:
                    break
            if bad:
                break
        if bad:
            break
    report.record("two_sided_ideal", bad is None, residual=bad, info={"ideal_basis_size": len(ideal_funcs)})
    eps = Functional.counit(alg)
    report.record("counit_not_in_ideal", any(eps(r) for r in ideal_rows(cd, 0, A_PLUS)))
    return report


def _same_module(U, V, order):
    def ech(vectors):
        e = Echelon(track=False)
        for v in vectors:
            flat = flatten_series(v)
            for j in range(order + 1):
                e.add(shifted(flat, j, order))
        return e

    a, b = ech(U), ech(V)
    return a.rank == b.rank and all(b.contains(r) for r, _ in a.rows.values())


# ---------------------------------------------------------------- remarks


def twist_modification_invariance(dp, F0, conv=CONSISTENT, order=2, degree=2):
    """Compare star tables for F and F0 F on C-monomials of degree <= degree; returns (equal, first differing monomial)."""
    alg = dp.algebra(order)
    cd = CosetDecomposition(alg, dp.beta(conv))
    F = dp.twist(conv, order)
    sp = StarProduct(dp, cd, F)
    sp0 = StarProduct(dp, cd, F0 * F)
    for m in c_monomials(alg, degree):
        if sp.table(m) != sp0.table(m):
            return False, format_key(alg, (m,))
    return True, None


def conjugated_setup(dp, u, conv=CONSISTENT, order=2, degree=2):
    """Check that l -> (a -> l(a u)) intertwines the star products for F and uF = (u (x) u) F Delta(u)^-1.

    Compares (l * l')(a u) with (i_u l *_u i_u l')(a) = (l (x) l')(Delta(a) uF^-1 (u (x) u)) as
    reduced tensors, for all PBW monomials a of degree <= degree. Returns (ok, uF, conjugated B generators).
    """
    alg = dp.algebra(order)
    cd = CosetDecomposition(alg, dp.beta(conv))
    F = dp.twist(conv, order)
    uinv = pbw.series_inverse(u)
    du = dp.extend_coproduct(u)
    uF = (u @ u) * F * pbw.series_inverse(du)
    uFinv = pbw.series_inverse(uF)
    Finv = pbw.series_inverse(F)
    uB = [u * b * uinv for b in dp.B_generators(order, conv)]
    for m in alg.monomials_upto(degree):
        a = alg.monomial(m)
        lhs = cd.reduce_tensor(dp.extend_coproduct(a * u) * Finv)
        rhs = cd.reduce_tensor(dp.extend_coproduct(a) * uFinv * (u @ u))
        if lhs != rhs:
            return False, uF, uB
    return True, uF, uB


def verify_remarks(dp, conv=CONSISTENT, order=2, degree=2):
    report = VerificationReport({"order": order, "degree": degree, "convention": conv.as_dict()})
    alg = dp.algebra(order)
    hbar = TruncSeries.hbar(order, alg.field)
    beta = dp.beta(conv)
    Ep = alg.gen("e_plus") + alg.gen("e_plus_star") * beta
    Em = alg.gen("e_minus") + alg.gen("e_minus_star") * beta
    ok, where = twist_modification_invariance(dp, alg.one(2) + (Ep @ Em) * hbar, conv, order, degree)
    report.record("twist_modification_invariance", ok, residual=where)
    for label, F0 in (
        ("e_plus_star@E_minus", alg.one(2) + (alg.gen("e_plus_star") @ Em) * hbar),
        ("e_plus_star@e_minus_star", alg.one(2) + (alg.gen("e_plus_star") @ alg.gen("e_minus_star")) * hbar),
    ):
        same, where = twist_modification_invariance(dp, F0, conv, order, degree)
        report.record(f"negative_control:{label}", True, info={"unchanged": same, "first_difference": where}, informational=True)
    u = alg.one() + alg.gen("e_plus") * hbar
    ok, _, _ = conjugated_setup(dp, u, conv, order, degree)
    report.record("conjugated_setup", ok)
    return report
