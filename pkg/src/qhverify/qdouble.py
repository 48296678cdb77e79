"""The quantum double of U_hbar(sl2): coproduct, R-matrix, twist and their checks.

Everything is computed exactly modulo hbar^(N+1). Checks return
:class:`VerificationReport` objects; a failed identity is a report entry
carrying its first nonzero residual, never an exception.
"""

from dataclasses import dataclass, field
from itertools import product

from . import liealg, pbw
from .linalg import Echelon, flatten_series, layer_ranks, shifted
from .presentation import SHIPPED, Evaluator, load, rule_table
from .series import BaseField, TruncSeries

A_PLUS = ("e_plus", "h", "e_minus")
A_MINUS = ("e_plus_star", "h_star", "e_minus_star")


@dataclass(frozen=True)
class ConventionConfig:
    """The four binary sign/orientation choices left open by the printed formulas."""

    r_orientation: str = "g_plus_first"  # or "g_minus_first"
    psi_exponent: str = "inv_t"  # Psi uses 1/t, or "t"
    beta: str = "t_minus_1"  # or "inv_t_minus_1"
    twist_sign: str = "plus"  # (F - F21), or "minus" for (F21 - F)

    CHOICES = {
        "r_orientation": ("g_plus_first", "g_minus_first"),
        "psi_exponent": ("inv_t", "t"),
        "beta": ("t_minus_1", "inv_t_minus_1"),
        "twist_sign": ("plus", "minus"),
    }

    def __post_init__(self):
        for name, allowed in self.CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.CHOICES}

    def label(self):
        return ",".join(getattr(self, k) for k in self.CHOICES)

    def beta_value(self, t):
        return t - 1 if self.beta == "t_minus_1" else 1 / t - 1

    def psi_value(self, t):
        return 1 / t if self.psi_exponent == "inv_t" else t


PRINTED = ConventionConfig()
# psi and beta agree to first order, and the splitting needs the minus sign
CONSISTENT = ConventionConfig(psi_exponent="t", twist_sign="minus")


def all_conventions():
    keys = list(ConventionConfig.CHOICES)
    return [
        ConventionConfig(**dict(zip(keys, combo)))
        for combo in product(*(ConventionConfig.CHOICES[k] for k in keys))
    ]


# ---------------------------------------------------------------- reports


@dataclass
class VerificationReport:
    params: dict
    checks: dict = field(default_factory=dict)

    def record(self, name, ok, residual=None, info=None, informational=False):
        entry = {"status": "pass" if ok else "fail"}
        if residual is not None and not ok:
            entry["residual"] = residual
        if info is not None:
            entry["info"] = info
        if informational:
            entry["informational"] = True
        self.checks[name] = entry
        return ok

    def skip(self, name, reason):
        self.checks[name] = {"status": "skip", "reason": reason}

    def passed(self, name=None):
        if name is not None:
            return self.checks[name]["status"] == "pass"
        return all(
            c["status"] != "fail" for c in self.checks.values() if not c.get("informational")
        )

    def merge(self, other, prefix=""):
        for k, v in other.checks.items():
            self.checks[prefix + k] = v
        return self

    def to_json(self):
        return {"params": self.params, "checks": {k: self.checks[k] for k in sorted(self.checks)}}


def format_key(alg, key):
    legs = []
    for m in key:
        w = "*".join(g if a == 1 else f"{g}^{a}" for g, a in zip(alg.generators, m) if a)
        legs.append(w or "1")
    return " @ ".join(legs)


def residual_summary(x):
    """First nonzero (hbar order, monomial) of an element, in canonical order; None if zero."""
    if x.is_zero():
        return None
    k, key = x.first_residual()
    c = x.terms[key][k]
    return {"hbar_order": k, "monomial": format_key(x.alg, key), "coefficient": x.alg.field.to_str(c)}


# ---------------------------------------------------------------- the double


def parse_t(text, kind="specialized"):
    """Field for a --t argument: 'p/q' or 'symbolic'."""
    if text in (None, "symbolic"):
        return BaseField("rational_functions")
    return BaseField("specialized", text)


class DoublePresentation:
    """The algebra A with its coproduct, counit, R-matrix, twist and subalgebras.

    Algebras are built lazily per truncation order and cached; all cached
    values are pure functions of (file, field, order, convention).
    """

    def __init__(self, pfile, field=None):
        self.file = pfile
        if field is None:
            field = BaseField(pfile.field_kind, pfile.t or None) if pfile.field_kind == "specialized" else BaseField(pfile.field_kind)
        self.field = field
        self.generators = pfile.generators
        self._algebras = {}
        self._evaluators = {}
        self._delta_gen = {}
        self._delta_mono = {}
        self.lie = liealg.build_double_sl2(field)

    @classmethod
    def from_file(cls, path=SHIPPED, t=None):
        pfile = load(path)
        fld = None if t is None else parse_t(t)
        return cls(pfile, fld)

    @classmethod
    def shipped(cls, t="2"):
        return cls.from_file(SHIPPED, t)

    # evaluation ----------------------------------------------------------

    @property
    def t(self):
        return self.field.t

    def params(self, conv=PRINTED):
        t = self.t
        return {"t": t, "beta": conv.beta_value(t), "psi": conv.psi_value(t)}

    def algebra(self, order):
        alg = self._algebras.get(order)
        if alg is None:
            rules = rule_table(self.file, self.field, order, self.params(), self.algebra)
            alg = pbw.Presentation(self.generators, rules, self.field, order)
            self._algebras[order] = alg
        return alg

    def evaluator(self, conv=PRINTED):
        key = (conv.beta, conv.psi_exponent)
        ev = self._evaluators.get(key)
        if ev is None:
            ev = Evaluator(self.algebra, self.field, self.params(conv))
            self._evaluators[key] = ev
        return ev

    def evaluate(self, node, order, conv=PRINTED, where=""):
        return self.evaluator(conv)(node, order, where)

    def gen(self, name, order):
        return self.algebra(order).gen(name)

    def beta(self, conv):
        return conv.beta_value(self.t)

    def B_generators(self, order, conv=PRINTED):
        exprs = dict(self.file.subalgebras)["B"]
        return [self.evaluate(e, order, conv, "subalgebras.B") for e in exprs]

    # coproduct and counit ------------------------------------------------

    def coproduct(self, name, order):
        key = (name, order)
        if key in self._delta_gen:
            return self._delta_gen[key]
        images = dict(self.file.coproduct)
        exp_images = dict(self.file.coproduct_exp)
        if name in images:
            value = self.evaluate(images[name], order, where=f"coproduct.{name}")
        else:
            # Delta(x) = log(Delta(q^x)) / hbar, computed one order higher
            y = self.evaluate(exp_images[name], order + 1, where=f"coproduct_exp.{name}")
            value = pbw.log_over_hbar(y, self.algebra(order))
        self._delta_gen[key] = value
        return value

    def delta_monomial(self, m, order):
        key = (m, order)
        hit = self._delta_mono.get(key)
        if hit is not None:
            return hit
        alg = self.algebra(order)
        if not any(m):
            value = alg.one(2)
        else:
            i = next(k for k, a in enumerate(m) if a)
            rest = m[:i] + (m[i] - 1,) + m[i + 1 :]
            value = self.coproduct(self.generators[i], order) * self.delta_monomial(rest, order)
        self._delta_mono[key] = value
        return value

    def extend_coproduct(self, a, leg=0):
        """Delta applied to leg ``leg`` of a (any arity), extended multiplicatively."""
        order = a.alg.order
        return a.map_leg(leg, lambda m: self.delta_monomial(m, order))

    @staticmethod
    def counit(a):
        return a.counit()

    # R-matrix and twist --------------------------------------------------

    def r_matrix(self, order):
        return self.evaluate(self.file.rmatrix, order, where="rmatrix")

    def twist(self, conv, order):
        return self.evaluate(self.file.twist, order, conv, where="twist")

    # classical dictionary ------------------------------------------------

    def classical_tensor(self, x, k=1):
        """hbar^k part of an arity-2 element as a Tensor on g, or None if a leg is not of degree one."""
        g = self.lie
        terms = {}
        for key, c in x.hbar_part(k).items():
            idx = []
            for m in key:
                if sum(m) != 1:
                    return None
                idx.append(g.index(self.generators[m.index(1)]))
            terms[tuple(idx)] = c
        return liealg.Tensor(2, terms)


# ---------------------------------------------------------------- bialgebra


def _check_zero(report, name, x, info=None):
    return report.record(name, x.is_zero(), residual_summary(x), info)


def relation_residual(dp, b, a, order):
    """Delta(x_b x_a) - Delta(normal form of x_b x_a)."""
    alg = dp.algebra(order)
    i, j = alg.index(b), alg.index(a)
    lhs = dp.coproduct(b, order) * dp.coproduct(a, order)
    rhs = alg.zero(2)
    for m, c in alg.rules[(i, j)].items():
        rhs = rhs + dp.delta_monomial(m, order) * c
    return lhs - rhs


def verify_bialgebra(dp, order, degree=2, only=None):
    """Relations under Delta, coassociativity, counit, and Hopf-subalgebra closure.

    ``only`` restricts to a generator subset (e.g. A_PLUS).
    """
    alg = dp.algebra(order)
    gens = dp.generators if only is None else tuple(only)
    report = VerificationReport({"order": order, "degree": degree, "generators": list(gens)})
    for (b, a), _ in dp.file.relations:
        if b in gens and a in gens:
            _check_zero(report, f"relation:{b}*{a}", relation_residual(dp, b, a, order))
    for x in gens:
        d = dp.coproduct(x, order)
        left = dp.extend_coproduct(d, 0)
        right = dp.extend_coproduct(d, 1)
        _check_zero(report, f"coassociativity:{x}", left - right)
        gx = alg.gen(x)
        _check_zero(report, f"counit_left:{x}", d.apply_counit(0) - gx)
        _check_zero(report, f"counit_right:{x}", d.apply_counit(1) - gx)
    for label, sub in (("A_plus", A_PLUS), ("A_minus", A_MINUS)):
        allowed = {alg.index(s) for s in sub}
        for x in sub:
            if x in gens:
                ok = dp.coproduct(x, order).legs_in([allowed, allowed])
                report.record(f"closure:{label}:{x}", ok)
    return report


def counit_is_multiplicative(dp, order, degree):
    """eps(ab) = eps(a) eps(b) on monomial pairs of total degree <= degree."""
    alg = dp.algebra(order)
    monos = alg.monomials_upto(degree)
    for u in monos:
        for m in monos:
            if sum(u) + sum(m) > degree:
                continue
            prod = alg.monomial(u) * alg.monomial(m)
            expected = 1 if not any(u) and not any(m) else 0
            if prod.counit() != alg.series(expected):
                return False, (u, m)
    return True, None


# ---------------------------------------------------------------- quasitriangularity


def classical_limit(dp, order=2):
    """((R - 1)/hbar) mod hbar as a Tensor on g."""
    R = dp.r_matrix(order)
    if any(key != ((dp.algebra(order).unit_mono,) * 2) for key in R.hbar_part(0)):
        raise ValueError("R-matrix is not 1 modulo hbar")
    return dp.classical_tensor(R, 1)


def limit_orientation(dp, rho):
    g = dp.lie
    gp, gm, _ = liealg.standard_subspaces(g, g.field.one)
    r = liealg.r_matrix(g, gp, gm)
    if rho == r:
        return "g_plus_first"
    if rho == r.transpose():
        return "g_minus_first"
    return "neither"


def verify_quasitriangular(dp, order, qybe_order=None, hexagon_order=None):
    qybe_order = order if qybe_order is None else qybe_order
    hexagon_order = order if hexagon_order is None else hexagon_order
    report = VerificationReport({"order": order, "qybe_order": qybe_order, "hexagon_order": hexagon_order})
    R = dp.r_matrix(order)
    Rinv = pbw.series_inverse(R)
    for x in dp.generators:
        d = dp.coproduct(x, order)
        _check_zero(report, f"intertwining:{x}", R * d * Rinv - d.transpose())
    Rh = dp.r_matrix(hexagon_order)
    lhs1 = dp.extend_coproduct(Rh, 0)
    rhs1 = Rh.embed((0, 2), 3) * Rh.embed((1, 2), 3)
    _check_zero(report, "hexagon_left", lhs1 - rhs1)
    lhs2 = dp.extend_coproduct(Rh, 1)
    rhs2 = Rh.embed((0, 2), 3) * Rh.embed((0, 1), 3)
    _check_zero(report, "hexagon_right", lhs2 - rhs2)
    Rq = dp.r_matrix(qybe_order)
    r12, r13, r23 = Rq.embed((0, 1), 3), Rq.embed((0, 2), 3), Rq.embed((1, 2), 3)
    _check_zero(report, "qybe", r12 * r13 * r23 - r23 * r13 * r12)
    rho = classical_limit(dp)
    t = dp.lie.canonical_element()
    report.record("classical_limit_symmetric_part", rho is not None and rho + rho.transpose() == t)
    orient = limit_orientation(dp, rho) if rho is not None else "neither"
    report.record("classical_limit_orientation", orient != "neither", info=orient, informational=True)
    return report


# ---------------------------------------------------------------- twist


def twist_coproduct_and_associator(dp, F, gens=None):
    """(F Delta(x) F^-1 for the generators, Phi = F12 (Delta x id)(F) (F23 (id x Delta)(F))^-1)."""
    order = F.alg.order
    Finv = pbw.series_inverse(F)
    gens = dp.generators if gens is None else gens
    delta_B = {x: F * dp.coproduct(x, order) * Finv for x in gens}
    left = F.embed((0, 1), 3) * dp.extend_coproduct(F, 0)
    right = F.embed((1, 2), 3) * dp.extend_coproduct(F, 1)
    phi = left * pbw.series_inverse(right)
    return delta_B, phi


def in_A0_tensor(F):
    """F in 1 + hbar (A0 (x) A0), A0 the kernel of the counit."""
    alg = F.alg
    unit = alg.unit_mono
    rest = F - alg.one(2)
    return (rest.valuation() or 1) >= 1 and all(unit not in key for key in rest.terms)


# ---------------------------------------------------------------- membership helpers


def ordered_products(alg, gens, degree):
    """Products g0^a0 g1^a1 ... of the given elements, total exponent <= degree."""
    out = []
    k = len(gens)
    for exps in product(range(degree + 1), repeat=k):
        if sum(exps) > degree:
            continue
        x = alg.one()
        for g, a in zip(gens, exps):
            x = x * g**a
        out.append((exps, x))
    out.sort(key=lambda p: (sum(p[0]), tuple(-e for e in p[0])))
    return out


def words(gens, degree):
    """All words of length <= degree in the given elements, as (indices, product)."""
    alg = gens[0].alg
    out = [((), alg.one())]
    layer = out
    for _ in range(degree):
        nxt = []
        for w, x in layer:
            for i, g in enumerate(gens):
                nxt.append((w + (i,), x * g))
        out.extend(nxt)
        layer = nxt
    return out


def legs_split(X, leg):
    """{other-leg monomial: arity-1 element of leg ``leg``} for an arity-2 element."""
    alg = X.alg
    groups = {}
    for key, c in X.terms.items():
        groups.setdefault(key[1 - leg], {})[(key[leg],)] = c
    return {k: pbw.Element(alg, 1, v) for k, v in groups.items()}


def tensor_in_subalgebra(X, span):
    """X in S (x) S where S is the module spanned by ``span``; checked as (S (x) A) meet (A (x) S).

    Returns (ok, first failing (leg, other-leg monomial) or None).
    """
    for leg in (0, 1):
        for other, x in sorted(legs_split(X, leg).items()):
            res = pbw.span_membership(x, span)
            if not res.ok:
                return False, {"leg": leg, "other": format_key(X.alg, (other,))}
    return True, None


# ---------------------------------------------------------------- Manin pair quantization


def flatness_ranks(alg, gens, degree):
    """Per-hbar-layer rank of the ordered products of gens with total exponent <= degree."""
    vecs = [x.terms for _, x in ordered_products(alg, gens, degree)]
    return layer_ranks(vecs, alg.order)


def _binom3(d):
    return (d + 3) * (d + 2) * (d + 1) // 6


def b_span(dp, order, conv, degree):
    alg = dp.algebra(order)
    return [x for _, x in ordered_products(alg, dp.B_generators(order, conv), degree)]


def coproduct_closure(dp, conv, order, extra=2):
    """F Delta(b) F^-1 in B (x) B for the generators b of B."""
    F = dp.twist(conv, order)
    Finv = pbw.series_inverse(F)
    failures = {}
    bgens = dp.B_generators(order, conv)
    for name, b in zip(("h", "E_plus", "E_minus"), bgens):
        X = F * dp.extend_coproduct(b) * Finv
        span = b_span(dp, order, conv, _leg_degree(X) + extra)
        ok, where = tensor_in_subalgebra(X, span)
        if not ok:
            failures[name] = where
    return not failures, failures


def _leg_degree(X):
    return max((max(sum(m) for m in key) for key in X.terms), default=0)


def classical_twist_part(dp, conv, order=1):
    """(F - F21)/hbar mod hbar as a Tensor, or None if not of degree one."""
    F = dp.twist(conv, max(order, 1))
    f = dp.classical_tensor(F, 1)
    return None if f is None else f - f.transpose()


def twist_splitting(dp, conv):
    """Run the classical splitting extraction on s = r - sign * (F - F21)/hbar|_0."""
    g = dp.lie
    beta = dp.beta(conv)
    gp, gm, H = liealg.standard_subspaces(g, beta)
    r = liealg.r_matrix(g, gp, gm)
    if conv.r_orientation == "g_minus_first":
        r = r.transpose()
    anti = classical_twist_part(dp, conv)
    if anti is None:
        return {"ok": False, "failed": ["twist_not_classical"], "L": None}
    s = r - anti if conv.twist_sign == "plus" else r + anti
    out = liealg.extract_lagrangian_splitting(g, s, H)
    return out


def verify_manin_pair_quantization(dp, conv, order, degree):
    report = VerificationReport({"order": order, "degree": degree, "convention": conv.as_dict()})
    alg = dp.algebra(order)
    ranks = flatness_ranks(alg, dp.B_generators(order, conv), degree)
    report.record("flatness", ranks == [_binom3(degree)] * (order + 1), info={"layer_ranks": ranks, "expected": _binom3(degree)})
    ok, failures = coproduct_closure(dp, conv, order)
    report.record("coproduct_closure", ok, residual=failures or None)
    _, phi = twist_coproduct_and_associator(dp, dp.twist(conv, order), gens=())
    report.record("associator_trivial", phi == alg.one(3), residual=residual_summary(phi - alg.one(3)))
    split = twist_splitting(dp, conv)
    info = None
    if split["L"] is not None and split["ok"]:
        gp, gm, _ = liealg.standard_subspaces(dp.lie, dp.beta(conv))
        info = {"L_is_G_minus": split["L"] == gm}
    report.record("splitting", split["ok"], residual=split["failed"] or None, info=info)
    return report


# ---------------------------------------------------------------- Manin quadruple


def intersection_with_A_plus(dp, conv, order, degree):
    """Q-basis of span(B words <= degree) meet span(A+ monomials) over Q[hbar]/hbar^(N+1).

    Returns (elements of the intersection, whether it equals the span of hbar^j h^k, k <= degree).
    """
    alg = dp.algebra(order)
    bw = [x for _, x in ordered_products(alg, dp.B_generators(order, conv), degree)]
    idx = [alg.index(s) for s in A_PLUS]
    plus = alg.monomials_upto(degree + 2 * order, among=idx)
    ech = Echelon()
    vectors = {}
    for i, x in enumerate(bw):
        flat = flatten_series(x.terms)
        for j in range(order + 1):
            v = shifted(flat, j, order)
            vectors[("B", i, j)] = v
            ech.add(v, label=("B", i, j))
    for m in plus:
        flat = flatten_series({(m,): TruncSeries.constant(1, order, dp.field)})
        for j in range(order + 1):
            ech.add(shifted(flat, j, order), label=("P", m, j))
    inter = Echelon(track=False)
    for rel in ech.relations:
        vec = {}
        for label, c in rel.items():
            if label[0] == "B":
                _add(vec, vectors[label], c)
        if vec:
            inter.add(vec)
    hpow = Echelon(track=False)
    h = alg.index("h")
    for k in range(degree + 1):
        m = tuple(k if i == h else 0 for i in range(alg.n))
        flat = flatten_series({(m,): TruncSeries.constant(1, order, dp.field)})
        for j in range(order + 1):
            hpow.add(shifted(flat, j, order))
    equal = inter.rank == hpow.rank and all(hpow.contains(row) for row, _ in inter.rows.values())
    basis = _leading_monomials(alg, inter)
    return basis, equal


def _add(target, vec, c):
    for k, v in vec.items():
        new = target.get(k, 0) + c * v
        if new:
            target[k] = new
        else:
            target.pop(k, None)


def _leading_monomials(alg, ech):
    """hbar^0 leading monomials of the echelon rows, as readable words."""
    out = []
    for (k, key), _ in sorted(ech.rows.items()):
        if k == 0:
            out.append(format_key(alg, key))
    return out


def twist_inverse_membership(dp, conv, order, degree=None):
    """F^-1 in ((AB0 + A+) (x) A + A (x) AB0) meet (AB0 (x) A + A (x) (AB0 + A+)).

    Both legs are reduced modulo the left ideal A B0; the condition says the
    first-leg (resp. second-leg) components of the reduced tensor lie in the
    image R of A+.
    """
    from .starprod import CosetDecomposition

    F = dp.twist(conv, order)
    Finv = pbw.series_inverse(F)
    cd = CosetDecomposition(dp.algebra(order), dp.beta(conv))
    red = cd.reduce_tensor(Finv)
    top = max((sum(m) for key in red for m in key), default=0)
    R = cd.plus_image(top + order)
    field = dp.field
    for leg in (0, 1):
        groups = {}
        for key, c in red.items():
            groups.setdefault(key[1 - leg], {})[key[leg]] = c
        for other, vec in sorted(groups.items()):
            flat = flatten_series(vec)
            if not R.contains(flat):
                return False, {"leg": leg, "other": str(other)}
    return True, None


def verify_quadruple_quantization(dp, conv, order, degree):
    report = VerificationReport({"order": order, "degree": degree, "convention": conv.as_dict()})
    alg = dp.algebra(order)
    plus = [alg.gen(s) for s in A_PLUS]
    ranks = flatness_ranks(alg, plus, degree)
    report.record("flatness", ranks == [_binom3(degree)] * (order + 1), info={"layer_ranks": ranks})
    basis, equal = intersection_with_A_plus(dp, conv, order, degree)
    report.record("intersection_A_plus", equal, info={"leading": basis})
    ok, where = twist_inverse_membership(dp, conv, order)
    report.record("twist_inverse_membership", ok, residual=where)
    return report


# ---------------------------------------------------------------- convention sweep

SWEEP_COLUMNS = ("cocycle", "closure", "splitting", "twist_inverse")


def convention_sweep(dp, order, degree):
    """Rows {convention label: {column: bool}} for all 16 conventions, in a fixed order.

    Each column only depends on some of the toggles, so values are shared.
    """
    cache = {}
    rows = {}
    for conv in all_conventions():
        row = {}
        k = ("cocycle", conv.psi_exponent)
        if k not in cache:
            _, phi = twist_coproduct_and_associator(dp, dp.twist(conv, order), gens=())
            cache[k] = phi == dp.algebra(order).one(3)
        row["cocycle"] = cache[k]
        k = ("closure", conv.psi_exponent, conv.beta)
        if k not in cache:
            cache[k] = coproduct_closure(dp, conv, order)[0]
        row["closure"] = cache[k]
        k = ("splitting", conv)
        if k not in cache:
            cache[k] = twist_splitting(dp, conv)["ok"]
        row["splitting"] = cache[k]
        k = ("twist_inverse", conv.psi_exponent, conv.beta)
        if k not in cache:
            cache[k] = twist_inverse_membership(dp, conv, order, degree)[0]
        row["twist_inverse"] = cache[k]
        rows[conv.label()] = row
    return rows


def load_default(t="2"):
    return DoublePresentation.from_file(SHIPPED, t)


__all__ = [
    "A_MINUS",
    "A_PLUS",
    "CONSISTENT",
    "PRINTED",
    "ConventionConfig",
    "DoublePresentation",
    "VerificationReport",
    "all_conventions",
    "classical_limit",
    "convention_sweep",
    "counit_is_multiplicative",
    "twist_inverse_membership",
    "intersection_with_A_plus",
    "load_default",
    "twist_splitting",
    "twist_coproduct_and_associator",
    "verify_bialgebra",
    "verify_manin_pair_quantization",
    "verify_quadruple_quantization",
    "verify_quasitriangular",
]
