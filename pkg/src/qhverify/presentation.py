"""Presentation files: a JSON container of expressions in a small grammar.

Grammar, loosest binding first::

    expr   := tensor (('+' | '-') tensor)*
    tensor := term ('@' term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] atom)?
    atom   := INT | NAME | NAME '(' expr ')' | '(' expr ')'

``q^X`` means exp(hbar*X) for any X; any other base takes a nonnegative
integer exponent. ``/`` divides by a scalar series. ``@`` is the tensor
product. Names are generators, the scalars ``hbar``, ``q``, ``t``,
``beta``, ``psi``, or the functions ``inverse``, ``exp``, ``expq2``.
"""

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import pbw
from .series import BaseField, NotInvertible, TruncSeries

SCALARS = ("hbar", "q", "t", "beta", "psi")
FUNCTIONS = ("inverse", "exp", "expq2")


class PresentationError(ValueError):
    """Syntax or semantic error, with the location inside the file."""

    def __init__(self, where, message):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: int
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Name:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / @
    left: object
    right: object
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    arg: object
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class QPow:
    """q^X, i.e. exp(hbar*X)."""

    exponent: object
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object
    pos: int = field(default=0, compare=False)


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.)")


def tokenize(text):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m.group(1):
            tokens.append(("int", m.group(1), pos))
        elif m.group(2):
            tokens.append(("name", m.group(2), pos))
        else:
            ch = m.group(3)
            if ch not in "+-*/@^()":
                raise PresentationError(f"col {pos + 1}", f"unexpected character {ch!r}")
            tokens.append(("op", ch, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.names = names

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, tok, message):
        raise PresentationError(f"col {tok[2] + 1}", message)

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] == "end":
            self.error(tok, f"expected {value!r}, found {tok[1] or 'end of input'!r}")

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.error(tok, f"unexpected {tok[1]!r}")
        return node

    def expr(self):
        node = self.tensor()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            tok = self.take()
            node = BinOp(tok[1], node, self.tensor(), tok[2])
        return node

    def tensor(self):
        node = self.term()
        while self.peek()[:2] == ("op", "@"):
            tok = self.take()
            node = BinOp("@", node, self.term(), tok[2])
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            tok = self.take()
            node = BinOp(tok[1], node, self.unary(), tok[2])
        return node

    def unary(self):
        tok = self.peek()
        if tok[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary(), tok[2])
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[:2] != ("op", "^"):
            return base
        self.take()
        neg = self.peek()
        if neg[:2] == ("op", "-"):
            self.take()
            exponent = Neg(self.atom(), neg[2])
        else:
            exponent = self.atom()
        if isinstance(base, Name) and base.name == "q":
            return QPow(exponent, base.pos)
        if not isinstance(exponent, Num):
            self.error(tok, "exponent must be a nonnegative integer (only q takes general exponents)")
        return Pow(base, exponent.value, tok[2])

    def atom(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "int":
            return Num(int(value), pos)
        if kind == "name":
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg, pos)
            if value not in self.names and value not in SCALARS:
                self.error(tok, f"unknown name {value!r}")
            return Name(value, pos)
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.error(tok, f"unexpected {value or 'end of input'!r}")


def parse_expression(text, generators=()):
    return _Parser(text, set(generators)).parse()


def serialize(node):
    """Canonical, fully parenthesised text; parse(serialize(x)) == x."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, BinOp):
        return f"({serialize(node.left)} {node.op} {serialize(node.right)})"
    if isinstance(node, Neg):
        return f"(-{serialize(node.arg)})"
    if isinstance(node, Pow):
        return f"({serialize(node.base)}^{node.exponent})"
    if isinstance(node, QPow):
        inner = node.exponent
        if isinstance(inner, Neg):
            return f"(q^-{_atomic(inner.arg)})"
        return f"(q^{_atomic(inner)})"
    if isinstance(node, Call):
        return f"{node.fn}({serialize(node.arg)})"
    raise TypeError(node)


def _atomic(node):
    s = serialize(node)
    return s if s.startswith("(") or isinstance(node, (Num, Name, Call)) else f"({s})"


# ---------------------------------------------------------------- file


@dataclass(frozen=True)
class PresentationFile:
    """Structured content of a presentation file (expressions as ASTs)."""

    field_kind: str
    t: str
    order: int
    generators: tuple
    relations: tuple  # ((b, a), rhs) with generator names, b after a
    coproduct: tuple  # (generator, expr)
    coproduct_exp: tuple  # (generator, expr for Delta(q^X))
    rmatrix: object
    twist: object
    subalgebras: tuple  # (name, (expr, ...))

    def to_json(self):
        return {
            "field": {"kind": self.field_kind, "t": self.t},
            "order": self.order,
            "generators": list(self.generators),
            "relations": [
                {"lhs": f"{b}*{a}", "rhs": serialize(rhs)} for (b, a), rhs in self.relations
            ],
            "coproduct": {g: serialize(e) for g, e in self.coproduct},
            "coproduct_exp": {g: serialize(e) for g, e in self.coproduct_exp},
            "rmatrix": serialize(self.rmatrix),
            "twist": serialize(self.twist),
            "subalgebras": {k: [serialize(e) for e in v] for k, v in self.subalgebras},
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def _expr(text, where, gens):
    if not isinstance(text, str):
        raise PresentationError(where, "expected an expression string")
    try:
        return parse_expression(text, gens)
    except PresentationError as exc:
        raise PresentationError(f"{where}: {exc.where}", str(exc).split(": ", 1)[1]) from None


def load_json(data):
    """Validate a decoded presentation document and parse its expressions."""
    try:
        gens = tuple(data["generators"])
        fld = data.get("field", {"kind": "rationals"})
        order = int(data.get("order", 3))
        rel_list = data["relations"]
    except (KeyError, TypeError) as exc:
        raise PresentationError("", f"missing or malformed top-level entry {exc}") from None
    if len(set(gens)) != len(gens):
        raise PresentationError("generators", "duplicate generator names")
    clash = [g for g in gens if g in SCALARS or g in FUNCTIONS]
    if clash:
        raise PresentationError("generators", f"reserved names used as generators: {clash}")
    index = {g: i for i, g in enumerate(gens)}
    relations = {}
    for k, rel in enumerate(rel_list):
        where = f"relations[{k}]"
        parts = str(rel.get("lhs", "")).replace(" ", "").split("*")
        if len(parts) != 2:
            raise PresentationError(f"{where}.lhs", "expected a product of two generators")
        b, a = parts
        for g in parts:
            if g not in index:
                raise PresentationError(f"{where}.lhs", f"unknown generator {g!r}")
        if index[b] <= index[a]:
            raise PresentationError(f"{where}.lhs", f"pair ({b}, {a}) is already ordered")
        if (b, a) in relations:
            raise PresentationError(f"{where}.lhs", f"duplicate rule for pair ({b}, {a})")
        relations[(b, a)] = _expr(rel.get("rhs"), f"{where}.rhs", gens)
    missing = [
        (gens[j], gens[i]) for j in range(len(gens)) for i in range(j) if (gens[j], gens[i]) not in relations
    ]
    if missing:
        pairs = ", ".join(f"({b}, {a})" for b, a in missing)
        raise PresentationError("relations", f"missing rule for pair {pairs}")
    ordered_rel = tuple(sorted(relations.items(), key=lambda kv: (index[kv[0][0]], index[kv[0][1]])))

    def gen_map(key):
        out = []
        for g, text in sorted(data.get(key, {}).items(), key=lambda kv: index.get(kv[0], -1)):
            if g not in index:
                raise PresentationError(f"{key}.{g}", f"unknown generator {g!r}")
            out.append((g, _expr(text, f"{key}.{g}", gens)))
        return tuple(out)

    coproduct = gen_map("coproduct")
    coproduct_exp = gen_map("coproduct_exp")
    covered = {g for g, _ in coproduct} | {g for g, _ in coproduct_exp}
    if coproduct and covered != set(gens):
        raise PresentationError("coproduct", f"no image for {sorted(set(gens) - covered)}")
    subalgebras = tuple(
        (name, tuple(_expr(e, f"subalgebras.{name}[{i}]", gens) for i, e in enumerate(items)))
        for name, items in sorted(data.get("subalgebras", {}).items())
    )
    rmatrix = _expr(data["rmatrix"], "rmatrix", gens) if "rmatrix" in data else None
    twist = _expr(data["twist"], "twist", gens) if "twist" in data else None
    kind = fld.get("kind", "rationals")
    if kind not in BaseField.KINDS:
        raise PresentationError("field.kind", f"unknown field kind {kind!r}")
    return PresentationFile(
        field_kind=kind,
        t=str(fld.get("t", "")),
        order=order,
        generators=gens,
        relations=ordered_rel,
        coproduct=coproduct,
        coproduct_exp=coproduct_exp,
        rmatrix=rmatrix,
        twist=twist,
        subalgebras=subalgebras,
    )


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PresentationError(f"line {exc.lineno} col {exc.colno}", exc.msg) from None
    return load_json(data)


def load(path):
    return loads(Path(path).read_text())


SHIPPED = Path(__file__).with_name("data") / "double_sl2.json"


# ---------------------------------------------------------------- evaluation


class Evaluator:
    """Evaluates expression trees to pbw Elements.

    ``algebra(order)`` must return the Presentation to compute in at that
    order; division by a scalar of hbar-valuation k evaluates the numerator
    at order + k. ``params`` supplies the field values of t, beta and psi.
    """

    MAX_VALUATION = 8

    def __init__(self, algebra, field, params):
        self.algebra = algebra
        self.field = field
        self.params = dict(params)
        self._memo = {}

    def __call__(self, node, order, where=""):
        try:
            return self.eval(node, order)
        except NotInvertible as exc:
            col = getattr(exc, "col", None)
            loc = f"{where}: col {col}" if col is not None else where
            raise NotInvertible(f"{loc}: {exc}") from None

    def eval(self, node, order):
        key = (node, order)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._eval(node, order)
            self._memo[key] = hit
        return hit

    def _scalar(self, value, order):
        return self.algebra(order).scalar(value)

    def _eval(self, node, order):
        alg = self.algebra(order)
        if isinstance(node, Num):
            return alg.scalar(node.value)
        if isinstance(node, Name):
            n = node.name
            if n == "hbar":
                return alg.scalar(TruncSeries.hbar(order, self.field))
            if n == "q":
                return alg.scalar(TruncSeries.q_power(1, order, self.field))
            if n in SCALARS:
                if n not in self.params:
                    raise PresentationError(f"col {node.pos + 1}", f"no value bound for {n!r}")
                return alg.scalar(self.params[n])
            return alg.gen(n)
        if isinstance(node, Neg):
            return -self.eval(node.arg, order)
        if isinstance(node, Pow):
            return self.eval(node.base, order) ** node.exponent
        if isinstance(node, QPow):
            x = self.eval(node.exponent, order)
            return pbw.exp(x * TruncSeries.hbar(order, self.field))
        if isinstance(node, Call):
            x = self.eval(node.arg, order)
            try:
                if node.fn == "inverse":
                    return pbw.series_inverse(x)
                if node.fn == "exp":
                    return pbw.exp(x)
                return pbw.exp_q2(x)
            except (NotInvertible, pbw.NotTopologicallyNilpotent) as exc:
                exc.col = node.pos + 1
                raise
        op = node.op
        if op == "/":
            return self._divide(node, order)
        left = self.eval(node.left, order)
        right = self.eval(node.right, order)
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        return left @ right

    def _divide(self, node, order):
        den = self.eval(node.right, order)
        if not den.is_scalar():
            raise PresentationError(f"col {node.pos + 1}", "division by a non-scalar")
        k = den.scalar_part().valuation()
        # the divisor may vanish to the working order; look further out for its valuation
        extra = 0
        while k is None and extra < self.MAX_VALUATION:
            extra += 1
            k = self.eval(node.right, order + extra).scalar_part().valuation()
        if k is None:
            raise NotInvertible(f"col {node.pos + 1}: division by zero")
        if k == 0:
            return self.eval(node.left, order) * den.scalar_part().invert()
        num = self.eval(node.left, order + k)
        d = self.eval(node.right, order + k).scalar_part().shift_down(k)
        try:
            num = num.divide_hbar(k, self.algebra(order))
        except ArithmeticError:
            raise NotInvertible(
                f"col {node.pos + 1}: numerator not divisible by hbar^{k}"
            ) from None
        return num * d.invert()


def rule_table(pfile, field, order, params, algebra_at):
    """Evaluate the ordered rules at the given order.

    Right-hand sides are computed in an algebra without rewrite rules, so
    any out-of-order product in them is reported as an error.
    """
    gens = pfile.generators
    free = {}

    def free_alg(n):
        if n not in free:
            free[n] = pbw.Presentation(gens, {}, field, n, check_growth=False)
        return free[n]

    ev = Evaluator(free_alg, field, params)
    index = {g: i for i, g in enumerate(gens)}
    rules = {}
    for (b, a), rhs in pfile.relations:
        try:
            value = ev(rhs, order, where=f"rule {b}*{a}")
        except pbw.RewriteError as exc:
            raise PresentationError(f"rule {b}*{a}", f"right-hand side is not in normal form ({exc})") from None
        rules[(index[b], index[a])] = {k[0]: c for k, c in value.terms.items()}
    return rules
