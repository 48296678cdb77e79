"""Finite-dimensional Lie algebras with an invariant form: Manin triples and
quadruples, r-matrices, twist data and Drinfeld's bivector on G+/(G+ n V).

Vectors are tuples of field elements in the basis of the algebra. Tensors
are sparse dicts from index tuples to coefficients.
"""

from dataclasses import dataclass, field
from itertools import permutations, product

from .linalg import Echelon, rref, solve_dense
from .series import QQ


class SingularPairing(ValueError):
    pass


class NotComplement(ValueError):
    pass


class NotLagrangian(ValueError):
    pass


class InconsistentV(ValueError):
    pass


class Tensor:
    """Element of g^{(x)k} as {index tuple: coefficient}."""

    __slots__ = ("rank", "terms")

    def __init__(self, rank, terms=None):
        self.rank = rank
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def from_vectors(cls, *vectors):
        """Pure tensor v1 (x) v2 (x) ... of coordinate vectors."""
        terms = {}
        nz = [[(i, c) for i, c in enumerate(v) if c] for v in vectors]
        for combo in product(*nz):
            coef = 1
            for _, c in combo:
                coef = coef * c
            key = tuple(i for i, _ in combo)
            terms[key] = terms.get(key, 0) + coef
        return cls(len(vectors), terms)

    def __add__(self, other):
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return Tensor(self.rank, terms)

    def __neg__(self):
        return Tensor(self.rank, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return Tensor(self.rank, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def permute(self, perm):
        """Leg j of the result is leg perm[j] of self."""
        return Tensor(self.rank, {tuple(k[p] for p in perm): v for k, v in self.terms.items()})

    def transpose(self):
        return self.permute((1, 0))

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Tensor) and self.rank == other.rank and (self - other).is_zero()

    def __repr__(self):
        return f"Tensor({self.rank}, {self.terms})"


@dataclass
class LieAlgebraData:
    labels: tuple
    brackets: dict  # (i, j) -> coordinate tuple of [x_i, x_j]
    form: tuple  # dim x dim symmetric matrix
    field: object = QQ

    @property
    def dim(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)

    def basis_vector(self, i):
        z, o = self.field.zero, self.field.one
        return tuple(o if j == i else z for j in range(self.dim))

    def vec(self, **coords):
        v = [self.field.zero] * self.dim
        for label, c in coords.items():
            v[self.index(label)] = self.field.convert(c) if isinstance(c, (int, str)) else c
        return tuple(v)

    def bracket(self, x, y):
        out = [self.field.zero] * self.dim
        for i, a in enumerate(x):
            if not a:
                continue
            for j, b in enumerate(y):
                if not b:
                    continue
                for k, c in enumerate(self.brackets[(i, j)]):
                    if c:
                        out[k] += a * b * c
        return tuple(out)

    def pair(self, x, y):
        total = self.field.zero
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    if b and self.form[i][j]:
                        total += a * b * self.form[i][j]
        return total

    def ad(self, x):
        """Matrix of ad_x acting on basis vectors: column j is [x, e_j]."""
        return [self.bracket(x, self.basis_vector(j)) for j in range(self.dim)]

    def check_axioms(self):
        """Antisymmetry, Jacobi, symmetry/nondegeneracy/invariance of the form."""
        n = self.dim
        e = [self.basis_vector(i) for i in range(n)]
        zero = tuple([self.field.zero] * n)
        report = {"antisymmetry": True, "jacobi": True, "symmetric": True, "invariant": True}
        for i, j in product(range(n), repeat=2):
            if tuple(a + b for a, b in zip(self.bracket(e[i], e[j]), self.bracket(e[j], e[i]))) != zero:
                report["antisymmetry"] = False
            if self.form[i][j] != self.form[j][i]:
                report["symmetric"] = False
        for i, j, k in product(range(n), repeat=3):
            a = self.bracket(e[i], self.bracket(e[j], e[k]))
            b = self.bracket(e[j], self.bracket(e[k], e[i]))
            c = self.bracket(e[k], self.bracket(e[i], e[j]))
            if tuple(x + y + z for x, y, z in zip(a, b, c)) != zero:
                report["jacobi"] = False
            if self.pair(self.bracket(e[i], e[j]), e[k]) + self.pair(e[j], self.bracket(e[i], e[k])):
                report["invariant"] = False
        report["nondegenerate"] = len(rref(self.form, n)) == n
        return report

    def canonical_element(self):
        """t = sum x_i (x) x^i for dual bases under the form (inverse form matrix)."""
        n = self.dim
        terms = {}
        for j in range(n):
            rhs = [self.field.one if i == j else self.field.zero for i in range(n)]
            col = solve_dense(self.form, rhs)
            for i, c in enumerate(col):
                if c:
                    terms[(i, j)] = c
        return Tensor(2, terms)


class Subspace:
    """Subspace of field^n stored by its reduced row echelon basis."""

    def __init__(self, vectors, dim, field=QQ):
        self.ambient = dim
        self.field = field
        self.basis = rref([tuple(v) for v in vectors], dim)

    @property
    def dim(self):
        return len(self.basis)

    def contains(self, v):
        return len(rref(self.basis + (tuple(v),), self.ambient)) == self.dim

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def __add__(self, other):
        return Subspace(self.basis + other.basis, self.ambient, self.field)

    def intersect(self, other):
        # vectors sum a_i u_i = sum b_j w_j via relations of the joint family
        ech = Echelon()
        for i, u in enumerate(self.basis):
            ech.add(dict(enumerate(u)), label=("u", i))
        out = []
        for j, w in enumerate(other.basis):
            before = len(ech.relations)
            ech.add(dict(enumerate(w)), label=("w", j))
            if len(ech.relations) > before:
                combo = ech.relations[-1]
                v = [self.field.zero] * self.ambient
                for (kind, idx), c in combo.items():
                    if kind == "w":
                        for k, x in enumerate(other.basis[idx]):
                            v[k] += c * x
                out.append(v)
        return Subspace(out, self.ambient, self.field)

    def coordinates(self, v):
        """Coefficients of v on self.basis (the rref basis); None if v is outside."""
        ech = Echelon()
        for i, u in enumerate(self.basis):
            ech.add({k: x for k, x in enumerate(u) if x}, label=i)
        sol = ech.solve({k: x for k, x in enumerate(v) if x})
        if sol is None:
            return None
        return [sol.get(i, self.field.zero) for i in range(self.dim)]

    def __repr__(self):
        return f"Subspace(dim={self.dim}, basis={self.basis})"


def is_subalgebra(g, S):
    return all(S.contains(g.bracket(u, v)) for u in S.basis for v in S.basis)


def is_isotropic(g, S):
    return all(not g.pair(u, v) for u in S.basis for v in S.basis)


def is_lagrangian(g, S):
    return 2 * S.dim == g.dim and is_isotropic(g, S)


def _sl2():
    """Chevalley basis (e, h, f) of sl2 with [h, e] = 2e, [h, f] = -2f, [e, f] = h."""
    table = {
        (0, 1): (-2, 0, 0),
        (0, 2): (0, 1, 0),
        (1, 2): (0, 0, -2),
    }
    br = {}
    for i, j in product(range(3), repeat=2):
        if (i, j) in table:
            br[(i, j)] = table[(i, j)]
        elif (j, i) in table:
            br[(i, j)] = tuple(-x for x in table[(j, i)])
        else:
            br[(i, j)] = (0, 0, 0)
    return br


def invariant_forms(brackets, n, field=QQ):
    """Basis of the space of symmetric ad-invariant bilinear forms, as n x n matrices."""
    unknowns = [(i, j) for i in range(n) for j in range(i, n)]
    pos = {u: k for k, u in enumerate(unknowns)}

    def var(i, j):
        return pos[(min(i, j), max(i, j))]

    equations = []
    for x, y, z in product(range(n), repeat=3):
        # <[x,y],z> + <y,[x,z]> = 0
        row = [field.zero] * len(unknowns)
        for k, c in enumerate(brackets[(x, y)]):
            if c:
                row[var(k, z)] += field.convert(c)
        for k, c in enumerate(brackets[(x, z)]):
            if c:
                row[var(y, k)] += field.convert(c)
        if any(row):
            equations.append(row)
    reduced = rref(equations, len(unknowns))
    pivots = [next(i for i, x in enumerate(r) if x) for r in reduced]
    free = [k for k in range(len(unknowns)) if k not in pivots]
    forms = []
    for f in free:
        sol = [field.zero] * len(unknowns)
        sol[f] = field.one
        for r, p in zip(reduced, pivots):
            sol[p] = -r[f]
        mat = [[field.zero] * n for _ in range(n)]
        for (i, j), k in pos.items():
            mat[i][j] = mat[j][i] = sol[k]
        forms.append(mat)
    return forms


DOUBLE_LABELS = ("e_plus", "h", "e_minus", "e_plus_star", "h_star", "e_minus_star")


def build_double_sl2(field=QQ):
    """g = sl2 x sl2 with <(x,y),(x',y')> = <x,x'> - <y,y'> and <h,h> = 1 on sl2.

    Basis (e+, h, e-, e+*, h*, e-*) with x = (x, x), e+* = (e, 0),
    h* = (h, -h), e-* = (0, f).
    """
    F = field.convert
    sl2 = _sl2()
    forms = invariant_forms(sl2, 3, field)
    assert len(forms) == 1, "sl2 carries a unique invariant form up to scale"
    form_bar = forms[0]
    scale = form_bar[1][1]
    form_bar = [[x / scale for x in row] for row in form_bar]

    # coordinates in sl2 x sl2 = (e, h, f | e', h', f')
    one, zero = F(1), F(0)
    embed = [
        (one, zero, zero, one, zero, zero),  # e+
        (zero, one, zero, zero, one, zero),  # h
        (zero, zero, one, zero, zero, one),  # e-
        (one, zero, zero, zero, zero, zero),  # e+*
        (zero, one, zero, zero, -one, zero),  # h*
        (zero, zero, zero, zero, zero, one),  # e-*
    ]

    def br6(u, v):
        out = [zero] * 6
        for half in (0, 3):
            for i in range(3):
                for j in range(3):
                    c = u[half + i] * v[half + j]
                    if c:
                        for k, s in enumerate(sl2[(i, j)]):
                            if s:
                                out[half + k] += c * F(s)
        return out

    def form6(u, v):
        total = zero
        for i in range(3):
            for j in range(3):
                total += form_bar[i][j] * (u[i] * v[j] - u[3 + i] * v[3 + j])
        return total

    # express sl2 x sl2 vectors in the new basis: solve embed^T c = w
    transposed = [[embed[j][i] for j in range(6)] for i in range(6)]
    brackets = {}
    for i, j in product(range(6), repeat=2):
        w = br6(embed[i], embed[j])
        brackets[(i, j)] = tuple(solve_dense(transposed, w))
    form = tuple(tuple(form6(embed[i], embed[j]) for j in range(6)) for i in range(6))
    return LieAlgebraData(DOUBLE_LABELS, brackets, form, field)


def standard_subspaces(g, beta):
    """G+, G-, and H = span(h, e+ + beta e+*, e- + beta e-*) for the double of sl2."""
    gp = Subspace([g.vec(e_plus=1), g.vec(h=1), g.vec(e_minus=1)], g.dim, g.field)
    gm = Subspace([g.vec(e_plus_star=1), g.vec(h_star=1), g.vec(e_minus_star=1)], g.dim, g.field)
    h = Subspace(
        [g.vec(h=1), g.vec(e_plus=1, e_plus_star=beta), g.vec(e_minus=1, e_minus_star=beta)],
        g.dim,
        g.field,
    )
    return gp, gm, h


@dataclass
class QuadrupleReport:
    subalgebra: dict
    lagrangian: dict
    direct_sum: bool
    graded: bool
    valid: bool = field(init=False)

    def __post_init__(self):
        self.valid = all(self.subalgebra.values()) and all(self.lagrangian.values()) and self.direct_sum


def check_manin_quadruple(g, P, M, H):
    names = {"P": P, "M": M, "H": H}
    sub = {k: is_subalgebra(g, S) for k, S in names.items()}
    lag = {k: is_lagrangian(g, S) for k, S in names.items()}
    direct = (P + M).dim == g.dim and P.intersect(M).dim == 0
    graded = (H.intersect(P) + H.intersect(M)) == H
    return QuadrupleReport(sub, lag, direct, graded)


def dual_bases(g, P, M):
    """Bases (e^i) of P and (e_i) of M with <e^i, e_j> = delta_ij (M's basis is its rref basis)."""
    n = P.dim
    lower = list(M.basis)
    # e^i = sum_k a_ik p_k with sum_k a_ik <p_k, m_j> = delta_ij
    pairing = [[g.pair(p, m) for p in P.basis] for m in lower]  # rows j, cols k
    upper = []
    for i in range(n):
        rhs = [g.field.one if j == i else g.field.zero for j in range(n)]
        a = solve_dense(pairing, rhs)
        if a is None:
            raise SingularPairing("pairing between the two subspaces is singular")
        v = [g.field.zero] * g.dim
        for k, p in enumerate(P.basis):
            for idx, x in enumerate(p):
                v[idx] += a[k] * x
        upper.append(tuple(v))
    return upper, lower


def r_from_dual(upper, lower):
    r = Tensor(2)
    for u, l in zip(upper, lower):
        r = r + Tensor.from_vectors(u, l)
    return r


def r_matrix(g, P, M):
    """r = sum_i e^i (x) e_i, first legs in P."""
    return r_from_dual(*dual_bases(g, P, M))


def cybe_residual(g, r):
    """[r12, r13] + [r12, r23] + [r13, r23] as a rank-3 tensor."""
    e = [g.basis_vector(i) for i in range(g.dim)]
    out = Tensor(3)
    items = list(r.terms.items())
    for (a, b), c in items:
        for (x, y), d in items:
            cd = c * d
            out = out + Tensor.from_vectors(g.bracket(e[a], e[x]), e[b], e[y]) * cd
            out = out + Tensor.from_vectors(e[a], g.bracket(e[b], e[x]), e[y]) * cd
            out = out + Tensor.from_vectors(e[a], e[x], g.bracket(e[b], e[y])) * cd
    return out


@dataclass
class ClassicalTwistData:
    r_HL: Tensor
    f_HL: Tensor
    phi_HL: dict  # (i, j, k) over the L basis -> <p_H([l_i, l_j]), l_k>
    L_basis: list


def _project_along(g, H, L, v):
    """Component of v in H for g = H (+) L."""
    basis = list(H.basis) + list(L.basis)
    mat = [[b[i] for b in basis] for i in range(g.dim)]
    coeffs = solve_dense(mat, list(v))
    out = [g.field.zero] * g.dim
    for c, b in zip(coeffs[: H.dim], H.basis):
        for i, x in enumerate(b):
            out[i] += c * x
    return tuple(out)


def classical_twist_data(g, H, L, r):
    if not is_lagrangian(g, H) or not is_lagrangian(g, L):
        raise NotLagrangian("H and L must both be Lagrangian")
    if (H + L).dim != g.dim:
        raise NotComplement("L is not a complement of H")
    upper, lower = dual_bases(g, H, L)
    r_HL = r_from_dual(upper, lower)
    phi = {}
    for i, j, k in product(range(L.dim), repeat=3):
        v = _project_along(g, H, L, g.bracket(lower[i], lower[j]))
        val = g.pair(v, lower[k])
        if val:
            phi[(i, j, k)] = val
    return ClassicalTwistData(r_HL, r_HL - r, phi, lower)


def is_totally_antisymmetric(phi, n):
    for idx in product(range(n), repeat=3):
        v = phi.get(idx, 0)
        for perm in permutations(range(3)):
            sign = _perm_sign(perm)
            if phi.get(tuple(idx[p] for p in perm), 0) != sign * v:
                return False
    return True


def _perm_sign(perm):
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def cocycle_image(g, x, rho):
    """(ad_x (x) id + id (x) ad_x)(rho)."""
    e = [g.basis_vector(i) for i in range(g.dim)]
    out = Tensor(2)
    for (a, b), c in rho.terms.items():
        out = out + Tensor.from_vectors(g.bracket(x, e[a]), e[b]) * c
        out = out + Tensor.from_vectors(e[a], g.bracket(x, e[b])) * c
    return out


def tensor_in(g, T, subspaces):
    """Membership of a rank-k tensor in S_1 (x) ... (x) S_k."""
    if T.rank == 2:
        A, B = subspaces
        # columns over the second leg must lie in A, rows over the first in B
        for fixed in range(g.dim):
            col = [T.terms.get((i, fixed), g.field.zero) for i in range(g.dim)]
            row = [T.terms.get((fixed, j), g.field.zero) for j in range(g.dim)]
            if any(col) and not A.contains(col):
                return False
            if any(row) and not B.contains(row):
                return False
        return True
    raise NotImplementedError("only rank 2")


def pair_tensor(g, T, vectors):
    """<T, v1 (x) ... (x) vk> with the tensor power of the form."""
    total = g.field.zero
    for key, c in T.terms.items():
        term = c
        for leg, i in enumerate(key):
            term = term * g.pair(g.basis_vector(i), vectors[leg])
            if not term:
                break
        total += term
    return total


def in_H_g_plus_g_H(g, T, H):
    """T in H (x) g + g (x) H, for H Lagrangian: its annihilator is H (x) H."""
    return all(not pair_tensor(g, T, (u, w)) for u in H.basis for w in H.basis)


def drinfeld_bivector(g, V, P, M):
    """xi_V in (P/(P n V))^{(x)2}, written with representatives in a complement Q of P n V in P.

    Returns (xi, Q_basis) with xi a rank-2 Tensor in g-coordinates. The first
    leg is contracted against a_- in (P n V)^perp n M.
    """
    PV = P.intersect(V)
    # complement Q: P basis vectors extending an echelon basis of P n V
    q_basis = []
    current = PV
    for p in P.basis:
        if not current.contains(p):
            q_basis.append(p)
            current = current + Subspace([p], g.dim, g.field)
    if not q_basis:
        return Tensor(2), []
    # (P n V)^perp n M
    perp_rows = [[g.pair(g.basis_vector(i), w) for i in range(g.dim)] for w in PV.basis]
    ann = _nullspace(perp_rows, g.dim, g.field)
    A = Subspace(ann, g.dim, g.field).intersect(M) if ann else Subspace([], g.dim, g.field)
    a_minus = list(A.basis)
    if len(a_minus) != len(q_basis):
        raise InconsistentV("annihilator has the wrong dimension; V is not Lagrangian")

    def q_coords(v):
        # coordinates of the class of v in P/(P n V) on q_basis
        basis = list(PV.basis) + q_basis
        mat = [[b[i] for b in basis] for i in range(g.dim)]
        ech = Echelon()
        for k, b in enumerate(basis):
            ech.add({i: x for i, x in enumerate(b) if x}, label=k)
        sol = ech.solve({i: x for i, x in enumerate(v) if x})
        if sol is None:
            raise InconsistentV("vector outside P")
        return [sol.get(len(PV.basis) + k, g.field.zero) for k in range(len(q_basis))]

    # xibar(a_-) = class of a_+ with a_+ + a_- in V
    images = []
    for am in a_minus:
        # a_+ in P with a_+ + a_- in V: solve sum c_k p_k - sum d_l v_l = -a_-
        ech = Echelon()
        for k, p in enumerate(P.basis):
            ech.add({i: x for i, x in enumerate(p) if x}, label=("p", k))
        for l, v in enumerate(V.basis):
            ech.add({i: -x for i, x in enumerate(v) if x}, label=("v", l))
        sol = ech.solve({i: -x for i, x in enumerate(am) if x})
        if sol is None:
            raise InconsistentV("no a_+ exists for some a_-")
        ap = [g.field.zero] * g.dim
        for (kind, k), c in sol.items():
            if kind == "p":
                for i, x in enumerate(P.basis[k]):
                    ap[i] += c * x
        images.append(q_coords(ap))
    n = len(q_basis)
    pm = [[g.pair(am, q) for q in q_basis] for am in a_minus]  # k x i
    # sum_i pm[k][i] X[i][j] = images[k][j]
    X = [[None] * n for _ in range(n)]
    for j in range(n):
        col = solve_dense(pm, [images[k][j] for k in range(n)])
        if col is None:
            raise InconsistentV("degenerate pairing on the quotient")
        for i in range(n):
            X[i][j] = col[i]
    xi = Tensor(2)
    for i in range(n):
        for j in range(n):
            if X[i][j]:
                xi = xi + Tensor.from_vectors(q_basis[i], q_basis[j]) * X[i][j]
    return xi, q_basis


def _nullspace(rows, n, field):
    reduced = rref(rows, n) if rows else ()
    pivots = [next(i for i, x in enumerate(r) if x) for r in reduced]
    out = []
    for f in range(n):
        if f in pivots:
            continue
        v = [field.zero] * n
        v[f] = field.one
        for r, p in zip(reduced, pivots):
            v[p] = -r[f]
        out.append(tuple(v))
    return out


def extract_lagrangian_splitting(g, s, H):
    """Try to read s as r_{H, L'}; returns {'ok': bool, 'failed': [...], 'L': Subspace or None}."""
    failed = []
    t = g.canonical_element()
    if s + s.transpose() != t:
        failed.append("symmetric_part")
    # s = sum_k eps^k (x) l_k over the rref basis of H
    legs = []
    in_H = True
    for j in range(g.dim):
        col = [s.terms.get((i, j), g.field.zero) for i in range(g.dim)]
        if any(col) and not H.contains(col):
            in_H = False
    if not in_H:
        failed.append("first_leg_in_H")
        return {"ok": False, "failed": failed, "L": None}
    # coefficients of each column on the H basis give l_k components
    ls = [[g.field.zero] * g.dim for _ in range(H.dim)]
    for j in range(g.dim):
        col = [s.terms.get((i, j), g.field.zero) for i in range(g.dim)]
        if any(col):
            coords = H.coordinates(col)
            for k, c in enumerate(coords):
                ls[k][j] += c
    legs = [tuple(l) for l in ls]
    L = Subspace(legs, g.dim, g.field)
    if L.dim != H.dim or (H + L).dim != g.dim:
        failed.append("complement")
        return {"ok": False, "failed": failed, "L": L}
    dual_ok = is_isotropic(g, L) and all(
        g.pair(e, l) == (g.field.one if a == b else g.field.zero)
        for a, e in enumerate(H.basis)
        for b, l in enumerate(legs)
    )
    if not dual_ok:
        failed.append("isotropic_dual")
    return {"ok": not failed, "failed": failed, "L": L}
