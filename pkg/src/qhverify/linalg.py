"""Sparse exact Gaussian elimination over a field and over truncated series rings.

Vectors are dicts mapping sortable keys to nonzero field elements.
"""


def _axpy(target, scale, source):
    """target += scale * source, dropping zeros (in place)."""
    for k, v in source.items():
        new = target.get(k)
        new = scale * v if new is None else new + scale * v
        if new:
            target[k] = new
        else:
            target.pop(k, None)


class Echelon:
    """Incrementally built echelon basis of sparse vectors.

    Each stored row remembers how it is written in terms of the vectors
    passed to :meth:`add`, so :meth:`solve` can return coefficients on the
    original spanning family.
    """

    def __init__(self, track=True):
        self.rows = {}  # pivot key -> (row normalised to pivot 1, combination)
        self.track = track
        self.count = 0
        self.relations = []  # combinations of added vectors that vanish

    @property
    def rank(self):
        return len(self.rows)

    def _reduce(self, vec, combo):
        # rows are fully reduced, so one pass over the incoming pivots suffices
        vec = {k: v for k, v in vec.items() if v}
        for key in [k for k in vec if k in self.rows]:
            c = vec.get(key)
            if not c:
                continue
            row, rcombo = self.rows[key]
            _axpy(vec, -c, row)
            if combo is not None:
                _axpy(combo, -c, rcombo)
        return vec, combo

    def reduce(self, vec):
        """Residual of vec after projecting away the span, plus the combination used."""
        vec, combo = self._reduce(vec, {} if self.track else None)
        return vec, combo

    def add(self, vec, label=None):
        """Add a vector; returns True if it enlarged the span."""
        idx = self.count if label is None else label
        self.count += 1
        combo = {idx: 1} if self.track else None
        vec, combo = self._reduce(vec, combo)
        if not vec:
            if combo is not None:
                self.relations.append(combo)
            return False
        pivot = min(vec)
        inv = 1 / vec[pivot]
        row = {k: v * inv for k, v in vec.items()}
        if combo is not None:
            combo = {k: v * inv for k, v in combo.items()}
        # keep rows fully reduced against the new pivot
        for key, (other, ocombo) in self.rows.items():
            c = other.get(pivot)
            if c:
                _axpy(other, -c, row)
                if ocombo is not None:
                    _axpy(ocombo, -c, combo)
        self.rows[pivot] = (row, combo)
        return True

    def solve(self, vec):
        """Coefficients {label: c} with sum c*v_label == vec, or None if vec is outside the span."""
        residual, combo = self._reduce(vec, {})
        if residual:
            return None
        # combo holds -(combination); reducing vec to zero means vec = sum(c * row)
        return {k: -v for k, v in combo.items() if v}

    def contains(self, vec):
        residual, _ = self._reduce(vec, None)
        return not residual


def rank(vectors):
    ech = Echelon(track=False)
    for v in vectors:
        ech.add(v)
    return ech.rank


def rref(rows, ncols):
    """Reduced row echelon form of dense rows (lists); returns a tuple of tuples."""
    rows = [list(r) for r in rows]
    out = []
    col = 0
    for col in range(ncols):
        piv = next((r for r in rows if r[col]), None)
        if piv is None:
            continue
        rows.remove(piv)
        inv = 1 / piv[col]
        piv = [x * inv for x in piv]
        for r in rows + out:
            c = r[col]
            if c:
                for j in range(ncols):
                    r[j] -= c * piv[j]
        out.append(piv)
    out.sort(key=lambda r: next(i for i, x in enumerate(r) if x))
    return tuple(tuple(r) for r in out)


def solve_dense(matrix, rhs):
    """Solve matrix @ x = rhs for a square invertible dense matrix; None if singular."""
    n = len(matrix)
    aug = [list(matrix[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col]), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col]:
                c = aug[i][col]
                aug[i] = [a - c * b for a, b in zip(aug[i], aug[col])]
    return [aug[i][n] for i in range(n)]


def flatten_series(vec):
    """{key: TruncSeries} -> {(k, key): coefficient} over the base field."""
    out = {}
    for key, s in vec.items():
        for k, c in enumerate(s.coeffs):
            if c:
                out[(k, key)] = c
    return out


def shifted(flat, j, order):
    """hbar^j * flat (flattened series vector), truncated at order."""
    return {(k + j, key): c for (k, key), c in flat.items() if k + j <= order}


def module_echelon(vectors, order):
    """Echelon basis of the Q-span of {hbar^j v : v in vectors, j <= order}.

    This is the Q[hbar]/hbar^(order+1)-submodule generated by the vectors,
    viewed as a vector space over the base field. Labels are (index, j).
    """
    ech = Echelon()
    for i, v in enumerate(vectors):
        flat = flatten_series(v)
        for j in range(order + 1):
            ech.add(shifted(flat, j, order), label=(i, j))
    return ech


def layer_ranks(vectors, order):
    """dim(hbar^k M / hbar^(k+1) M) for k = 0..order, M the module generated by vectors."""
    dims = []
    for k in range(order + 1):
        ech = Echelon(track=False)
        for v in vectors:
            flat = flatten_series(v)
            for j in range(k, order + 1):
                ech.add(shifted(flat, j, order))
        dims.append(ech.rank)
    dims.append(0)
    return [dims[k] - dims[k + 1] for k in range(order + 1)]


def series_kernel(rows, columns, order, field):
    """Kernel of a matrix over Q[hbar]/hbar^(order+1) whose entries are TruncSeries.

    rows: list of {column: TruncSeries}. Elimination only uses unit pivots
    (nonzero constant term). Returns (basis, free) where basis is a list of
    {column: TruncSeries} and free is False if a nonzero non-unit block
    survives, in which case the kernel is not a free module of the expected
    rank and the returned basis covers only the unit-pivot part.
    """
    from .series import TruncSeries

    one = TruncSeries.constant(1, order, field)
    work = [dict(r) for r in rows]
    pivots = []  # (column, row normalised so entry at column is 1)
    remaining = list(work)
    used_cols = set()
    while True:
        found = None
        for r in remaining:
            for col in columns:
                if col in used_cols:
                    continue
                s = r.get(col)
                if s is not None and s.coeffs[0]:
                    found = (r, col)
                    break
            if found:
                break
        if not found:
            break
        r, col = found
        remaining.remove(r)
        inv = r[col].invert()
        r = {c: s * inv for c, s in r.items()}
        for other in remaining + [p[1] for p in pivots]:
            c = other.get(col)
            if c is not None and not c.is_zero():
                for k, s in r.items():
                    new = other.get(k)
                    new = -(c * s) if new is None else new - c * s
                    if new.is_zero():
                        other.pop(k, None)
                    else:
                        other[k] = new
        pivots.append((col, r))
        used_cols.add(col)
    free = all(all(s.is_zero() for s in r.values()) for r in remaining)
    basis = []
    for col in columns:
        if col in used_cols:
            continue
        vec = {col: one}
        for pcol, prow in pivots:
            s = prow.get(col)
            if s is not None and not s.is_zero():
                vec[pcol] = -s
        basis.append(vec)
    return basis, free
