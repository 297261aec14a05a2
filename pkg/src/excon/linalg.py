"""Exact linear algebra over Q and prime fields.

Everything in this package reduces to the handful of operations here:
reduced row echelon form, kernels, linear solving and quotient-space
presentations, all with exact scalars (Fraction for Q, ints mod p for
prime fields).  No floating point anywhere.

Conventions: vectors are tuples of scalars.  Higher layers treat vectors
as *rows* and apply a linear map F via ``v @ F`` (``Matrix.apply``), so
the composite "f then g" has matrix ``F @ G``.  This module's kernel and
solve operations use the classical column convention (``m @ x = b``);
``left_kernel`` / ``solve_left`` are the single documented bridge between
the two conventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Field:
    """Exact coefficient field: the rationals (p == 0) or F_p with p prime."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0 and not _is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")

    @staticmethod
    def rationals():
        return Field(0)

    @staticmethod
    def prime(p):
        return Field(p)

    @property
    def is_rationals(self):
        return self.p == 0

    def of(self, x):
        """Coerce an int / Fraction / 'a/b' string into a field scalar."""
        if isinstance(x, str):
            x = Fraction(x)
        if self.p == 0:
            return Fraction(x)
        x = Fraction(x)
        den = x.denominator % self.p
        if den == 0:
            raise ZeroDivisionError(f"denominator of {x} vanishes mod {self.p}")
        return (x.numerator % self.p) * pow(den, -1, self.p) % self.p

    @property
    def zero(self):
        return Fraction(0) if self.p == 0 else 0

    @property
    def one(self):
        return Fraction(1) if self.p == 0 else 1

    def norm(self, x):
        return x if self.p == 0 else x % self.p

    def inv(self, x):
        if self.p == 0:
            return Fraction(1) / x
        return pow(x % self.p, -1, self.p)

    def fmt(self, x):
        """Canonical string form: 'a/b' over Q, canonical residue mod p."""
        if self.p == 0:
            return str(x)
        return str(x % self.p)

    def name(self):
        return "Q" if self.p == 0 else f"Fp:{self.p}"

    @staticmethod
    def from_name(name):
        if name == "Q":
            return Field.rationals()
        if name.startswith("Fp:"):
            return Field.prime(int(name[3:]))
        raise ValueError(f"unknown field name {name!r}")


class Matrix:
    """Dense exact matrix.  Treated as immutable after construction."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field, data, cols=None):
        self.field = field
        self.data = [list(row) for row in data]
        self.rows = len(self.data)
        if self.rows:
            self.cols = len(self.data[0])
        else:
            self.cols = 0 if cols is None else cols
        for row in self.data:
            if len(row) != self.cols:
                raise ValueError("ragged matrix data")

    @staticmethod
    def identity(field, n):
        one, zero = field.one, field.zero
        return Matrix(field, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @staticmethod
    def zero(field, rows, cols):
        z = field.zero
        return Matrix(field, [[z] * cols for _ in range(rows)], cols=cols)

    @staticmethod
    def from_rows(field, rows, cols=None):
        return Matrix(field, rows, cols=cols)

    def row(self, i):
        return tuple(self.data[i])

    def column(self, j):
        return tuple(self.data[i][j] for i in range(self.rows))

    def transpose(self):
        return Matrix(self.field, [[self.data[i][j] for i in range(self.rows)]
                                   for j in range(self.cols)], cols=self.rows)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        norm = self.field.norm
        out = []
        for row in self.data:
            acc = [self.field.zero] * other.cols
            for c, a in enumerate(row):
                if a:
                    orow = other.data[c]
                    for j, b in enumerate(orow):
                        if b:
                            acc[j] += a * b
            out.append([norm(v) for v in acc])
        return Matrix(self.field, out, cols=other.cols)

    def apply(self, vec):
        """Row-convention application: returns vec @ self."""
        if len(vec) != self.rows:
            raise ValueError("vector length mismatch")
        norm = self.field.norm
        acc = [self.field.zero] * self.cols
        for i, a in enumerate(vec):
            if a:
                row = self.data[i]
                for j, b in enumerate(row):
                    if b:
                        acc[j] += a * b
        return tuple(norm(v) for v in acc)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols} over {self.field.name()})"

    def to_lists(self):
        return [list(row) for row in self.data]


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))

def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))

def vec_scale(c, v, field=None):
    if field is not None and field.p:
        return tuple(c * a % field.p for a in v)
    return tuple(c * a for a in v)

def zero_vec(field, n):
    return (field.zero,) * n

def unit_vec(field, n, i):
    v = [field.zero] * n
    v[i] = field.one
    return tuple(v)

def is_zero_vec(v):
    return all(a == 0 for a in v)


def rref(m):
    """Reduced row echelon form.

    Returns (rref_matrix, pivot_columns, rank).  The result is the unique
    RREF, so identical inputs give identical outputs bit for bit.
    """
    field = m.field
    norm = field.norm
    a = [list(row) for row in m.data]
    nrows, ncols = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if a[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        inv = field.inv(a[r][c])
        a[r] = [norm(x * inv) for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [norm(x - f * y) for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return Matrix(field, a, cols=ncols), pivots, len(pivots)


def rank(m):
    return rref(m)[2]


def kernel_basis(m):
    """Basis of the right null space {v : m @ v = 0}.

    Deterministic: one basis vector per free column, ascending, with a 1
    in the free coordinate.  Length of the list is cols - rank.
    """
    field = m.field
    red, pivots, rk = rref(m)
    pivot_set = set(pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free:
        v = [field.zero] * m.cols
        v[f] = field.one
        for r, pc in enumerate(pivots):
            v[pc] = field.norm(-red.data[r][f])
        basis.append(tuple(v))
    return basis


def solve(m, b):
    """One exact solution x of m @ x = b, or None.

    Free variables are set to zero after row reduction, which pins the
    returned solution uniquely.
    """
    if len(b) != m.rows:
        raise ValueError("rhs length mismatch")
    field = m.field
    aug = Matrix(field, [list(row) + [bv] for row, bv in zip(m.data, b)], cols=m.cols + 1)
    red, pivots, rk = rref(aug)
    if pivots and pivots[-1] == m.cols:
        return None
    x = [field.zero] * m.cols
    for r, pc in enumerate(pivots):
        x[pc] = red.data[r][m.cols]
    return tuple(x)


def left_kernel(m):
    """Basis of {v : v @ m = 0}: the row-convention kernel bridge."""
    return kernel_basis(m.transpose())


def solve_left(m, b):
    """One solution v of v @ m = b (row convention), or None."""
    return solve(m.transpose(), b)


class SparseRref:
    """Incremental Gauss-Jordan on sparse rows (dict col -> scalar).

    Feeding the same set of rows in any order produces the same reduced
    rows, because the fully reduced echelon form is unique.  Used for the
    large, very sparse relation sets behind tensor-product quotients.
    """

    def __init__(self, field, width):
        self.field = field
        self.width = width
        self.rows = {}  # pivot col -> reduced row dict

    def reduce(self, row):
        """Reduce a sparse row against the current basis (copy, reduced)."""
        row = {c: v for c, v in row.items() if v}
        while True:
            hit = None
            for c in row:
                if c in self.rows:
                    if hit is None or c < hit:
                        hit = c
            if hit is None:
                return row
            f = row[hit]
            base = self.rows[hit]
            norm = self.field.norm
            for c, v in base.items():
                nv = norm(row.get(c, self.field.zero) - f * v)
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)

    def add(self, row):
        """Insert a row; returns True if the rank grew."""
        row = self.reduce(row)
        if not row:
            return False
        piv = min(row)
        inv = self.field.inv(row[piv])
        norm = self.field.norm
        row = {c: norm(v * inv) for c, v in row.items()}
        # Gauss-Jordan: clear the new pivot column from existing rows.
        for p, other in self.rows.items():
            if piv in other:
                f = other[piv]
                for c, v in row.items():
                    nv = norm(other.get(c, self.field.zero) - f * v)
                    if nv:
                        other[c] = nv
                    else:
                        other.pop(c, None)
        self.rows[piv] = row
        return True

    @property
    def rank(self):
        return len(self.rows)

    def pivot_columns(self):
        return sorted(self.rows)

    def reduced_rows(self):
        """RREF rows as dicts, ordered by pivot column."""
        return [self.rows[p] for p in sorted(self.rows)]


@dataclass(frozen=True)
class QuotientPresentation:
    """Quotient of k^ambient by a span of relations.

    projection: ambient x dim row-convention matrix (x @ projection).
    section: dim x ambient; section rows are single ambient basis vectors
    (the non-pivot coordinates of the relation RREF), so
    section @ projection = identity and every relation projects to zero.
    """

    field: Field
    ambient_dim: int
    dim: int
    projection: Matrix
    section: Matrix
    pivot_cols: tuple
    basis_cols: tuple

    def project(self, vec):
        return self.projection.apply(vec)

    def project_sparse(self, svec):
        """Project a sparse dict vector; returns a dense tuple."""
        field = self.field
        acc = [field.zero] * self.dim
        proj = self.projection.data
        for c, v in svec.items():
            if v:
                row = proj[c]
                for j, b in enumerate(row):
                    if b:
                        acc[j] += v * b
        return tuple(field.norm(x) for x in acc)

    def lift(self, vec):
        return self.section.apply(vec)


def quotient_space(field, ambient_dim, relations):
    """Present k^ambient modulo span(relations).

    relations may be dense tuples or sparse dicts.  The quotient basis is
    the non-pivot coordinates of the relation RREF (deterministic).
    """
    eng = SparseRref(field, ambient_dim)
    for rel in relations:
        if isinstance(rel, dict):
            eng.add(rel)
        else:
            if len(rel) != ambient_dim:
                raise ValueError("relation length mismatch")
            eng.add({i: v for i, v in enumerate(rel) if v})
    pivots = eng.pivot_columns()
    basis_cols = [c for c in range(ambient_dim) if c not in set(pivots)]
    qdim = len(basis_cols)
    col_index = {c: i for i, c in enumerate(basis_cols)}
    zero = field.zero
    proj_rows = []
    for c in range(ambient_dim):
        row = [zero] * qdim
        if c in col_index:
            row[col_index[c]] = field.one
        else:
            # e_c is congruent to -(non-pivot tail of its RREF row)
            rrow = eng.rows[c]
            for cc, v in rrow.items():
                if cc != c:
                    row[col_index[cc]] = field.norm(-v)
        proj_rows.append(row)
    sec_rows = []
    for c in basis_cols:
        row = [zero] * ambient_dim
        row[c] = field.one
        sec_rows.append(row)
    return QuotientPresentation(
        field=field,
        ambient_dim=ambient_dim,
        dim=qdim,
        projection=Matrix(field, proj_rows, cols=qdim),
        section=Matrix(field, sec_rows, cols=ambient_dim),
        pivot_cols=tuple(pivots),
        basis_cols=tuple(basis_cols),
    )


def span_rank(field, width, vectors):
    """Rank of a list of (possibly sparse) vectors of the given width."""
    eng = SparseRref(field, width)
    for v in vectors:
        if isinstance(v, dict):
            eng.add(v)
        else:
            eng.add({i: x for i, x in enumerate(v) if x})
    return eng.rank


def row_space_basis(field, width, vectors):
    """Deterministic (RREF) basis of the span of the given row vectors."""
    eng = SparseRref(field, width)
    for v in vectors:
        if isinstance(v, dict):
            eng.add(v)
        else:
            eng.add({i: x for i, x in enumerate(v) if x})
    zero = field.zero
    out = []
    for row in eng.reduced_rows():
        dense = [zero] * width
        for c, v in row.items():
            dense[c] = v
        out.append(tuple(dense))
    return out


def sparse_kernel_basis(field, width, rows):
    """kernel_basis for a system given as sparse rows (dicts col -> val).

    Produces exactly the same basis as the dense version (the RREF is
    unique), but only touches nonzero entries.
    """
    eng = SparseRref(field, width)
    for r in rows:
        eng.add(r if isinstance(r, dict) else {i: v for i, v in enumerate(r) if v})
    pivots = eng.pivot_columns()
    pivot_set = set(pivots)
    free = [c for c in range(width) if c not in pivot_set]
    basis = []
    for f in free:
        v = [field.zero] * width
        v[f] = field.one
        for p in pivots:
            coeff = eng.rows[p].get(f)
            if coeff:
                v[p] = field.norm(-coeff)
        basis.append(tuple(v))
    return basis


def sparse_solve(field, width, rows, rhs):
    """Solve a sparse linear system (one solution, free variables zero).

    rows are dicts over columns 0..width-1; rhs pairs with rows.  Returns
    None when inconsistent.  Agrees with the dense solve() on the same
    system because both read the unique RREF.
    """
    eng = SparseRref(field, width + 1)
    for row, b in zip(rows, rhs):
        r = dict(row) if isinstance(row, dict) else {i: v for i, v in enumerate(row) if v}
        if b:
            r[width] = b
        eng.add(r)
    if width in eng.rows:
        return None
    x = [field.zero] * width
    for p, row in eng.rows.items():
        x[p] = row.get(width, field.zero)
    return tuple(x)


class SpanSolver:
    """Answers "is v in the span?" and coordinate queries for a fixed
    list of spanning rows.  Used to express products in a chosen basis."""

    def __init__(self, field, width, basis_rows):
        self.field = field
        self.width = width
        self.basis = [tuple(r) for r in basis_rows]
        # store RREF of the basis with bookkeeping of the combination
        aug = [list(r) + [field.one if j == i else field.zero
                          for j in range(len(basis_rows))]
               for i, r in enumerate(basis_rows)]
        self._aug = Matrix(field, aug, cols=width + len(basis_rows))
        self._red, self._pivots, self._rank = rref(self._aug)
        if self._rank != len(self.basis):
            raise ValueError("basis rows are linearly dependent")
        if any(p >= width for p in self._pivots):
            raise ValueError("basis rows are linearly dependent")

    def coords(self, vec):
        """Coordinates of vec in the basis, or None if outside the span."""
        field = self.field
        work = list(vec) + [field.zero] * len(self.basis)
        norm = field.norm
        for r, pc in enumerate(self._pivots):
            f = work[pc]
            if f:
                row = self._red.data[r]
                work = [norm(x - f * y) for x, y in zip(work, row)]
        if any(work[: self.width]):
            return None
        return tuple(norm(-x) for x in work[self.width:])
