"""Finite-dimensional unital associative algebras over exact fields.

An Algebra is a basis, a structure-constant tensor c[i][j] (the coordinate
vector of b_i * b_j) and the coordinates of the identity.  Associativity
and the unit law are verified exhaustively at construction; every value
constructed through this module therefore satisfies them.

All basis orderings produced by the constructors here (matrix algebras,
triangular algebras, subalgebras, opposites, products) are deterministic,
so structure constants can be compared across runs by plain equality.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .linalg import (
    Field, Matrix, SpanSolver, is_zero_vec, row_space_basis, unit_vec,
    zero_vec,
)

DEFAULT_MAX_DIM = 256


class AlgebraError(Exception):
    pass


class NonAssociative(AlgebraError):
    def __init__(self, triple, lhs, rhs):
        self.triple = triple
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(f"associativity fails at basis triple {triple}")


class BadUnit(AlgebraError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"unit law fails at basis index {index}")


class NotClosed(AlgebraError):
    def __init__(self, pair):
        self.pair = pair
        super().__init__(f"span not closed under multiplication at pair {pair}")


class UnitMissing(AlgebraError):
    def __init__(self):
        super().__init__("span does not contain the unit")


class DimensionLimitExceeded(AlgebraError):
    def __init__(self, dim, limit):
        super().__init__(f"algebra dimension {dim} exceeds EXCON_MAX_DIM={limit}")


class MorphismInvalid(AlgebraError):
    pass


def _max_dim():
    return int(os.environ.get("EXCON_MAX_DIM", DEFAULT_MAX_DIM))


class Algebra:
    __slots__ = ("field", "dim", "basis_labels", "mult", "unit", "_sparse")

    def __init__(self, field, basis_labels, mult, unit, validate=True):
        self.field = field
        self.basis_labels = tuple(basis_labels)
        self.dim = len(self.basis_labels)
        if self.dim > _max_dim():
            raise DimensionLimitExceeded(self.dim, _max_dim())
        if self.dim == 0:
            raise AlgebraError("zero-dimensional algebras are not supported")
        if len(mult) != self.dim or any(len(r) != self.dim for r in mult):
            raise AlgebraError("structure tensor shape mismatch")
        self.mult = tuple(tuple(tuple(field.of(x) for x in vec) for vec in row)
                          for row in mult)
        for row in self.mult:
            for vec in row:
                if len(vec) != self.dim:
                    raise AlgebraError("structure vector length mismatch")
        if len(unit) != self.dim:
            raise AlgebraError("unit length mismatch")
        self.unit = tuple(field.of(x) for x in unit)
        self._sparse = tuple(tuple(tuple((l, c) for l, c in enumerate(vec) if c)
                                   for vec in row) for row in self.mult)
        if validate:
            self._check_unit()
            self._check_associativity()

    def _check_unit(self):
        for i in range(self.dim):
            e = unit_vec(self.field, self.dim, i)
            if self.mul(self.unit, e) != e or self.mul(e, self.unit) != e:
                raise BadUnit(i)

    def _check_associativity(self):
        # O(dim^3) basis triples; the sparse tables keep this affordable.
        field = self.field
        norm = field.norm
        zero = field.zero
        sp = self._sparse
        for i in range(self.dim):
            row_i = sp[i]
            for j in range(self.dim):
                ij = row_i[j]
                for k in range(self.dim):
                    acc = {}
                    for l, c in ij:  # (b_i b_j) b_k
                        for t, d in sp[l][k]:
                            acc[t] = acc.get(t, zero) + c * d
                    acc2 = {}
                    for l, c in sp[j][k]:  # b_i (b_j b_k)
                        for t, d in row_i[l]:
                            acc2[t] = acc2.get(t, zero) + c * d
                    lhs = {t: norm(v) for t, v in acc.items() if norm(v)}
                    rhs = {t: norm(v) for t, v in acc2.items() if norm(v)}
                    if lhs != rhs:
                        dl = [zero] * self.dim
                        dr = [zero] * self.dim
                        for t, v in lhs.items():
                            dl[t] = v
                        for t, v in rhs.items():
                            dr[t] = v
                        raise NonAssociative((i, j, k), tuple(dl), tuple(dr))

    def mul(self, x, y):
        field = self.field
        zero = field.zero
        acc = [zero] * self.dim
        for i, a in enumerate(x):
            if not a:
                continue
            row = self._sparse[i]
            for j, b in enumerate(y):
                if not b:
                    continue
                ab = a * b
                for l, c in row[j]:
                    acc[l] += ab * c
        norm = field.norm
        return tuple(norm(v) for v in acc)

    def left_op(self, v):
        """Row-convention matrix of x -> v * x."""
        rows = [self.mul(v, unit_vec(self.field, self.dim, j)) for j in range(self.dim)]
        return Matrix(self.field, rows, cols=self.dim)

    def right_op(self, v):
        """Row-convention matrix of x -> x * v."""
        rows = [self.mul(unit_vec(self.field, self.dim, j), v) for j in range(self.dim)]
        return Matrix(self.field, rows, cols=self.dim)

    def basis_vector(self, i):
        return unit_vec(self.field, self.dim, i)

    def element(self, coords):
        return AlgebraElement(self, tuple(self.field.of(x) for x in coords))

    def is_commutative(self):
        return all(self.mult[i][j] == self.mult[j][i]
                   for i in range(self.dim) for j in range(self.dim))

    def power(self, v, n):
        out = self.unit
        for _ in range(n):
            out = self.mul(out, v)
        return out

    def __repr__(self):
        return f"Algebra(dim={self.dim} over {self.field.name()})"


@dataclass(frozen=True)
class AlgebraElement:
    parent: Algebra
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.parent.dim:
            raise AlgebraError("coordinate length mismatch")

    def __mul__(self, other):
        return AlgebraElement(self.parent, self.parent.mul(self.coords, other.coords))

    def __add__(self, other):
        f = self.parent.field
        return AlgebraElement(self.parent, tuple(f.norm(a + b)
                                                 for a, b in zip(self.coords, other.coords)))


class AlgebraMorphism:
    """Unit-preserving multiplicative linear map, stored as a
    dim(source) x dim(target) row-convention matrix."""

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source, target, matrix, validate=True):
        self.source = source
        self.target = target
        if isinstance(matrix, Matrix):
            self.matrix = matrix
        else:
            self.matrix = Matrix(source.field,
                                 [[source.field.of(x) for x in row] for row in matrix],
                                 cols=target.dim)
        if self.matrix.rows != source.dim or self.matrix.cols != target.dim:
            raise MorphismInvalid("matrix shape mismatch")
        if source.field != target.field:
            raise MorphismInvalid("field mismatch")
        if validate:
            rep = check_morphism(self)
            if not rep.ok:
                raise MorphismInvalid(rep.describe())

    def apply(self, vec):
        return self.matrix.apply(vec)

    def then(self, other):
        """Composite 'self then other' (matrix product in that order)."""
        if other.source is not self.target and other.source.dim != self.target.dim:
            raise MorphismInvalid("composition mismatch")
        return AlgebraMorphism(self.source, other.target, self.matrix @ other.matrix,
                               validate=False)

    def is_injective(self):
        from .linalg import rank
        return rank(self.matrix) == self.source.dim

    def is_surjective(self):
        from .linalg import rank
        return rank(self.matrix) == self.target.dim

    @staticmethod
    def identity(a):
        return AlgebraMorphism(a, a, Matrix.identity(a.field, a.dim), validate=False)

    def __repr__(self):
        return f"AlgebraMorphism({self.source.dim} -> {self.target.dim})"


@dataclass
class MorphismReport:
    unit_ok: bool
    mult_ok: bool
    witness_pair: tuple | None = None

    @property
    def ok(self):
        return self.unit_ok and self.mult_ok

    def describe(self):
        if self.ok:
            return "morphism checks pass"
        if not self.unit_ok:
            return "unit is not preserved"
        return f"multiplicativity fails at basis pair {self.witness_pair}"


def check_morphism(f):
    """Verify unit preservation and multiplicativity on all basis pairs."""
    src, tgt = f.source, f.target
    if f.apply(src.unit) != tgt.unit:
        return MorphismReport(unit_ok=False, mult_ok=True)
    images = [f.apply(src.basis_vector(i)) for i in range(src.dim)]
    for i in range(src.dim):
        for j in range(src.dim):
            lhs = f.apply(src.mult[i][j])
            rhs = tgt.mul(images[i], images[j])
            if lhs != rhs:
                return MorphismReport(unit_ok=True, mult_ok=False, witness_pair=(i, j))
    return MorphismReport(unit_ok=True, mult_ok=True)


def make_algebra(field, basis_labels, mult, unit):
    return Algebra(field, basis_labels, mult, unit)


def field_algebra(field, label="1"):
    """The base field as a 1-dimensional algebra."""
    one = field.one
    return Algebra(field, (label,), (((one,),),), (one,))


def dual_numbers(field):
    """k[x]/(x^2) with basis {1, x}."""
    z, o = field.zero, field.one
    mult = (((o, z), (z, o)), ((z, o), (z, z)))
    return Algebra(field, ("1", "x"), mult, (o, z))


def truncated_polynomials(field, n, var="x"):
    """k[x]/(x^n) with basis {1, x, ..., x^(n-1)}."""
    z, o = field.zero, field.one
    labels = ["1"] + [var if e == 1 else f"{var}^{e}" for e in range(1, n)]
    mult = [[tuple(o if l == i + j else z for l in range(n)) if i + j < n
             else tuple(z for _ in range(n)) for j in range(n)] for i in range(n)]
    return Algebra(field, labels, mult, tuple(o if l == 0 else z for l in range(n)))


def matrix_algebra(a, n):
    """M_n(a) with basis E_ij (x) b_k, ordered by (i, j, k)."""
    if n < 1:
        raise AlgebraError("matrix size must be >= 1")
    field = a.field
    d = a.dim
    dim = n * n * d
    labels = [f"E{i + 1}{j + 1}[{a.basis_labels[k]}]"
              for i in range(n) for j in range(n) for k in range(d)]

    def idx(i, j, k):
        return (i * n + j) * d + k

    zero = zero_vec(field, dim)
    mult = [[zero] * dim for _ in range(dim)]
    # (E_ij (x) b_k)(E_lm (x) b_n) = delta_jl E_im (x) b_k b_n
    for i in range(n):
        for j in range(n):
            for k in range(d):
                for m in range(n):
                    for q in range(d):
                        vec = [field.zero] * dim
                        for t, c in enumerate(a.mult[k][q]):
                            if c:
                                vec[idx(i, m, t)] = c
                        mult[idx(i, j, k)][idx(j, m, q)] = tuple(vec)
    unit = [field.zero] * dim
    for i in range(n):
        for t, c in enumerate(a.unit):
            unit[idx(i, i, t)] = c
    return Algebra(field, labels, mult, tuple(unit))


@dataclass
class TriangularData:
    """Upper triangular algebra (S M ; 0 T) with its block embeddings.

    The corner embeddings are linear, not unital, so they are exposed as
    plain matrices; e1 and e2 are the diagonal idempotents.
    """

    algebra: Algebra
    s_embed: Matrix
    m_embed: Matrix
    t_embed: Matrix
    e1: tuple
    e2: tuple


def triangular_algebra(s, t, m):
    """Triangular matrix algebra from an S-T-bimodule m.

    Multiplication: (s,x,t)(s',x',t') = (ss', s.x' + x.t', tt').
    Basis order: S block, then M block, then T block.
    """
    from .modules import Bimodule
    if not isinstance(m, Bimodule):
        raise AlgebraError("triangular_algebra needs a Bimodule")
    if m.left_algebra is not s or m.right_algebra is not t:
        raise AlgebraError("bimodule sides do not match the given algebras")
    field = s.field
    ds, dm, dt = s.dim, m.dim, t.dim
    dim = ds + dm + dt
    labels = ([f"s:{l}" for l in s.basis_labels]
              + [f"m:{l}" for l in m.labels]
              + [f"t:{l}" for l in t.basis_labels])
    zero = zero_vec(field, dim)
    mult = [[zero] * dim for _ in range(dim)]

    def embed(block, vec):
        out = [field.zero] * dim
        off = {"s": 0, "m": ds, "t": ds + dm}[block]
        for i, c in enumerate(vec):
            out[off + i] = c
        return tuple(out)

    for i in range(ds):
        ei = unit_vec(field, ds, i)
        for j in range(ds):
            mult[i][j] = embed("s", s.mult[i][j])
        for j in range(dm):
            mult[i][ds + j] = embed("m", m.left_act(ei, unit_vec(field, dm, j)))
    for i in range(dm):
        xi = unit_vec(field, dm, i)
        for j in range(dt):
            mult[ds + i][ds + dm + j] = embed("m", m.right_act(xi, unit_vec(field, dt, j)))
    for i in range(dt):
        for j in range(dt):
            mult[ds + dm + i][ds + dm + j] = embed("t", t.mult[i][j])
    unit = embed("s", s.unit)
    unit = tuple(a + b for a, b in zip(unit, embed("t", t.unit)))
    alg = Algebra(field, labels, mult, unit)
    rows_s = [embed("s", unit_vec(field, ds, i)) for i in range(ds)]
    rows_m = [embed("m", unit_vec(field, dm, i)) for i in range(dm)]
    rows_t = [embed("t", unit_vec(field, dt, i)) for i in range(dt)]
    return TriangularData(
        algebra=alg,
        s_embed=Matrix(field, rows_s, cols=dim),
        m_embed=Matrix(field, rows_m, cols=dim),
        t_embed=Matrix(field, rows_t, cols=dim),
        e1=embed("s", s.unit),
        e2=embed("t", t.unit),
    )


def subalgebra_from_spanning(a, vectors):
    """Subalgebra on the RREF basis of the span; returns it with the
    inclusion morphism.  Raises NotClosed / UnitMissing."""
    field = a.field
    vecs = [tuple(field.of(x) for x in v) for v in vectors]
    basis = row_space_basis(field, a.dim, vecs)
    if not basis:
        raise UnitMissing()
    solver = SpanSolver(field, a.dim, basis)
    if solver.coords(a.unit) is None:
        raise UnitMissing()
    d = len(basis)
    mult = []
    for i in range(d):
        row = []
        for j in range(d):
            prod = a.mul(basis[i], basis[j])
            coords = solver.coords(prod)
            if coords is None:
                raise NotClosed((i, j))
            row.append(coords)
        mult.append(row)
    unit = solver.coords(a.unit)
    labels = [f"r{i}" for i in range(d)]
    sub = Algebra(field, labels, mult, unit)
    incl = AlgebraMorphism(sub, a, Matrix(field, basis, cols=a.dim))
    return sub, incl


def opposite(a):
    """Opposite algebra: same basis, multiplication order swapped."""
    mult = tuple(tuple(a.mult[j][i] for j in range(a.dim)) for i in range(a.dim))
    return Algebra(a.field, a.basis_labels, mult, a.unit)


def product(a, b):
    """Direct product algebra A x B, basis: A block then B block."""
    if a.field != b.field:
        raise AlgebraError("field mismatch")
    field = a.field
    da, db = a.dim, b.dim
    dim = da + db
    labels = [f"a:{l}" for l in a.basis_labels] + [f"b:{l}" for l in b.basis_labels]
    zero = zero_vec(field, dim)
    mult = [[zero] * dim for _ in range(dim)]
    for i in range(da):
        for j in range(da):
            vec = [field.zero] * dim
            for t, c in enumerate(a.mult[i][j]):
                vec[t] = c
            mult[i][j] = tuple(vec)
    for i in range(db):
        for j in range(db):
            vec = [field.zero] * dim
            for t, c in enumerate(b.mult[i][j]):
                vec[da + t] = c
            mult[da + i][da + j] = tuple(vec)
    unit = tuple(list(a.unit) + list(b.unit))
    return Algebra(field, labels, mult, unit)


def algebras_equal(a, b):
    """Structure-constant equality in the given bases (not isomorphism)."""
    return (a.field == b.field and a.dim == b.dim and a.mult == b.mult
            and a.unit == b.unit)
