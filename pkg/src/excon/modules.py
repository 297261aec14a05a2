"""Finite-dimensional modules, bimodules, Hom spaces and tensor products.

Left and right modules carry their own action tensors: action[i] is the
row-convention operator matrix of the i-th algebra basis element, so for
a left module   (b_i . x) = x @ action[i]   and the module law reads
action(b_i b_j) = action[j] @ action[i] (apply j first), while for a
right module    (x . b_i) = x @ action[i]  and
action(b_i b_j) = action[i] @ action[j].

Module morphisms follow the composition convention used throughout: the
composite "f then g" is written f.then(g) and has matrix F @ G.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import (
    Field, Matrix, SparseRref, SpanSolver, kernel_basis, quotient_space,
    row_space_basis, sparse_kernel_basis, unit_vec, zero_vec,
)
from .algebra import Algebra, AlgebraError

LEFT = "left"
RIGHT = "right"


class ModuleError(AlgebraError):
    pass


class AlgebraMismatch(ModuleError):
    pass


class NotStable(ModuleError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"subspace is not action-stable (witness {witness})")


def _operator_of(action, coords, field, dim):
    """Row-convention operator of an algebra element with the given coords."""
    acc = [[field.zero] * dim for _ in range(dim)]
    for i, c in enumerate(coords):
        if c:
            mat = action[i]
            for r in range(dim):
                row = mat.data[r]
                arow = acc[r]
                for j, v in enumerate(row):
                    if v:
                        arow[j] += c * v
    norm = field.norm
    return Matrix(field, [[norm(x) for x in row] for row in acc], cols=dim)


class Module:
    __slots__ = ("algebra", "side", "dim", "action")

    def __init__(self, algebra, side, dim, action, validate=True):
        if side not in (LEFT, RIGHT):
            raise ModuleError(f"side must be 'left' or 'right', got {side!r}")
        self.algebra = algebra
        self.side = side
        self.dim = dim
        mats = []
        for m in action:
            if not isinstance(m, Matrix):
                m = Matrix(algebra.field, m, cols=dim)
            if m.rows != dim or m.cols != dim:
                raise ModuleError("action matrix shape mismatch")
            mats.append(m)
        if len(mats) != algebra.dim:
            raise ModuleError("need one action matrix per algebra basis element")
        self.action = tuple(mats)
        if validate:
            self.check()

    def check(self):
        a = self.algebra
        ident = Matrix.identity(a.field, self.dim)
        if self.operator(a.unit) != ident:
            raise ModuleError("action is not unital")
        for i in range(a.dim):
            for j in range(a.dim):
                want = self.operator(a.mult[i][j])
                if self.side == LEFT:
                    got = self.action[j] @ self.action[i]
                else:
                    got = self.action[i] @ self.action[j]
                if want != got:
                    raise ModuleError(
                        f"action does not respect structure constants at ({i},{j})")

    def operator(self, coords):
        return _operator_of(self.action, coords, self.algebra.field, self.dim)

    def act(self, acoords, vec):
        """b . x (left) or x . b (right) for an algebra element b."""
        out = [self.algebra.field.zero] * self.dim
        for i, c in enumerate(acoords):
            if c:
                img = self.action[i].apply(vec)
                out = [o + c * v for o, v in zip(out, img)]
        norm = self.algebra.field.norm
        return tuple(norm(v) for v in out)

    def __repr__(self):
        return f"Module({self.side}, dim={self.dim} over dim-{self.algebra.dim} algebra)"


def regular_module(a, side):
    if side == LEFT:
        action = [a.left_op(a.basis_vector(i)) for i in range(a.dim)]
    else:
        action = [a.right_op(a.basis_vector(i)) for i in range(a.dim)]
    return Module(a, side, a.dim, action, validate=False)


def restrict_module(m, f):
    """Restrict a module along an algebra morphism f: R -> A."""
    action = [m.operator(f.apply(f.source.basis_vector(i)))
              for i in range(f.source.dim)]
    return Module(f.source, m.side, m.dim, action, validate=False)


def module_via(f, side):
    """Target algebra of f as a module over the source, via multiplication."""
    return restrict_module(regular_module(f.target, side), f)


def opposite_module(m):
    """A right A-module seen as a left module over A^op (and conversely).

    The action matrices are reused unchanged; only the bookkeeping flips.
    """
    from .algebra import opposite
    return Module(opposite(m.algebra), LEFT if m.side == RIGHT else RIGHT,
                  m.dim, m.action, validate=False)


def submodule(m, vectors):
    """Submodule on the RREF basis of an action-stable span."""
    field = m.algebra.field
    basis = row_space_basis(field, m.dim, [tuple(field.of(x) for x in v) for v in vectors])
    if not basis:
        raise ModuleError("empty submodule basis is not representable")
    solver = SpanSolver(field, m.dim, basis)
    action = []
    for i in range(m.algebra.dim):
        rows = []
        for b in basis:
            img = m.action[i].apply(b)
            coords = solver.coords(img)
            if coords is None:
                raise NotStable((i, b))
            rows.append(coords)
        action.append(Matrix(field, rows, cols=len(basis)))
    sub = Module(m.algebra, m.side, len(basis), action, validate=False)
    incl = Matrix(field, basis, cols=m.dim)
    return sub, incl


def quotient_module(m, sub_vectors):
    """Quotient by an action-stable span; returns (module, projection)."""
    field = m.algebra.field
    vecs = [tuple(field.of(x) for x in v) for v in sub_vectors]
    span = row_space_basis(field, m.dim, vecs)
    solver = SpanSolver(field, m.dim, span) if span else None
    for i in range(m.algebra.dim):
        for b in span:
            img = m.action[i].apply(b)
            if solver.coords(img) is None:
                raise NotStable((i, b))
    pres = quotient_space(field, m.dim, span)
    action = []
    for i in range(m.algebra.dim):
        # section, act, project
        action.append(pres.section @ m.action[i] @ pres.projection)
    quo = Module(m.algebra, m.side, pres.dim, action, validate=False)
    return quo, pres


def direct_sum(m1, m2):
    if m1.algebra is not m2.algebra or m1.side != m2.side:
        raise AlgebraMismatch("direct sum needs modules over the same algebra and side")
    field = m1.algebra.field
    d1, d2 = m1.dim, m2.dim
    action = []
    for i in range(m1.algebra.dim):
        rows = []
        for r in range(d1):
            rows.append(tuple(m1.action[i].data[r]) + zero_vec(field, d2))
        for r in range(d2):
            rows.append(zero_vec(field, d1) + tuple(m2.action[i].data[r]))
        action.append(Matrix(field, rows, cols=d1 + d2))
    return Module(m1.algebra, m1.side, d1 + d2, action, validate=False)


class ModuleMorphism:
    """Intertwining linear map between modules, as a row-convention matrix."""

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source, target, matrix, validate=True):
        self.source = source
        self.target = target
        self.matrix = matrix if isinstance(matrix, Matrix) else Matrix(
            source.algebra.field, matrix, cols=target.dim)
        if validate:
            if source.algebra is not target.algebra or source.side != target.side:
                raise AlgebraMismatch("morphism endpoints live over different data")
            for i in range(source.algebra.dim):
                if source.action[i] @ self.matrix != self.matrix @ target.action[i]:
                    raise ModuleError(f"map does not intertwine basis element {i}")

    def apply(self, vec):
        return self.matrix.apply(vec)

    def then(self, other):
        return ModuleMorphism(self.source, other.target, self.matrix @ other.matrix,
                              validate=False)


@dataclass
class HomSpace:
    source: Module
    target: Module
    basis: list  # of Matrix

    @property
    def dim(self):
        return len(self.basis)


def hom_space(x, y):
    """Basis of the intertwiner space Hom(x, y), deterministically ordered.

    Solves action[i] @ F = F @ action[i] for all algebra basis elements;
    the basis comes from kernel_basis of the stacked system.
    """
    if x.algebra is not y.algebra or x.side != y.side:
        raise AlgebraMismatch("hom_space needs modules over the same algebra and side")
    field = x.algebra.field
    dx, dy = x.dim, y.dim
    nunk = dx * dy
    rows = []
    for i in range(x.algebra.dim):
        ax = x.action[i]
        ay = y.action[i]
        # (ax @ F - F @ ay)[r][c] = 0 ; unknowns F[u][v] flattened u*dy+v
        for r in range(dx):
            for c in range(dy):
                coeffs = {}
                for u in range(dx):
                    if ax.data[r][u]:
                        k = u * dy + c
                        coeffs[k] = coeffs.get(k, field.zero) + ax.data[r][u]
                for v in range(dy):
                    if ay.data[v][c]:
                        k = r * dy + v
                        coeffs[k] = coeffs.get(k, field.zero) - ay.data[v][c]
                coeffs = {k: field.norm(v) for k, v in coeffs.items() if field.norm(v)}
                if coeffs:
                    rows.append(coeffs)
    ker = sparse_kernel_basis(field, nunk, rows)
    basis = [Matrix(field, [vec[u * dy:(u + 1) * dy] for u in range(dx)], cols=dy)
             for vec in ker]
    return HomSpace(source=x, target=y, basis=basis)


def end_algebra(x):
    """Endomorphism algebra of x, composition in 'first f then g' order.

    Returns (Algebra, basis matrices); the algebra's multiplication is
    fg = F @ G in the returned identification.
    """
    hs = hom_space(x, x)
    field = x.algebra.field
    flat = [tuple(v for row in F.data for v in row) for F in hs.basis]
    solver = SpanSolver(field, x.dim * x.dim, flat)
    d = len(hs.basis)
    mult = []
    for i in range(d):
        row = []
        for j in range(d):
            comp = hs.basis[i] @ hs.basis[j]
            coords = solver.coords(tuple(v for r in comp.data for v in r))
            if coords is None:
                raise ModuleError("endomorphism space is not closed under composition")
            row.append(coords)
        mult.append(row)
    ident = Matrix.identity(field, x.dim)
    unit = solver.coords(tuple(v for r in ident.data for v in r))
    if unit is None:
        raise ModuleError("identity is missing from the endomorphism space")
    alg = Algebra(field, [f"f{i}" for i in range(d)], mult, unit)
    return alg, hs.basis


class Bimodule:
    """S-T-bimodule with explicit left/right action tensors.

    left_action[i] is the operator of the i-th S basis element, and
    right_action[j] the operator of the j-th T basis element; the two
    families must commute ((s.x).t = s.(x.t), checked on basis triples).
    """

    __slots__ = ("left_algebra", "right_algebra", "dim", "left_action",
                 "right_action", "distinguished", "labels")

    def __init__(self, left_algebra, right_algebra, dim, left_action,
                 right_action, distinguished=None, labels=None, validate=True):
        self.left_algebra = left_algebra
        self.right_algebra = right_algebra
        self.dim = dim
        field = left_algebra.field
        if right_algebra.field != field:
            raise AlgebraMismatch("bimodule sides over different fields")
        self.left_action = tuple(m if isinstance(m, Matrix) else Matrix(field, m, cols=dim)
                                 for m in left_action)
        self.right_action = tuple(m if isinstance(m, Matrix) else Matrix(field, m, cols=dim)
                                  for m in right_action)
        self.distinguished = None if distinguished is None else tuple(
            field.of(x) for x in distinguished)
        self.labels = tuple(labels) if labels is not None else tuple(
            f"m{i}" for i in range(dim))
        if validate:
            rep = check_bimodule(self)
            if not rep.ok:
                raise ModuleError(rep.describe())

    @property
    def field(self):
        return self.left_algebra.field

    def left_module(self):
        return Module(self.left_algebra, LEFT, self.dim, self.left_action, validate=False)

    def right_module(self):
        return Module(self.right_algebra, RIGHT, self.dim, self.right_action, validate=False)

    def left_act(self, scoords, vec):
        field = self.field
        out = [field.zero] * self.dim
        for i, c in enumerate(scoords):
            if c:
                img = self.left_action[i].apply(vec)
                out = [o + c * v for o, v in zip(out, img)]
        return tuple(field.norm(v) for v in out)

    def right_act(self, vec, tcoords):
        field = self.field
        out = [field.zero] * self.dim
        for j, c in enumerate(tcoords):
            if c:
                img = self.right_action[j].apply(vec)
                out = [o + c * v for o, v in zip(out, img)]
        return tuple(field.norm(v) for v in out)

    def left_operator(self, scoords):
        return _operator_of(self.left_action, scoords, self.field, self.dim)

    def right_operator(self, tcoords):
        return _operator_of(self.right_action, tcoords, self.field, self.dim)


@dataclass
class BimoduleReport:
    left_ok: bool
    right_ok: bool
    commute_ok: bool
    witness: tuple | None = None

    @property
    def ok(self):
        return self.left_ok and self.right_ok and self.commute_ok

    def describe(self):
        if self.ok:
            return "bimodule checks pass"
        if not self.left_ok:
            return f"left module law fails (witness {self.witness})"
        if not self.right_ok:
            return f"right module law fails (witness {self.witness})"
        return f"actions do not commute (witness {self.witness})"


def check_bimodule(b):
    """Validate both module laws and the commuting-actions law."""
    try:
        b.left_module().check()
    except ModuleError as e:
        return BimoduleReport(False, True, True, witness=(str(e),))
    try:
        b.right_module().check()
    except ModuleError as e:
        return BimoduleReport(True, False, True, witness=(str(e),))
    for i in range(b.left_algebra.dim):
        li = b.left_action[i]
        for j in range(b.right_algebra.dim):
            rj = b.right_action[j]
            if li @ rj != rj @ li:
                return BimoduleReport(True, True, False, witness=(i, j))
    return BimoduleReport(True, True, True)


def bimodule_via(f, g, validate=True):
    """The target ring of f and g as an f.source-g.source-bimodule.

    f: S -> A and g: T -> A must land in the same algebra; the actions are
    s.x = f(s) x and x.t = x g(t), and the distinguished element is 1_A.
    """
    if f.target is not g.target:
        raise AlgebraMismatch("bimodule_via needs morphisms into the same algebra")
    a = f.target
    left = [a.left_op(f.apply(f.source.basis_vector(i))) for i in range(f.source.dim)]
    right = [a.right_op(g.apply(g.source.basis_vector(j))) for j in range(g.source.dim)]
    return Bimodule(f.source, g.source, a.dim, left, right,
                    distinguished=a.unit, labels=a.basis_labels, validate=validate)


def tensor_over(t, s):
    """T (x)_R S for a right module t and a left module s over the same R.

    Returns the QuotientPresentation of the plain tensor space
    (dim t * dim s, flat index i*dim(s)+j) modulo the balancing relations
    (x.r)(x)y - x(x)(r.y) over all basis triples.
    """
    if t.side != RIGHT or s.side != LEFT:
        raise AlgebraMismatch("tensor_over wants (right module, left module)")
    if t.algebra is not s.algebra:
        if t.algebra.mult != s.algebra.mult or t.algebra.field != s.algebra.field:
            raise AlgebraMismatch("tensor_over needs modules over the same algebra")
    field = t.algebra.field
    dt, ds = t.dim, s.dim
    ambient = dt * ds
    relations = []
    for w in range(t.algebra.dim):
        rop = t.action[w]
        lop = s.action[w]
        for k in range(dt):
            krow = rop.data[k]
            for l in range(ds):
                rel = {}
                for k2, c in enumerate(krow):
                    if c:
                        rel[k2 * ds + l] = rel.get(k2 * ds + l, field.zero) + c
                lrow = lop.data[l]
                for l2, c in enumerate(lrow):
                    if c:
                        rel[k * ds + l2] = rel.get(k * ds + l2, field.zero) - c
                rel = {i: field.norm(v) for i, v in rel.items() if field.norm(v)}
                if rel:
                    relations.append(rel)
    return quotient_space(field, ambient, relations)


def tensor_vector(pres, u, v, ds):
    """Class of the simple tensor u (x) v in a tensor_over presentation."""
    sv = {}
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                if b:
                    sv[i * ds + j] = a * b
    return pres.project_sparse(sv)
