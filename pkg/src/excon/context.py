"""Exact contexts: verification, rigidity, and the standard constructions.

An exact context is a quadruple (lam: R->S, mu: R->T, M, m) with M an
S-T-bimodule and m in M such that

    0 -> R --(lam,mu)--> S (+) T --(s,t) |-> s.m - m.t--> M -> 0

is exact.  Verification is three rank computations; the certificate keeps
the lift data (solutions of x = s.m + m.t) that the noncommutative tensor
product needs later.

Constructions provided: from a rigid module morphism, from a ring
extension, from a Morita context, from a strictly pure pair of extensions
and from a Milnor square.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .linalg import (
    Matrix, SparseRref, SpanSolver, left_kernel, rank, row_space_basis,
    solve_left, unit_vec, zero_vec,
)
from .algebra import (
    Algebra, AlgebraError, AlgebraMorphism, make_algebra, product,
    subalgebra_from_spanning,
)
from .modules import (
    LEFT, RIGHT, Bimodule, Module, ModuleMorphism, bimodule_via, direct_sum,
    end_algebra, hom_space, module_via, quotient_module, regular_module,
    submodule, tensor_over, tensor_vector,
)
from .homology import is_ring_epimorphism


class NotExact(AlgebraError):
    def __init__(self, stage, witness=None):
        self.stage = stage
        self.witness = witness
        super().__init__(f"exactness fails at stage {stage!r}")


class InternalInconsistency(AlgebraError):
    pass


class NotRigid(AlgebraError):
    pass


class NotInjective(AlgebraError):
    pass


class DegenerateQuotient(AlgebraError):
    pass


class IncompatiblePairings(AlgebraError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"Morita pairings are incompatible at {witness}")


class NotIdeal(AlgebraError):
    pass


class NotBimoduleSplitting(AlgebraError):
    pass


class NeitherSurjective(AlgebraError):
    pass


@dataclass
class ExactnessCertificate:
    injective_rank: int
    diff_matrix: Matrix        # (s,t) |-> s.m - m.t, rows S block then T block
    sum_matrix: Matrix         # (s,t) |-> s.m + m.t
    lift: Matrix               # per M-basis vector a solution (s_x, t_x)
    sum_kernel: list           # kernel of the sum map (for well-definedness)


@dataclass
class ExactContext:
    lam: AlgebraMorphism
    mu: AlgebraMorphism
    m_bimodule: Bimodule
    m: tuple
    certificate: ExactnessCertificate
    provenance: tuple | None = None

    @property
    def r(self):
        return self.lam.source

    @property
    def s(self):
        return self.lam.target

    @property
    def t(self):
        return self.mu.target

    def dims(self):
        return (self.r.dim, self.s.dim, self.t.dim, self.m_bimodule.dim)

    def lift_of(self, xvec):
        """(s_x, t_x) with x = s_x . m + m . t_x, deterministic."""
        return self.certificate.lift.apply(xvec)


def _pair_matrix(lam, mu):
    """R -> S (+) T combined matrix, S block first."""
    field = lam.source.field
    rows = []
    for i in range(lam.source.dim):
        rows.append(tuple(lam.matrix.data[i]) + tuple(mu.matrix.data[i]))
    return Matrix(field, rows, cols=lam.target.dim + mu.target.dim)


def _difference_matrices(mb, m):
    """(difference, sum) matrices of (s,t) |-> s.m -+ m.t."""
    field = mb.field
    rows_d, rows_s = [], []
    for i in range(mb.left_algebra.dim):
        sm = mb.left_act(unit_vec(field, mb.left_algebra.dim, i), m)
        rows_d.append(sm)
        rows_s.append(sm)
    for j in range(mb.right_algebra.dim):
        mt = mb.right_act(m, unit_vec(field, mb.right_algebra.dim, j))
        rows_d.append(tuple(field.norm(-v) for v in mt))
        rows_s.append(mt)
    return (Matrix(field, rows_d, cols=mb.dim), Matrix(field, rows_s, cols=mb.dim))


def check_exact_context(lam, mu, m_bimodule, m, provenance=None):
    """Verify the defining exact sequence; returns a certified ExactContext.

    Raises NotExact(stage, witness) naming the first failing stage among
    injectivity, middle exactness and surjectivity.
    """
    r = lam.source
    if mu.source is not r and mu.source.mult != r.mult:
        raise AlgebraError("lam and mu must share their source")
    if m_bimodule.left_algebra is not lam.target or m_bimodule.right_algebra is not mu.target:
        raise AlgebraError("bimodule sides must be (target of lam, target of mu)")
    field = r.field
    m = tuple(field.of(x) for x in m)
    if len(m) != m_bimodule.dim:
        raise AlgebraError("distinguished element has wrong length")
    pair = _pair_matrix(lam, mu)
    ker = left_kernel(pair)
    if ker:
        raise NotExact("injectivity", witness=ker[0])
    diff, sm = _difference_matrices(m_bimodule, m)
    rk_diff = rank(diff)
    if rk_diff != m_bimodule.dim:
        eng = SparseRref(field, m_bimodule.dim)
        for row in diff.data:
            eng.add({c: v for c, v in enumerate(row) if v})
        witness = None
        for i in range(m_bimodule.dim):
            if eng.reduce({i: field.one}):
                witness = unit_vec(field, m_bimodule.dim, i)
                break
        raise NotExact("surjectivity", witness=witness)
    comp = pair @ diff
    for i in range(r.dim):
        if any(comp.data[i]):
            raise NotExact("middle", witness=unit_vec(field, r.dim, i))
    ker_dim = pair.cols - rk_diff
    if r.dim != ker_dim:
        # image of (lam, mu) is a proper subspace of ker(difference map)
        img = row_space_basis(field, pair.cols, [tuple(row) for row in pair.data])
        eng = SparseRref(field, pair.cols)
        for row in img:
            eng.add({c: v for c, v in enumerate(row) if v})
        witness = None
        for v in left_kernel(diff):
            if eng.reduce({c: x for c, x in enumerate(v) if x}):
                witness = v
                break
        raise NotExact("middle", witness=witness)
    lift_rows = []
    for x in range(m_bimodule.dim):
        sol = solve_left(sm, unit_vec(field, m_bimodule.dim, x))
        if sol is None:
            raise NotExact("surjectivity", witness=unit_vec(field, m_bimodule.dim, x))
        lift_rows.append(sol)
    cert = ExactnessCertificate(
        injective_rank=r.dim,
        diff_matrix=diff,
        sum_matrix=sm,
        lift=Matrix(field, lift_rows, cols=pair.cols),
        sum_kernel=left_kernel(sm),
    )
    return ExactContext(lam=lam, mu=mu, m_bimodule=m_bimodule, m=m,
                        certificate=cert, provenance=provenance)


# ---------------------------------------------------------------------------
# exact pairs (Lemma: gamma bijective <=> Coker(lam) (x)_R Coker(mu) = 0)

@dataclass
class ExactPairVerdict:
    is_pair: bool
    gamma_bijective: bool
    tensor_st_dim: int
    coker_tensor_dim: int

    def describe(self):
        if self.is_pair:
            return "exact pair (gamma: S(x)_RT -> M bijective)"
        return (f"not an exact pair: dim S(x)_RT = {self.tensor_st_dim}, "
                f"coker tensor dim = {self.coker_tensor_dim}")


def gamma_matrix(ctx, pres_st):
    """gamma on the S(x)_RT quotient basis: class(s (x) t) |-> s.m.t."""
    field = ctx.r.field
    mb = ctx.m_bimodule
    dt = ctx.t.dim
    rows = []
    for c in pres_st.basis_cols:
        i, j = divmod(c, dt)
        sm = mb.left_act(unit_vec(field, ctx.s.dim, i), ctx.m)
        rows.append(mb.right_act(sm, unit_vec(field, dt, j)))
    return Matrix(field, rows, cols=mb.dim)


def is_exact_pair(ctx):
    """Decide exact-pair-ness twice (gamma rank, cokernel tensor) and
    insist the answers agree."""
    field = ctx.r.field
    s_right = module_via(ctx.lam, RIGHT)
    t_left = module_via(ctx.mu, LEFT)
    pres_st = tensor_over(s_right, t_left)
    gm = gamma_matrix(ctx, pres_st)
    # gamma is defined on the plain tensor space and must factor through it
    mb = ctx.m_bimodule
    dt = ctx.t.dim
    plain_rows = []
    for i in range(ctx.s.dim):
        sm = mb.left_act(unit_vec(field, ctx.s.dim, i), ctx.m)
        for j in range(dt):
            plain_rows.append(mb.right_act(sm, unit_vec(field, dt, j)))
    plain = Matrix(field, plain_rows, cols=mb.dim)
    if plain != pres_st.projection @ gm:
        raise InternalInconsistency("gamma does not descend to S(x)_RT")
    gamma_bij = pres_st.dim == mb.dim and rank(gm) == mb.dim
    cok_s, _ = quotient_module(module_via(ctx.lam, RIGHT),
                               [tuple(r) for r in ctx.lam.matrix.data])
    cok_t, _ = quotient_module(module_via(ctx.mu, LEFT),
                               [tuple(r) for r in ctx.mu.matrix.data])
    cok_dim = tensor_over(cok_s, cok_t).dim if (cok_s.dim and cok_t.dim) else 0
    if gamma_bij != (cok_dim == 0):
        raise InternalInconsistency(
            f"gamma rank and cokernel tensor disagree: {gamma_bij} vs dim {cok_dim}")
    return ExactPairVerdict(is_pair=gamma_bij, gamma_bijective=gamma_bij,
                            tensor_st_dim=pres_st.dim, coker_tensor_dim=cok_dim)


# ---------------------------------------------------------------------------
# rigidity

@dataclass
class RigidityReport:
    source: Module
    target: Module
    matrix: Matrix
    holds: bool
    hom_dim: int
    span_dim: int
    witness: Matrix | None = None

    def describe(self):
        if self.holds:
            return f"rigid (End(Y)f + fEnd(X) fills all {self.hom_dim} of Hom(Y,X))"
        return (f"not rigid: End(Y)f + fEnd(X) has dim {self.span_dim} "
                f"< dim Hom(Y,X) = {self.hom_dim}")


def is_rigid(f):
    """Rigidity of a module morphism f: Y -> X.

    f is rigid iff Hom(Y,X) = End(Y) f + f End(X); the report carries a
    hom-space witness outside the span when it fails (the identity map is
    preferred as a witness when Y = X and it lies outside).
    """
    y, x = f.source, f.target
    fm = f.matrix
    field = y.algebra.field
    homs = hom_space(y, x)
    endy = hom_space(y, y)
    endx = hom_space(x, x)
    width = y.dim * x.dim
    eng = SparseRref(field, width)
    for g in endy.basis:
        m = g @ fm
        eng.add({i: v for i, v in enumerate(_flat(m)) if v})
    for h in endx.basis:
        m = fm @ h
        eng.add({i: v for i, v in enumerate(_flat(m)) if v})
    span_dim = eng.rank
    holds = span_dim == homs.dim
    witness = None
    if not holds:
        if y.dim == x.dim and y.action == x.action:
            ident = Matrix.identity(field, y.dim)
            if eng.reduce({i: v for i, v in enumerate(_flat(ident)) if v}):
                witness = ident
        if witness is None:
            for cand in homs.basis:
                if eng.reduce({i: v for i, v in enumerate(_flat(cand)) if v}):
                    witness = cand
                    break
    return RigidityReport(source=y, target=x, matrix=fm, holds=holds,
                          hom_dim=homs.dim, span_dim=span_dim, witness=witness)


def _flat(m):
    return tuple(v for row in m.data for v in row)


def context_from_rigid(f):
    """Exact context induced by a rigid morphism f: Y -> X.

    S = End(Y), T = End(X), M = Hom(Y,X) with composition actions, m = f,
    and R is the pullback ring K = {(s,t) : s f = f t}.
    """
    rep = is_rigid(f)
    if not rep.holds:
        raise NotRigid(rep.describe())
    y, x = f.source, f.target
    field = y.algebra.field
    s_alg, endy_mats = end_algebra(y)
    t_alg, endx_mats = end_algebra(x)
    homs = hom_space(y, x)
    hom_solver = SpanSolver(field, y.dim * x.dim, [_flat(h) for h in homs.basis])
    dm = homs.dim
    left_action = []
    for g in endy_mats:
        rows = [hom_solver.coords(_flat(g @ h)) for h in homs.basis]
        left_action.append(Matrix(field, rows, cols=dm))
    right_action = []
    for h in endx_mats:
        rows = [hom_solver.coords(_flat(hb @ h)) for hb in homs.basis]
        right_action.append(Matrix(field, rows, cols=dm))
    mcoords = hom_solver.coords(_flat(f.matrix))
    if mcoords is None:
        raise InternalInconsistency("f is not in its own hom space")
    # left_action rows currently map basis j -> coords of g @ h_j, which is
    # exactly the row-convention operator of g acting on M.
    mb = Bimodule(s_alg, t_alg, dm, left_action, right_action,
                  distinguished=mcoords)
    # pullback ring inside End(Y) x End(X)
    p_alg = product(s_alg, t_alg)
    rows = []
    for g in endy_mats:
        rows.append(hom_solver.coords(_flat(g @ f.matrix)))
    for h in endx_mats:
        rows.append(tuple(field.norm(-v)
                          for v in hom_solver.coords(_flat(f.matrix @ h))))
    dmat = Matrix(field, rows, cols=dm)
    kernel = left_kernel(dmat)
    r_alg, incl = subalgebra_from_spanning(p_alg, kernel)
    ds = s_alg.dim
    proj_s = Matrix(field, [r[:ds] for r in incl.matrix.data], cols=ds)
    proj_t = Matrix(field, [r[ds:] for r in incl.matrix.data], cols=t_alg.dim)
    lam = AlgebraMorphism(r_alg, s_alg, proj_s)
    mu = AlgebraMorphism(r_alg, t_alg, proj_t)
    return check_exact_context(lam, mu, mb, mcoords,
                               provenance=("rigid", (y, x, f)))


# ---------------------------------------------------------------------------
# extensions R -> S

@dataclass
class ExtensionData:
    s_as_r_module: Module
    quotient_module: Module
    quotient_pres: object
    s_prime: Algebra
    s_prime_mats: list
    hom_basis: list
    lam: AlgebraMorphism
    lam_prime: AlgebraMorphism


def context_from_extension(lam):
    """Exact context (lam, lam', Hom_R(S, S/R), pi) of an injective lam.

    lam' sends r to right multiplication by r on S/R; the degenerate case
    R = S is rejected (DegenerateQuotient).
    """
    if not lam.is_injective():
        raise NotInjective("lam must be injective")
    r, s = lam.source, lam.target
    field = r.field
    s_mod = module_via(lam, LEFT)
    image_rows = [tuple(row) for row in lam.matrix.data]
    sr_mod, pres = quotient_module(s_mod, image_rows)
    if sr_mod.dim == 0:
        raise DegenerateQuotient("R = S gives a zero quotient")
    s_prime, endo_mats = end_algebra(sr_mod)
    endo_solver = SpanSolver(field, sr_mod.dim * sr_mod.dim,
                             [_flat(m) for m in endo_mats])
    lp_rows = []
    for i in range(r.dim):
        op = pres.section @ s.right_op(lam.apply(r.basis_vector(i))) @ pres.projection
        coords = endo_solver.coords(_flat(op))
        if coords is None:
            raise InternalInconsistency("right multiplication is not R-linear")
        lp_rows.append(coords)
    lam_prime = AlgebraMorphism(r, s_prime, Matrix(field, lp_rows, cols=s_prime.dim))
    homs = hom_space(s_mod, sr_mod)
    hom_solver = SpanSolver(field, s.dim * sr_mod.dim, [_flat(h) for h in homs.basis])
    dm = homs.dim
    left_action = []
    for i in range(s.dim):
        rop = s.right_op(s.basis_vector(i))
        rows = [hom_solver.coords(_flat(rop @ h)) for h in homs.basis]
        left_action.append(Matrix(field, rows, cols=dm))
    right_action = []
    for g in endo_mats:
        rows = [hom_solver.coords(_flat(h @ g)) for h in homs.basis]
        right_action.append(Matrix(field, rows, cols=dm))
    pi_coords = hom_solver.coords(_flat(pres.projection))
    if pi_coords is None:
        raise InternalInconsistency("pi is not R-linear")
    mb = Bimodule(s, s_prime, dm, left_action, right_action, distinguished=pi_coords)
    data = ExtensionData(s_as_r_module=s_mod, quotient_module=sr_mod,
                         quotient_pres=pres, s_prime=s_prime,
                         s_prime_mats=endo_mats, hom_basis=homs.basis,
                         lam=lam, lam_prime=lam_prime)
    return check_exact_context(lam, lam_prime, mb, pi_coords,
                               provenance=("extension", data))


# ---------------------------------------------------------------------------
# Morita context rings

@dataclass
class MoritaData:
    a: Algebra
    c: Algebra
    x: Bimodule            # A-C
    y: Bimodule            # C-A
    f: list                # f[i][j] = coords in A of x_i . y_j
    g: list                # g[j][i] = coords in C of y_j . x_i
    gamma: Algebra | None = None
    blocks: dict | None = None


def _pairing_f(md, xv, yv):
    field = md.a.field
    acc = [field.zero] * md.a.dim
    for i, ci in enumerate(xv):
        if ci:
            for j, cj in enumerate(yv):
                if cj:
                    acc = [o + ci * cj * v for o, v in zip(acc, md.f[i][j])]
    return tuple(field.norm(v) for v in acc)


def _pairing_g(md, yv, xv):
    field = md.c.field
    acc = [field.zero] * md.c.dim
    for j, cj in enumerate(yv):
        if cj:
            for i, ci in enumerate(xv):
                if ci:
                    acc = [o + cj * ci * v for o, v in zip(acc, md.g[j][i])]
    return tuple(field.norm(v) for v in acc)


def _check_morita_compat(md):
    field = md.a.field
    dx, dy = md.x.dim, md.y.dim
    for i in range(dx):
        xv = unit_vec(field, dx, i)
        for j in range(dy):
            yv = unit_vec(field, dy, j)
            for i2 in range(dx):
                x2 = unit_vec(field, dx, i2)
                lhs = md.x.left_act(_pairing_f(md, xv, yv), x2)
                rhs = md.x.right_act(xv, _pairing_g(md, yv, x2))
                if lhs != rhs:
                    raise IncompatiblePairings(("(xy)x' = x(yx')", i, j, i2))
    for j in range(dy):
        yv = unit_vec(field, dy, j)
        for i in range(dx):
            xv = unit_vec(field, dx, i)
            for j2 in range(dy):
                y2 = unit_vec(field, dy, j2)
                lhs = md.y.left_act(_pairing_g(md, yv, xv), y2)
                rhs = md.y.right_act(yv, _pairing_f(md, xv, y2))
                if lhs != rhs:
                    raise IncompatiblePairings(("(yx)y' = y(xy')", j, i, j2))


def morita_context_ring(md):
    """The Morita context ring Gamma = (A X; Y C) with the usual block
    multiplication; blocks ordered A, X, Y, C."""
    field = md.a.field
    da, dx, dy, dc = md.a.dim, md.x.dim, md.y.dim, md.c.dim
    dim = da + dx + dy + dc
    off_a, off_x, off_y, off_c = 0, da, da + dx, da + dx + dy
    labels = ([f"a:{l}" for l in md.a.basis_labels]
              + [f"x:{l}" for l in md.x.labels]
              + [f"y:{l}" for l in md.y.labels]
              + [f"c:{l}" for l in md.c.basis_labels])

    def emb(off, vec):
        out = [field.zero] * dim
        for t, v in enumerate(vec):
            out[off + t] = v
        return out

    def addv(u, v):
        return [a + b for a, b in zip(u, v)]

    zero = tuple(field.zero for _ in range(dim))
    mult = [[zero] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            acc = [field.zero] * dim
            bi, bj = i, j
            # decode blocks
            if bi < off_x:
                ablock, ai = "a", bi
            elif bi < off_y:
                ablock, ai = "x", bi - off_x
            elif bi < off_c:
                ablock, ai = "y", bi - off_y
            else:
                ablock, ai = "c", bi - off_c
            if bj < off_x:
                bblock, bjj = "a", bj
            elif bj < off_y:
                bblock, bjj = "x", bj - off_x
            elif bj < off_c:
                bblock, bjj = "y", bj - off_y
            else:
                bblock, bjj = "c", bj - off_c
            key = (ablock, bblock)
            fa = field
            if key == ("a", "a"):
                acc = emb(off_a, md.a.mult[ai][bjj])
            elif key == ("a", "x"):
                acc = emb(off_x, md.x.left_act(unit_vec(fa, da, ai),
                                               unit_vec(fa, dx, bjj)))
            elif key == ("x", "c"):
                acc = emb(off_x, md.x.right_act(unit_vec(fa, dx, ai),
                                                unit_vec(fa, dc, bjj)))
            elif key == ("x", "y"):
                acc = emb(off_a, md.f[ai][bjj])
            elif key == ("y", "x"):
                acc = emb(off_c, md.g[ai][bjj])
            elif key == ("y", "a"):
                acc = emb(off_y, md.y.right_act(unit_vec(fa, dy, ai),
                                                unit_vec(fa, da, bjj)))
            elif key == ("c", "y"):
                acc = emb(off_y, md.y.left_act(unit_vec(fa, dc, ai),
                                               unit_vec(fa, dy, bjj)))
            elif key == ("c", "c"):
                acc = emb(off_c, md.c.mult[ai][bjj])
            mult[i][j] = tuple(acc)
    unit = addv(emb(off_a, md.a.unit), emb(off_c, md.c.unit))
    gamma = make_algebra(field, labels, mult, tuple(unit))
    blocks = {"a": (off_a, da), "x": (off_x, dx), "y": (off_y, dy), "c": (off_c, dc)}
    return gamma, blocks


def context_from_morita(a, c, x, y, f, g):
    """Exact context of a Morita context (A, C, X, Y, f, g).

    R is the diagonal, S the upper and T the lower triangular part of the
    Morita context ring Gamma; M = Gamma, m = 1.  Returns (context, data)
    where data feeds the closed-form oracle.
    """
    field = a.field
    md = MoritaData(a=a, c=c, x=x, y=y,
                    f=[[tuple(field.of(v) for v in ent) for ent in row] for row in f],
                    g=[[tuple(field.of(v) for v in ent) for ent in row] for row in g])
    if x.left_algebra is not a or x.right_algebra is not c:
        raise AlgebraError("X must be an A-C-bimodule")
    if y.left_algebra is not c or y.right_algebra is not a:
        raise AlgebraError("Y must be a C-A-bimodule")
    _check_morita_compat(md)
    try:
        gamma, blocks = morita_context_ring(md)
    except AlgebraError as e:
        raise IncompatiblePairings(("Gamma associativity", str(e)))
    md.gamma = gamma
    md.blocks = blocks
    field = a.field
    da, dx, dy, dc = a.dim, x.dim, y.dim, c.dim
    off_x, off_y, off_c = blocks["x"][0], blocks["y"][0], blocks["c"][0]
    span_r = [gamma.basis_vector(i) for i in range(da)] + \
             [gamma.basis_vector(off_c + i) for i in range(dc)]
    span_s = [gamma.basis_vector(i) for i in range(da)] + \
             [gamma.basis_vector(off_x + i) for i in range(dx)] + \
             [gamma.basis_vector(off_c + i) for i in range(dc)]
    span_t = [gamma.basis_vector(i) for i in range(da)] + \
             [gamma.basis_vector(off_y + i) for i in range(dy)] + \
             [gamma.basis_vector(off_c + i) for i in range(dc)]
    r_alg, r_incl = subalgebra_from_spanning(gamma, span_r)
    s_alg, s_incl = subalgebra_from_spanning(gamma, span_s)
    t_alg, t_incl = subalgebra_from_spanning(gamma, span_t)
    lam = AlgebraMorphism(r_alg, s_alg, _restrict_through(r_incl, s_incl))
    mu = AlgebraMorphism(r_alg, t_alg, _restrict_through(r_incl, t_incl))
    mb = bimodule_via(s_incl, t_incl)
    ctx = check_exact_context(lam, mu, mb, gamma.unit,
                              provenance=("morita", md))
    return ctx, md


def _restrict_through(incl_small, incl_big):
    """Matrix of the inclusion small -> big when both embed in the same
    ambient algebra and span(small) is inside span(big)."""
    field = incl_small.source.field
    solver = SpanSolver(field, incl_big.target.dim,
                        [tuple(r) for r in incl_big.matrix.data])
    rows = []
    for r in incl_small.matrix.data:
        coords = solver.coords(tuple(r))
        if coords is None:
            raise AlgebraError("small algebra does not sit inside the big one")
        rows.append(coords)
    return Matrix(field, rows, cols=incl_big.source.dim)


# ---------------------------------------------------------------------------
# strictly pure extensions

@dataclass
class PureData:
    r: Algebra
    s: Algebra
    t: Algebra
    iota: AlgebraMorphism     # R -> S
    kappa: AlgebraMorphism    # R -> T
    x_rows: list              # ideal complement basis in S
    y_rows: list              # ideal complement basis in T
    m_algebra: Algebra | None = None
    s_emb: AlgebraMorphism | None = None
    t_emb: AlgebraMorphism | None = None


def _check_pure_side(r, alg, incl, comp_rows, which):
    from .linalg import span_rank
    field = r.field
    comp = row_space_basis(field, alg.dim, comp_rows)
    if len(comp) != len(comp_rows):
        raise NotBimoduleSplitting(f"{which}-complement rows are dependent")
    all_rows = [tuple(row) for row in incl.matrix.data] + comp
    if span_rank(field, alg.dim, all_rows) != alg.dim or \
            r.dim + len(comp) != alg.dim:
        raise NotBimoduleSplitting(f"{which}: algebra is not R (+) complement")
    solver = SpanSolver(field, alg.dim, comp)
    for i in range(alg.dim):
        b = alg.basis_vector(i)
        for xrow in comp:
            if solver.coords(alg.mul(b, xrow)) is None:
                raise NotIdeal(f"{which}: complement not a left ideal at basis {i}")
            if solver.coords(alg.mul(xrow, b)) is None:
                raise NotIdeal(f"{which}: complement not a right ideal at basis {i}")
    return comp, solver


def context_from_strictly_pure(r, x_data, y_data):
    """Exact context of two strictly pure extensions.

    x_data = (S, iota: R->S, X basis rows), y_data likewise for T.  The
    complement M = R (+) X (+) Y carries the multiplication with vanishing
    X-Y cross terms; m = 1.
    """
    s, iota, x_rows = x_data
    t, kappa, y_rows = y_data
    field = r.field
    x_rows = [tuple(field.of(v) for v in row) for row in x_rows]
    y_rows = [tuple(field.of(v) for v in row) for row in y_rows]
    xcomp, xsolver = _check_pure_side(r, s, iota, x_rows, "X")
    ycomp, ysolver = _check_pure_side(r, t, kappa, y_rows, "Y")
    dr, dx, dy = r.dim, len(xcomp), len(ycomp)
    dim = dr + dx + dy
    labels = ([f"r:{l}" for l in r.basis_labels]
              + [f"x{i}" for i in range(dx)] + [f"y{i}" for i in range(dy)])

    def emb(off, vec):
        out = [field.zero] * dim
        for i, v in enumerate(vec):
            out[off + i] = v
        return out

    def s_decompose(vec):
        """split an element of S into (R part, X part)."""
        solver = SpanSolver(field, s.dim,
                            [tuple(row) for row in iota.matrix.data] + xcomp)
        co = solver.coords(vec)
        return co[:dr], co[dr:]

    def t_decompose(vec):
        solver = SpanSolver(field, t.dim,
                            [tuple(row) for row in kappa.matrix.data] + ycomp)
        co = solver.coords(vec)
        return co[:dr], co[dr:]

    zero = tuple(field.zero for _ in range(dim))
    mult = [[zero] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            if i < dr and j < dr:
                mult[i][j] = tuple(emb(0, r.mult[i][j]))
            elif i < dr and j < dr + dx:
                prod = s.mul(iota.apply(unit_vec(field, dr, i)), xcomp[j - dr])
                mult[i][j] = tuple(emb(dr, xsolver.coords(prod)))
            elif i < dr:
                prod = t.mul(kappa.apply(unit_vec(field, dr, i)), ycomp[j - dr - dx])
                mult[i][j] = tuple(emb(dr + dx, ysolver.coords(prod)))
            elif i < dr + dx and j < dr:
                prod = s.mul(xcomp[i - dr], iota.apply(unit_vec(field, dr, j)))
                mult[i][j] = tuple(emb(dr, xsolver.coords(prod)))
            elif i < dr + dx and j < dr + dx:
                prod = s.mul(xcomp[i - dr], xcomp[j - dr])
                mult[i][j] = tuple(emb(dr, xsolver.coords(prod)))
            elif i >= dr + dx and j < dr:
                prod = t.mul(ycomp[i - dr - dx], kappa.apply(unit_vec(field, dr, j)))
                mult[i][j] = tuple(emb(dr + dx, ysolver.coords(prod)))
            elif i >= dr + dx and j >= dr + dx:
                prod = t.mul(ycomp[i - dr - dx], ycomp[j - dr - dx])
                mult[i][j] = tuple(emb(dr + dx, ysolver.coords(prod)))
            # X.Y and Y.X cross terms vanish by definition
    m_alg = make_algebra(field, labels, mult, tuple(emb(0, r.unit)))
    # embeddings S -> M and T -> M by decomposition
    s_rows = []
    for i in range(s.dim):
        rp, xp = s_decompose(s.basis_vector(i))
        s_rows.append(tuple(emb(0, rp)[t] + emb(dr, xp)[t] for t in range(dim)))
    t_rows = []
    for i in range(t.dim):
        rp, yp = t_decompose(t.basis_vector(i))
        t_rows.append(tuple(emb(0, rp)[t2] + emb(dr + dx, yp)[t2] for t2 in range(dim)))
    s_emb = AlgebraMorphism(s, m_alg, Matrix(field, s_rows, cols=dim))
    t_emb = AlgebraMorphism(t, m_alg, Matrix(field, t_rows, cols=dim))
    mb = bimodule_via(s_emb, t_emb)
    pd = PureData(r=r, s=s, t=t, iota=iota, kappa=kappa, x_rows=xcomp,
                  y_rows=ycomp, m_algebra=m_alg, s_emb=s_emb, t_emb=t_emb)
    ctx = check_exact_context(iota, kappa, mb, m_alg.unit,
                              provenance=("pure", pd))
    return ctx, pd


# ---------------------------------------------------------------------------
# Milnor squares

def context_from_milnor(j1, j2):
    """Exact context of a Milnor square: Lambda is the pull-back of
    j1: L1 -> L' and j2: L2 -> L', at least one of them surjective."""
    if j1.target is not j2.target:
        raise AlgebraError("j1 and j2 must share their target")
    if not (j1.is_surjective() or j2.is_surjective()):
        raise NeitherSurjective("neither j1 nor j2 is surjective")
    l1, l2, lp = j1.source, j2.source, j1.target
    field = l1.field
    p_alg = product(l1, l2)
    rows = [tuple(row) for row in j1.matrix.data] + \
           [tuple(field.norm(-v) for v in row) for row in j2.matrix.data]
    dmat = Matrix(field, rows, cols=lp.dim)
    pullback = left_kernel(dmat)
    lam_alg, incl = subalgebra_from_spanning(p_alg, pullback)
    d1 = l1.dim
    i1 = AlgebraMorphism(lam_alg, l1,
                         Matrix(field, [r[:d1] for r in incl.matrix.data], cols=d1))
    i2 = AlgebraMorphism(lam_alg, l2,
                         Matrix(field, [r[d1:] for r in incl.matrix.data], cols=l2.dim))
    mb = bimodule_via(j1, j2)
    return check_exact_context(i1, i2, mb, lp.unit,
                               provenance=("milnor", (j1, j2)))


# ---------------------------------------------------------------------------
# tau comparison for extension contexts

@dataclass
class TauReport:
    lambda_is_ring_epi: bool
    hom_quotient_to_s_dim: int
    tau_is_morphism: bool
    tau_bijective: bool
    b_dim: int
    lambda_end_dim: int

    def describe(self):
        return (f"Hom_R(S/R,S) dim {self.hom_quotient_to_s_dim}; tau "
                f"{'bijective' if self.tau_bijective else 'not bijective'}")


def tau_comparison(ctx, ring_epi=None):
    """Compare the triangular ring (S, S(x)_RS'; 0, S') with End_R(S+S/R).

    Only meaningful for contexts built by context_from_extension.  When
    lam is a ring epimorphism the report asserts Hom_R(S/R, S) = 0 and
    that tau is bijective.
    """
    if not ctx.provenance or ctx.provenance[0] != "extension":
        raise AlgebraError("tau_comparison needs an extension-built context")
    data = ctx.provenance[1]
    lam = data.lam
    field = lam.source.field
    s, sp = lam.target, data.s_prime
    s_mod, sr_mod, pres = data.s_as_r_module, data.quotient_module, data.quotient_pres
    if ring_epi is None:
        ring_epi = is_ring_epimorphism(lam).is_epi
    u = direct_sum(s_mod, sr_mod)
    lam_end, u_mats = end_algebra(u)
    u_solver = SpanSolver(field, u.dim * u.dim, [_flat(m) for m in u_mats])
    # tensor S (x)_R S' as an S-S'-bimodule
    spr_left = Module(lam.source, LEFT, sp.dim,
                      [sp.left_op(data.lam_prime.apply(lam.source.basis_vector(i)))
                       for i in range(lam.source.dim)], validate=False)
    pres2 = tensor_over(module_via(lam, RIGHT), spr_left)
    dten = pres2.dim
    left_action = []
    for i in range(s.dim):
        op_plain = _kron_left(s.left_op(s.basis_vector(i)), sp.dim, field)
        left_action.append(pres2.section @ op_plain @ pres2.projection)
    right_action = []
    for j in range(sp.dim):
        op_plain = _kron_right(sp.right_op(sp.basis_vector(j)), s.dim, field)
        right_action.append(pres2.section @ op_plain @ pres2.projection)
    tb = Bimodule(s, sp, dten, left_action, right_action)
    from .algebra import triangular_algebra
    tri = triangular_algebra(s, sp, tb)
    btilde = tri.algebra
    ds, dsr = s_mod.dim, sr_mod.dim
    du = ds + dsr

    def endo_block(mss, msq, mqs, mqq):
        rows = []
        for i in range(ds):
            rows.append(tuple(mss.data[i]) + tuple(msq.data[i]))
        for i in range(dsr):
            rows.append(tuple(mqs.data[i]) + tuple(mqq.data[i]))
        return Matrix(field, rows, cols=du)

    zss = Matrix.zero(field, ds, ds)
    zsq = Matrix.zero(field, ds, dsr)
    zqs = Matrix.zero(field, dsr, ds)
    zqq = Matrix.zero(field, dsr, dsr)
    tau_rows = []
    ok = True
    for i in range(btilde.dim):
        if i < s.dim:
            op = endo_block(s.right_op(s.basis_vector(i)), zsq, zqs, zqq)
        elif i < s.dim + dten:
            plain = pres2.lift(unit_vec(field, dten, i - s.dim))
            # gamma(u (x) g) = (.u) then pi then g
            acc = Matrix.zero(field, ds, dsr)
            for c, v in enumerate(plain):
                if v:
                    ui, gj = divmod(c, sp.dim)
                    gm = data.s_prime_mats[gj]
                    mat = s.right_op(s.basis_vector(ui)) @ pres.projection @ gm
                    acc = Matrix(field, [[field.norm(a + v * b) for a, b in zip(ra, rb)]
                                         for ra, rb in zip(acc.data, mat.data)], cols=dsr)
            op = endo_block(zss, acc, zqs, zqq)
        else:
            gm = data.s_prime_mats[i - s.dim - dten]
            op = endo_block(zss, zsq, zqs, gm)
        coords = u_solver.coords(_flat(op))
        if coords is None:
            ok = False
            break
        tau_rows.append(coords)
    hom_qs = hom_space(sr_mod, s_mod)
    tau_bij = False
    tau_is_morphism = False
    if ok:
        tau = Matrix(field, tau_rows, cols=lam_end.dim)
        from .algebra import check_morphism, AlgebraMorphism as AM
        cand = AM(btilde, lam_end, tau, validate=False)
        tau_is_morphism = check_morphism(cand).ok
        tau_bij = btilde.dim == lam_end.dim and rank(tau) == lam_end.dim
    rep = TauReport(lambda_is_ring_epi=ring_epi,
                    hom_quotient_to_s_dim=hom_qs.dim,
                    tau_is_morphism=tau_is_morphism,
                    tau_bijective=tau_bij,
                    b_dim=btilde.dim, lambda_end_dim=lam_end.dim)
    if ring_epi and (hom_qs.dim != 0 or not tau_bij or not tau_is_morphism):
        raise InternalInconsistency(
            "ring-epi case must give Hom_R(S/R,S)=0 and bijective tau: " + rep.describe())
    return rep


def _kron_left(opmat, other_dim, field):
    """Operator u (x) g |-> (op u) (x) g on flat indices u*other_dim+g."""
    n = opmat.rows
    dim = n * other_dim
    rows = []
    for u in range(n):
        for g in range(other_dim):
            vec = [field.zero] * dim
            for u2, v in enumerate(opmat.data[u]):
                if v:
                    vec[u2 * other_dim + g] = v
            rows.append(vec)
    return Matrix(field, rows, cols=dim)


def _kron_right(opmat, other_dim, field):
    """Operator u (x) g |-> u (x) (op g) on flat indices u*n+g."""
    n = opmat.rows
    dim = other_dim * n
    rows = []
    for u in range(other_dim):
        for g in range(n):
            vec = [field.zero] * dim
            for g2, v in enumerate(opmat.data[g]):
                if v:
                    vec[u * n + g2] = v
            rows.append(vec)
    return Matrix(field, rows, cols=dim)


# ---------------------------------------------------------------------------
# the canonical rigid morphism attached to a context

def canonical_rigid_morphism(ctx):
    """The right-multiplication-by-m map Be1 -> Be2 over B = (S M; 0 T).

    The paper's first example of a rigid morphism; cmd_check verifies its
    rigidity as part of the certificate.
    """
    from .algebra import triangular_algebra
    tri = triangular_algebra(ctx.s, ctx.t, ctx.m_bimodule)
    b = tri.algebra
    field = b.field
    reg = regular_module(b, LEFT)
    ds, dm, dt = ctx.s.dim, ctx.m_bimodule.dim, ctx.t.dim
    be1_rows = [b.basis_vector(i) for i in range(ds)]
    be2_rows = [b.basis_vector(ds + i) for i in range(dm + dt)]
    be1, incl1 = submodule(reg, be1_rows)
    be2, incl2 = submodule(reg, be2_rows)
    mhat = [field.zero] * b.dim
    for i, v in enumerate(ctx.m):
        mhat[ds + i] = v
    rop = b.right_op(tuple(mhat))
    solver = SpanSolver(field, b.dim, [tuple(r) for r in incl2.data])
    rows = []
    for r in incl1.data:
        coords = solver.coords(rop.apply(tuple(r)))
        if coords is None:
            raise InternalInconsistency("right multiplication leaves Be2")
        rows.append(coords)
    return ModuleMorphism(be1, be2, Matrix(field, rows, cols=be2.dim)), tri
