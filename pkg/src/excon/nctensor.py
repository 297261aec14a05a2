"""Noncommutative tensor products, their oracles, theta and the criteria.

The ring on T (x)_R S carries the product

    (t1 (x) s1) o (t2 (x) s2) = t1 . delta(s1 (x) t2) . s2,

where delta(s (x) t) = beta(s.m.t) and beta sends x = s_x.m + m.t_x to
class(1 (x) s_x) + class(t_x (x) 1).  Because the quotient basis of
T (x)_R S consists of single plain tensors (non-pivot coordinates), the
structure constants come out of a sparse basis-pair loop.

Everything constructed here is verified on the spot: the ring axioms of
the product, rho/phi being morphisms, beta being a bimodule map with
beta(m) = 1, and theta: B -> C being a morphism.  Failures raise
InternalInconsistency, since on a verified exact context they can only
indicate a bug.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import Matrix, SpanSolver, rank, unit_vec, zero_vec
from .algebra import (
    Algebra, AlgebraError, AlgebraMorphism, MorphismInvalid, make_algebra,
    matrix_algebra, triangular_algebra,
)
from .modules import (
    LEFT, RIGHT, Bimodule, Module, bimodule_via, module_via, regular_module,
    submodule, tensor_over, tensor_vector,
)
from .homology import (
    is_homological_up_to, is_ring_epimorphism, projective_dimension, tor,
)
from .context import ExactContext, InternalInconsistency, is_exact_pair


class PreconditionFailed(AlgebraError):
    def __init__(self, which):
        self.which = which
        super().__init__(f"precondition failed: {which}")


class OracleMismatch(AlgebraError):
    pass


@dataclass
class NcTensorRing:
    context: ExactContext
    algebra: Algebra          # the ring on T (x)_R S
    pres: object              # quotient presentation of T (x)_k S
    rho: AlgebraMorphism      # S -> boxtimes
    phi: AlgebraMorphism      # T -> boxtimes
    beta: Matrix              # M -> boxtimes
    delta: Matrix             # S (x)_R T -> boxtimes (on the quotient basis)
    pres_st: object           # quotient presentation of S (x)_k T

    def beta_of(self, xvec):
        return self.beta.apply(xvec)


def build_beta(ctx, pres=None):
    """beta: M -> T (x)_R S, x = s_x.m + m.t_x |-> 1 (x) s_x + t_x (x) 1.

    Well-definedness is re-verified on the whole kernel of the lift map:
    every (s,t) with s.m + m.t = 0 must map to zero in the quotient.
    """
    field = ctx.r.field
    if pres is None:
        pres = tensor_over(module_via(ctx.mu, RIGHT), module_via(ctx.lam, LEFT))
    ds, dt = ctx.s.dim, ctx.t.dim
    one_t, one_s = ctx.t.unit, ctx.s.unit

    def image_of_pair(svec, tvec):
        a = tensor_vector(pres, one_t, svec, ds)
        b = tensor_vector(pres, tvec, one_s, ds)
        return tuple(field.norm(x + y) for x, y in zip(a, b))

    rows = []
    for u in range(ctx.m_bimodule.dim):
        lift = ctx.lift_of(unit_vec(field, ctx.m_bimodule.dim, u))
        rows.append(image_of_pair(lift[:ds], lift[ds:]))
    for kv in ctx.certificate.sum_kernel:
        img = image_of_pair(kv[:ds], kv[ds:])
        if any(img):
            raise InternalInconsistency(
                "beta is not well defined: a lift ambiguity changes the image")
    return Matrix(field, rows, cols=pres.dim), pres


def build_nc_tensor(ctx):
    """The noncommutative tensor product ring of a verified exact context,
    with rho, phi, beta, delta and full on-the-spot verification."""
    field = ctx.r.field
    s, t, mb = ctx.s, ctx.t, ctx.m_bimodule
    ds, dt, dm = s.dim, t.dim, mb.dim
    beta, pres = build_beta(ctx)
    qd = pres.dim
    # delta on plain generators, lifted to sparse plain vectors
    basis_cols = pres.basis_cols
    delta_plain = {}
    for j in range(ds):
        sm = mb.left_act(unit_vec(field, ds, j), ctx.m)
        for kk in range(dt):
            w = mb.right_act(sm, unit_vec(field, dt, kk))
            q = beta.apply(w)
            sv = {}
            for a, v in enumerate(q):
                if v:
                    sv[basis_cols[a]] = v
            delta_plain[(j, kk)] = sv
    t_sp = t._sparse
    s_sp = s._sparse

    def lmul_t(i, sv):
        out = {}
        for idx, v in sv.items():
            kk, ll = divmod(idx, ds)
            for k2, c in t_sp[i][kk]:
                key = k2 * ds + ll
                out[key] = out.get(key, field.zero) + c * v
        return out

    def rmul_s(l, sv):
        out = {}
        for idx, v in sv.items():
            kk, ll = divmod(idx, ds)
            for l2, c in s_sp[ll][l]:
                key = kk * ds + l2
                out[key] = out.get(key, field.zero) + c * v
        return out

    def product_of_generators(i, j, kk, ll):
        sv = delta_plain[(j, kk)]
        return pres.project_sparse(rmul_s(ll, lmul_t(i, sv)))

    mult = []
    for a in range(qd):
        i, j = divmod(basis_cols[a], ds)
        row = []
        for b in range(qd):
            kk, ll = divmod(basis_cols[b], ds)
            row.append(product_of_generators(i, j, kk, ll))
        mult.append(row)
    unit = tensor_vector(pres, t.unit, s.unit, ds)
    labels = []
    for a in range(qd):
        i, j = divmod(basis_cols[a], ds)
        labels.append(f"{t.basis_labels[i]}(x){s.basis_labels[j]}")
    try:
        box = make_algebra(field, labels, mult, unit)
    except AlgebraError as e:
        raise InternalInconsistency(f"tensor ring axioms fail: {e}")
    rho_rows = [tensor_vector(pres, t.unit, unit_vec(field, ds, j), ds)
                for j in range(ds)]
    phi_rows = [tensor_vector(pres, unit_vec(field, dt, i), s.unit, ds)
                for i in range(dt)]
    try:
        rho = AlgebraMorphism(s, box, Matrix(field, rho_rows, cols=qd))
        phi = AlgebraMorphism(t, box, Matrix(field, phi_rows, cols=qd))
    except MorphismInvalid as e:
        raise InternalInconsistency(f"rho/phi fail to be morphisms: {e}")
    # beta is an S-T-bimodule map with beta(m) = 1
    if beta.apply(ctx.m) != unit:
        raise InternalInconsistency("beta(m) is not the identity class")
    for i in range(ds):
        si = unit_vec(field, ds, i)
        for u in range(dm):
            xu = unit_vec(field, dm, u)
            lhs = beta.apply(mb.left_act(si, xu))
            rhs = box.mul(rho.apply(si), beta.apply(xu))
            if lhs != rhs:
                raise InternalInconsistency("beta is not left S-linear")
    for j in range(dt):
        tj = unit_vec(field, dt, j)
        for u in range(dm):
            xu = unit_vec(field, dm, u)
            lhs = beta.apply(mb.right_act(unit_vec(field, dm, u), tj))
            rhs = box.mul(beta.apply(xu), phi.apply(tj))
            if lhs != rhs:
                raise InternalInconsistency("beta is not right T-linear")
    # delta on the S (x)_R T quotient basis
    pres_st = tensor_over(module_via(ctx.lam, RIGHT), module_via(ctx.mu, LEFT))
    delta_rows = []
    for c in pres_st.basis_cols:
        j, kk = divmod(c, dt)
        delta_rows.append(pres.project_sparse(delta_plain[(j, kk)]))
    delta = Matrix(field, delta_rows, cols=qd)
    return NcTensorRing(context=ctx, algebra=box, pres=pres, rho=rho, phi=phi,
                        beta=beta, delta=delta, pres_st=pres_st)


# ---------------------------------------------------------------------------
# closed-form oracles

@dataclass
class OracleRing:
    algebra: Algebra
    blocks: dict          # name -> (offset, dim)
    tensor_pres: object   # presentation of the Y (x) X block


def nc_tensor_morita_oracle(md):
    """The ring (A X; Y C + Y(x)_A X) with the closed-form block product."""
    field = md.a.field
    a, c, x, y = md.a, md.c, md.x, md.y
    da, dx, dy, dc = a.dim, x.dim, y.dim, c.dim
    yx = tensor_over(y.right_module(), x.left_module())
    dw = yx.dim
    dim = da + dx + dy + dc + dw
    offs = {"a": 0, "x": da, "y": da + dx, "c": da + dx + dy, "w": da + dx + dy + dc}

    def emb(block, vec):
        out = [field.zero] * dim
        o = offs[block]
        for i, v in enumerate(vec):
            out[o + i] = v
        return out

    def addv(u, v):
        return [p + q for p, q in zip(u, v)]

    def decode(i):
        if i < offs["x"]:
            return "a", i
        if i < offs["y"]:
            return "x", i - offs["x"]
        if i < offs["c"]:
            return "y", i - offs["y"]
        if i < offs["w"]:
            return "c", i - offs["c"]
        return "w", i - offs["w"]

    def pair_f(xv, yv):
        acc = [field.zero] * da
        for i, ci in enumerate(xv):
            if ci:
                for j, cj in enumerate(yv):
                    if cj:
                        acc = [o + ci * cj * v for o, v in zip(acc, md.f[i][j])]
        return tuple(field.norm(v) for v in acc)

    def pair_g(yv, xv):
        acc = [field.zero] * dc
        for j, cj in enumerate(yv):
            if cj:
                for i, ci in enumerate(xv):
                    if ci:
                        acc = [o + cj * ci * v for o, v in zip(acc, md.g[j][i])]
        return tuple(field.norm(v) for v in acc)

    def g_of_w(wvec):
        """apply the pairing g to a class in Y (x)_A X."""
        plain = yx.lift(wvec)
        acc = [field.zero] * dc
        for idx, v in enumerate(plain):
            if v:
                yj, xi = divmod(idx, dx)
                acc = [o + v * q for o, q in
                       zip(acc, md.g[yj][xi])]
        return tuple(field.norm(v) for v in acc)

    def w_class(yv, xv):
        return tensor_vector(yx, yv, xv, dx)

    zero = tuple(field.zero for _ in range(dim))
    mult = [[zero] * dim for _ in range(dim)]
    for i in range(dim):
        bi, ii = decode(i)
        for j in range(dim):
            bj, jj = decode(j)
            acc = [field.zero] * dim
            key = (bi, bj)
            if key == ("a", "a"):
                acc = emb("a", a.mult[ii][jj])
            elif key == ("a", "x"):
                acc = emb("x", x.left_act(unit_vec(field, da, ii),
                                          unit_vec(field, dx, jj)))
            elif key == ("x", "y"):
                acc = emb("a", pair_f(unit_vec(field, dx, ii),
                                      unit_vec(field, dy, jj)))
            elif key == ("x", "c"):
                acc = emb("x", x.right_act(unit_vec(field, dx, ii),
                                           unit_vec(field, dc, jj)))
            elif key == ("x", "w"):
                cw = g_of_w(unit_vec(field, dw, jj))
                acc = emb("x", x.right_act(unit_vec(field, dx, ii), cw))
            elif key == ("y", "a"):
                acc = emb("y", y.right_act(unit_vec(field, dy, ii),
                                           unit_vec(field, da, jj)))
            elif key == ("y", "x"):
                acc = emb("w", w_class(unit_vec(field, dy, ii),
                                       unit_vec(field, dx, jj)))
            elif key == ("c", "y"):
                acc = emb("y", y.left_act(unit_vec(field, dc, ii),
                                          unit_vec(field, dy, jj)))
            elif key == ("c", "c"):
                acc = emb("c", c.mult[ii][jj])
            elif key == ("w", "y"):
                cw = g_of_w(unit_vec(field, dw, ii))
                acc = emb("y", y.left_act(cw, unit_vec(field, dy, jj)))
            elif key == ("c", "w"):
                # (c1) . (y' (x) x') = (c1 y') (x) x'
                plain = yx.lift(unit_vec(field, dw, jj))
                out = [field.zero] * dw
                for idx, v in enumerate(plain):
                    if v:
                        yj, xi = divmod(idx, dx)
                        moved = y.left_act(unit_vec(field, dc, ii),
                                           unit_vec(field, dy, yj))
                        cls = w_class(moved, unit_vec(field, dx, xi))
                        out = [o + v * q for o, q in zip(out, cls)]
                acc = emb("w", tuple(field.norm(v) for v in out))
            elif key == ("w", "c"):
                # (y (x) x) . c2 = y (x) (x c2)
                plain = yx.lift(unit_vec(field, dw, ii))
                out = [field.zero] * dw
                for idx, v in enumerate(plain):
                    if v:
                        yj, xi = divmod(idx, dx)
                        moved = x.right_act(unit_vec(field, dx, xi),
                                            unit_vec(field, dc, jj))
                        cls = w_class(unit_vec(field, dy, yj), moved)
                        out = [o + v * q for o, q in zip(out, cls)]
                acc = emb("w", tuple(field.norm(v) for v in out))
            elif key == ("w", "w"):
                # (y (x) x) o (y' (x) x') = y (x) (x y') x'
                p1 = yx.lift(unit_vec(field, dw, ii))
                p2 = yx.lift(unit_vec(field, dw, jj))
                out = [field.zero] * dw
                for i1, v1 in enumerate(p1):
                    if not v1:
                        continue
                    y1i, x1i = divmod(i1, dx)
                    for i2, v2 in enumerate(p2):
                        if not v2:
                            continue
                        y2i, x2i = divmod(i2, dx)
                        av = pair_f(unit_vec(field, dx, x1i),
                                    unit_vec(field, dy, y2i))
                        moved = x.left_act(av, unit_vec(field, dx, x2i))
                        cls = w_class(unit_vec(field, dy, y1i), moved)
                        out = [o + v1 * v2 * q for o, q in zip(out, cls)]
                acc = emb("w", tuple(field.norm(v) for v in out))
            mult[i][j] = tuple(field.norm(v) for v in acc)
    unit = addv(emb("a", a.unit), emb("c", c.unit))
    labels = ([f"a{i}" for i in range(da)] + [f"x{i}" for i in range(dx)]
              + [f"y{i}" for i in range(dy)] + [f"c{i}" for i in range(dc)]
              + [f"w{i}" for i in range(dw)])
    alg = make_algebra(field, labels, mult, tuple(unit))
    blocks = {k: (offs[k], d) for k, d in
              zip(("a", "x", "y", "c", "w"), (da, dx, dy, dc, dw))}
    return OracleRing(algebra=alg, blocks=blocks, tensor_pres=yx)


def nc_tensor_pure_oracle(pd):
    """The ring R (+) X (+) Y (+) Y(x)_RX with the closed-form product of a
    strictly pure pair of extensions."""
    field = pd.r.field
    r, s, t = pd.r, pd.s, pd.t
    dr = r.dim
    dx, dy = len(pd.x_rows), len(pd.y_rows)
    xsolver = SpanSolver(field, s.dim, pd.x_rows)
    ysolver = SpanSolver(field, t.dim, pd.y_rows)
    # X as left R-module, Y as right R-module (restriction of S, T products)
    x_left = Module(r, LEFT, dx,
                    [Matrix(field,
                            [xsolver.coords(s.mul(pd.iota.apply(r.basis_vector(i)),
                                                  pd.x_rows[u]))
                             for u in range(dx)], cols=dx)
                     for i in range(dr)], validate=False)
    y_right = Module(r, RIGHT, dy,
                     [Matrix(field,
                             [ysolver.coords(t.mul(pd.y_rows[u],
                                                   pd.kappa.apply(r.basis_vector(i))))
                              for u in range(dy)], cols=dy)
                      for i in range(dr)], validate=False)
    yx = tensor_over(y_right, x_left)
    dw = yx.dim
    dim = dr + dx + dy + dw
    offs = {"r": 0, "x": dr, "y": dr + dx, "w": dr + dx + dy}

    def emb(block, vec):
        out = [field.zero] * dim
        o = offs[block]
        for i, v in enumerate(vec):
            out[o + i] = v
        return out

    def decode(i):
        if i < offs["x"]:
            return "r", i
        if i < offs["y"]:
            return "x", i - offs["x"]
        if i < offs["w"]:
            return "y", i - offs["y"]
        return "w", i - offs["w"]

    def x_of(i):
        return pd.x_rows[i]

    def y_of(i):
        return pd.y_rows[i]

    def w_move(wvec, yop=None, xop=None):
        """apply maps to the two legs of a class in Y (x)_R X."""
        plain = yx.lift(wvec)
        out = [field.zero] * dw
        for idx, v in enumerate(plain):
            if v:
                yj, xi = divmod(idx, dx)
                yv = unit_vec(field, dy, yj)
                xv = unit_vec(field, dx, xi)
                if yop is not None:
                    yv = yop(yv)
                if xop is not None:
                    xv = xop(xv)
                cls = tensor_vector(yx, yv, xv, dx)
                out = [o + v * q for o, q in zip(out, cls)]
        return tuple(field.norm(v) for v in out)

    zero = tuple(field.zero for _ in range(dim))
    mult = [[zero] * dim for _ in range(dim)]
    for i in range(dim):
        bi, ii = decode(i)
        for j in range(dim):
            bj, jj = decode(j)
            key = (bi, bj)
            acc = [field.zero] * dim
            if key == ("r", "r"):
                acc = emb("r", r.mult[ii][jj])
            elif key == ("r", "x"):
                acc = emb("x", xsolver.coords(
                    s.mul(pd.iota.apply(r.basis_vector(ii)), x_of(jj))))
            elif key == ("x", "r"):
                acc = emb("x", xsolver.coords(
                    s.mul(x_of(ii), pd.iota.apply(r.basis_vector(jj)))))
            elif key == ("x", "x"):
                acc = emb("x", xsolver.coords(s.mul(x_of(ii), x_of(jj))))
            elif key == ("r", "y"):
                acc = emb("y", ysolver.coords(
                    t.mul(pd.kappa.apply(r.basis_vector(ii)), y_of(jj))))
            elif key == ("y", "r"):
                acc = emb("y", ysolver.coords(
                    t.mul(y_of(ii), pd.kappa.apply(r.basis_vector(jj)))))
            elif key == ("y", "y"):
                acc = emb("y", ysolver.coords(t.mul(y_of(ii), y_of(jj))))
            elif key == ("y", "x"):
                acc = emb("w", tensor_vector(yx, unit_vec(field, dy, ii),
                                             unit_vec(field, dx, jj), dx))
            elif key == ("r", "w"):
                def yop(yv, _i=ii):
                    moved = t.mul(pd.kappa.apply(r.basis_vector(_i)),
                                  _lin(pd.y_rows, yv, field, t.dim))
                    return ysolver.coords(moved)
                acc = emb("w", w_move(unit_vec(field, dw, jj), yop=yop))
            elif key == ("w", "r"):
                def xop(xv, _j=jj):
                    moved = s.mul(_lin(pd.x_rows, xv, field, s.dim),
                                  pd.iota.apply(r.basis_vector(_j)))
                    return xsolver.coords(moved)
                acc = emb("w", w_move(unit_vec(field, dw, ii), xop=xop))
            elif key == ("y", "w"):
                def yop(yv, _i=ii):
                    moved = t.mul(y_of(_i), _lin(pd.y_rows, yv, field, t.dim))
                    return ysolver.coords(moved)
                acc = emb("w", w_move(unit_vec(field, dw, jj), yop=yop))
            elif key == ("w", "x"):
                def xop(xv, _j=jj):
                    moved = s.mul(_lin(pd.x_rows, xv, field, s.dim), x_of(_j))
                    return xsolver.coords(moved)
                acc = emb("w", w_move(unit_vec(field, dw, ii), xop=xop))
            # x.y, y(x)x legs with w, w.y, x.w, w.w all vanish:
            # cross products X.Y = Y.X = 0 kill them
            mult[i][j] = tuple(field.norm(v) for v in acc)
    labels = ([f"r:{l}" for l in r.basis_labels] + [f"x{i}" for i in range(dx)]
              + [f"y{i}" for i in range(dy)] + [f"w{i}" for i in range(dw)])
    alg = make_algebra(field, labels, mult, tuple(emb("r", r.unit)))
    blocks = {"r": (0, dr), "x": (offs["x"], dx), "y": (offs["y"], dy),
              "w": (offs["w"], dw)}
    return OracleRing(algebra=alg, blocks=blocks, tensor_pres=yx)


def _lin(rows, coords, field, width):
    acc = [field.zero] * width
    for i, c in enumerate(coords):
        if c:
            acc = [o + c * v for o, v in zip(acc, rows[i])]
    return tuple(field.norm(v) for v in acc)


# ---------------------------------------------------------------------------
# canonical identifications general ring <-> oracle ring

def morita_identification(ring, md, oracle):
    """The canonical isomorphism T boxtimes_R S -> (A X; Y C+Y(x)X).

    Verified to be a unit-preserving multiplicative bijection; raises
    OracleMismatch otherwise.  Structure-constant agreement against the
    oracle is exactly this verification.
    """
    ctx = ring.context
    field = ctx.r.field
    s_alg, t_alg = ctx.s, ctx.t
    s_incl_rows, t_incl_rows = _morita_subalgebra_rows(md)
    da, dx, dy, dc = md.a.dim, md.x.dim, md.y.dim, md.c.dim
    lam_o = oracle.algebra
    yx = oracle.tensor_pres
    offs = oracle.blocks

    def emb(block, vec):
        out = [field.zero] * lam_o.dim
        o = offs[block][0]
        for i, v in enumerate(vec):
            out[o + i] = v
        return tuple(out)

    def psi_plain(tg, sg):
        """image of (Gamma-basis t) (x) (Gamma-basis s) per the display."""
        tb, ti = tg
        sb, si = sg
        z = tuple(field.zero for _ in range(lam_o.dim))
        if tb == "a" and sb == "a":
            return emb("a", md.a.mult[ti][si])
        if tb == "a" and sb == "x":
            return emb("x", md.x.left_act(unit_vec(field, da, ti),
                                          unit_vec(field, dx, si)))
        if tb == "y" and sb == "a":
            return emb("y", md.y.right_act(unit_vec(field, dy, ti),
                                           unit_vec(field, da, si)))
        if tb == "y" and sb == "x":
            return emb("w", tensor_vector(yx, unit_vec(field, dy, ti),
                                          unit_vec(field, dx, si), dx))
        if tb == "c" and sb == "c":
            return emb("c", md.c.mult[ti][si])
        return z

    # T basis order is a-block, y-block, c-block; S is a-block, x, c.
    t_blocks = ([("a", i) for i in range(da)] + [("y", i) for i in range(dy)]
                + [("c", i) for i in range(dc)])
    s_blocks = ([("a", i) for i in range(da)] + [("x", i) for i in range(dx)]
                + [("c", i) for i in range(dc)])
    return _verified_identification(ring, lam_o, t_blocks, s_blocks, psi_plain)


def pure_identification(ring, pd, oracle):
    """Canonical isomorphism onto the strictly-pure oracle ring."""
    ctx = ring.context
    field = ctx.r.field
    lam_o = oracle.algebra
    yx = oracle.tensor_pres
    offs = oracle.blocks
    dr = pd.r.dim
    dx, dy = len(pd.x_rows), len(pd.y_rows)
    xsolver = SpanSolver(field, pd.s.dim, [tuple(row) for row in pd.iota.matrix.data]
                         + list(pd.x_rows))
    ysolver = SpanSolver(field, pd.t.dim, [tuple(row) for row in pd.kappa.matrix.data]
                         + list(pd.y_rows))

    def emb(block, vec):
        out = [field.zero] * lam_o.dim
        o = offs[block][0]
        for i, v in enumerate(vec):
            out[o + i] = v
        return tuple(out)

    def psi_plain(tg, sg):
        """(r1+y1) (x) (r2+x2) -> r1r2 + r1.x2 + y1.r2 + y1 (x) x2."""
        tco = ysolver.coords(pd.t.basis_vector(tg))
        sco = xsolver.coords(pd.s.basis_vector(sg))
        r1, y1 = tco[:dr], tco[dr:]
        r2, x2 = sco[:dr], sco[dr:]
        out = [field.zero] * lam_o.dim
        out_r = pd.r.mul(r1, r2)
        for i, v in enumerate(out_r):
            out[i] += v
        r1x2 = xsolver.coords(pd.s.mul(pd.iota.apply(r1),
                                       _lin(pd.x_rows, x2, field, pd.s.dim)))[dr:]
        for i, v in enumerate(r1x2):
            out[offs["x"][0] + i] += v
        y1r2 = ysolver.coords(pd.t.mul(_lin(pd.y_rows, y1, field, pd.t.dim),
                                       pd.kappa.apply(r2)))[dr:]
        for i, v in enumerate(y1r2):
            out[offs["y"][0] + i] += v
        w = tensor_vector(yx, y1, x2, dx)
        for i, v in enumerate(w):
            out[offs["w"][0] + i] += v
        return tuple(field.norm(v) for v in out)

    t_blocks = list(range(pd.t.dim))
    s_blocks = list(range(pd.s.dim))
    return _verified_identification(ring, lam_o, t_blocks, s_blocks, psi_plain)


def _verified_identification(ring, lam_o, t_blocks, s_blocks, psi_plain):
    ctx = ring.context
    field = ctx.r.field
    ds = ctx.s.dim
    rows = []
    for c in ring.pres.basis_cols:
        i, j = divmod(c, ds)
        rows.append(psi_plain(t_blocks[i], s_blocks[j]))
    psi = Matrix(field, rows, cols=lam_o.dim)
    if ring.algebra.dim != lam_o.dim or rank(psi) != lam_o.dim:
        raise OracleMismatch(
            f"identification is not bijective: {ring.algebra.dim} vs {lam_o.dim}")
    try:
        AlgebraMorphism(ring.algebra, lam_o, psi)
    except MorphismInvalid as e:
        raise OracleMismatch(f"identification is not multiplicative: {e}")
    # also require that the full plain tensor map factors through psi
    full_ok = True
    dt = ctx.t.dim
    for i in range(dt):
        for j in range(ds):
            plain = psi_plain(t_blocks[i], s_blocks[j])
            viaq = psi.apply(ring.pres.project(
                _plain_unit(field, dt, ds, i, j)))
            if tuple(plain) != viaq:
                full_ok = False
    if not full_ok:
        raise OracleMismatch("identification does not descend from the plain tensors")
    return psi


def _plain_unit(field, dt, ds, i, j):
    v = [field.zero] * (dt * ds)
    v[i * ds + j] = field.one
    return tuple(v)


def _morita_subalgebra_rows(md):
    gamma = md.gamma
    da, dx = md.a.dim, md.x.dim
    dy, dc = md.y.dim, md.c.dim
    off_x, off_y, off_c = da, da + dx, da + dx + dy
    s_rows = [gamma.basis_vector(i) for i in range(da)] + \
             [gamma.basis_vector(off_x + i) for i in range(dx)] + \
             [gamma.basis_vector(off_c + i) for i in range(dc)]
    t_rows = [gamma.basis_vector(i) for i in range(da)] + \
             [gamma.basis_vector(off_y + i) for i in range(dy)] + \
             [gamma.basis_vector(off_c + i) for i in range(dc)]
    return s_rows, t_rows


def morita_quotient_map(md, oracle):
    """pi: Lambda -> Gamma collapsing the tensor block through g.

    Satisfies beta then pi = identity on Gamma (checked by the caller's
    tests); it is a surjective ring morphism.
    """
    field = md.a.field
    gamma = md.gamma
    lam_o = oracle.algebra
    offs = oracle.blocks
    da, dx, dy, dc = md.a.dim, md.x.dim, md.y.dim, md.c.dim
    dw = offs["w"][1]
    yxpres = oracle.tensor_pres
    rows = []
    for i in range(lam_o.dim):
        out = [field.zero] * gamma.dim
        if i < offs["x"][0]:
            out[i] = field.one
        elif i < offs["y"][0]:
            out[da + (i - offs["x"][0])] = field.one
        elif i < offs["c"][0]:
            out[da + dx + (i - offs["y"][0])] = field.one
        elif i < offs["w"][0]:
            out[da + dx + dy + (i - offs["c"][0])] = field.one
        else:
            plain = yxpres.lift(unit_vec(field, dw, i - offs["w"][0]))
            for idx, v in enumerate(plain):
                if v:
                    yj, xi = divmod(idx, dx)
                    gval = md.g[yj][xi]
                    for tpos, q in enumerate(gval):
                        out[da + dx + dy + tpos] += v * q
        rows.append(tuple(field.norm(v) for v in out))
    pi = AlgebraMorphism(lam_o, gamma, Matrix(field, rows, cols=gamma.dim))
    return pi


# ---------------------------------------------------------------------------
# theta: B -> C

@dataclass
class ThetaData:
    ring: NcTensorRing
    b: Algebra
    c: Algebra
    theta: AlgebraMorphism
    e1: tuple
    e2: tuple
    phi_b: Matrix                # Be1 -> Be2, right multiplication by m-hat
    triangular: object

    @property
    def context(self):
        return self.ring.context


def build_theta(ring):
    """Assemble B = (S M; 0 T), C = M_2(boxtimes) and theta = (rho beta; 0 phi)."""
    ctx = ring.context
    field = ctx.r.field
    tri = triangular_algebra(ctx.s, ctx.t, ctx.m_bimodule)
    b = tri.algebra
    box = ring.algebra
    d = box.dim
    c = matrix_algebra(box, 2)
    ds, dm, dt = ctx.s.dim, ctx.m_bimodule.dim, ctx.t.dim

    def emb(slot, vec):
        # matrix_algebra basis order: (i, j, k) -> ((i*2)+j)*d + k
        out = [field.zero] * c.dim
        off = slot * d
        for i, v in enumerate(vec):
            out[off + i] = v
        return tuple(out)

    rows = []
    for i in range(ds):
        rows.append(emb(0, ring.rho.apply(unit_vec(field, ds, i))))     # E11
    for u in range(dm):
        rows.append(emb(1, ring.beta.apply(unit_vec(field, dm, u))))    # E12
    for j in range(dt):
        rows.append(emb(3, ring.phi.apply(unit_vec(field, dt, j))))     # E22
    try:
        theta = AlgebraMorphism(b, c, Matrix(field, rows, cols=c.dim))
    except MorphismInvalid as e:
        raise InternalInconsistency(f"theta fails to be a morphism: {e}")
    phi_rows = []
    for i in range(ds):
        sm = ctx.m_bimodule.left_act(unit_vec(field, ds, i), ctx.m)
        phi_rows.append(tuple(sm) + zero_vec(field, dt))
    phi_b = Matrix(field, phi_rows, cols=dm + dt)
    return ThetaData(ring=ring, b=b, c=c, theta=theta, e1=tri.e1, e2=tri.e2,
                     phi_b=phi_b, triangular=tri)


# ---------------------------------------------------------------------------
# localization property suite (theta is the localization of B at phi_b)

@dataclass
class LocalizationReport:
    theta_ring_epi: bool
    tor1_cc_dim: int
    sigma_inverting: bool
    sheiham_ok: bool
    details: dict

    @property
    def all_ok(self):
        return (self.theta_ring_epi and self.tor1_cc_dim == 0
                and self.sigma_inverting and self.sheiham_ok)


def verify_localization_properties(td, tor_bound=1):
    """Checks (a) theta ring epi, (b) Tor_1^B(C,C) = 0, (c) the induced map
    C(x)_B Be1 -> C(x)_B Be2 is bijective, (d) the generator-and-relation
    identities of beta inside the tensor ring."""
    ctx = td.context
    field = ctx.r.field
    box = td.ring.algebra
    # (a)
    epi = is_ring_epimorphism(td.theta)
    # (b)
    c_right = module_via(td.theta, RIGHT)
    c_left = module_via(td.theta, LEFT)
    t1 = tor(c_right, c_left, max(1, tor_bound)).degrees.get(1, 0)
    # (c)
    b = td.b
    reg = regular_module(b, LEFT)
    ds, dm, dt = ctx.s.dim, ctx.m_bimodule.dim, ctx.t.dim
    be1, _ = submodule(reg, [b.basis_vector(i) for i in range(ds)])
    be2, _ = submodule(reg, [b.basis_vector(ds + i) for i in range(dm + dt)])
    pres1 = tensor_over(c_right, be1)
    pres2 = tensor_over(c_right, be2)
    dc = td.c.dim
    rows = []
    for col in pres1.basis_cols:
        ci, ui = divmod(col, be1.dim)
        img = td.phi_b.row(ui)
        sv = {}
        for v2, val in enumerate(img):
            if val:
                sv[ci * be2.dim + v2] = val
        rows.append(pres2.project_sparse(sv))
    indmap = Matrix(field, rows, cols=pres2.dim)
    sigma_ok = (pres1.dim == pres2.dim and rank(indmap) == pres2.dim)
    # (d) Sheiham relations under beta
    beta = td.ring.beta
    sheiham = True
    details = {}
    if beta.apply(ctx.m) != box.unit:
        sheiham = False
        details["beta_m"] = "beta(m) != 1"
    mb = ctx.m_bimodule
    for u in range(dm):
        for v in range(dm):
            xu = unit_vec(field, dm, u)
            xv = unit_vec(field, dm, v)
            sm = tuple(a + bb for a, bb in zip(xu, xv))
            if beta.apply(sm) != tuple(field.norm(a + bb) for a, bb in
                                       zip(beta.apply(xu), beta.apply(xv))):
                sheiham = False
                details["additivity"] = (u, v)
                break
        if not sheiham:
            break
    if sheiham:
        for i in range(ds):
            si = unit_vec(field, ds, i)
            bsm = beta.apply(mb.left_act(si, ctx.m))
            for u in range(dm):
                xu = unit_vec(field, dm, u)
                lhs = box.mul(bsm, beta.apply(xu))
                rhs = beta.apply(mb.left_act(si, xu))
                if lhs != rhs:
                    sheiham = False
                    details["relation3"] = (i, u)
                    break
            if not sheiham:
                break
    if sheiham:
        for j in range(dt):
            tj = unit_vec(field, dt, j)
            bmt = beta.apply(mb.right_act(ctx.m, tj))
            for u in range(dm):
                xu = unit_vec(field, dm, u)
                lhs = box.mul(beta.apply(xu), bmt)
                rhs = beta.apply(mb.right_act(xu, tj))
                if lhs != rhs:
                    sheiham = False
                    details["relation4"] = (j, u)
                    break
            if not sheiham:
                break
    return LocalizationReport(theta_ring_epi=epi.is_epi, tor1_cc_dim=t1,
                              sigma_inverting=sigma_ok, sheiham_ok=sheiham,
                              details=details)


# ---------------------------------------------------------------------------
# the main criterion

@dataclass
class Theorem1Verdict:
    holds_up_to_bound: bool
    bound: int
    failing_degree: int | None
    failing_dim: int | None
    tor_dims: dict
    theta_verdict: object

    def describe(self):
        if self.holds_up_to_bound:
            return f"Tor_i^R(T,S) = 0 for 1 <= i <= {self.bound}"
        return (f"criterion fails at degree {self.failing_degree} "
                f"(dim {self.failing_dim})")


def theorem1_criterion(ctx, tor_bound, theta_data=None):
    """Tor_i^R(T,S) vanishing up to the bound, cross-checked against the
    homologicity of theta at the same bound (both directions of the
    equivalence at desk scale)."""
    t_right = module_via(ctx.mu, RIGHT)
    s_left = module_via(ctx.lam, LEFT)
    tr = tor(t_right, s_left, tor_bound)
    failing = None
    for i in range(1, tor_bound + 1):
        if tr.degrees.get(i, 0):
            failing = i
            break
    if theta_data is None:
        theta_data = build_theta(build_nc_tensor(ctx))
    hv = is_homological_up_to(theta_data.theta, tor_bound)
    if hv.holds != (failing is None):
        raise InternalInconsistency(
            f"criterion and theta-homologicity disagree: tor witness {failing}, "
            f"theta verdict {hv.describe()}")
    return Theorem1Verdict(holds_up_to_bound=failing is None, bound=tor_bound,
                           failing_degree=failing,
                           failing_dim=None if failing is None else tr.degrees[failing],
                           tor_dims=tr.degrees, theta_verdict=hv)


# ---------------------------------------------------------------------------
# commutative coincidence

@dataclass
class CoincidenceReport:
    coincides: bool
    dim: int


def commutative_coincidence_check(ctx, ring=None):
    """For commutative R with central images and an exact pair, the tensor
    ring must equal the componentwise tensor product algebra on the same
    quotient basis."""
    r, s, t = ctx.r, ctx.s, ctx.t
    field = r.field
    if not r.is_commutative():
        raise PreconditionFailed("R is not commutative")
    for i in range(r.dim):
        li = ctx.lam.apply(r.basis_vector(i))
        for j in range(s.dim):
            bj = s.basis_vector(j)
            if s.mul(li, bj) != s.mul(bj, li):
                raise PreconditionFailed("image of lam is not central in S")
        mi = ctx.mu.apply(r.basis_vector(i))
        for j in range(t.dim):
            bj = t.basis_vector(j)
            if t.mul(mi, bj) != t.mul(bj, mi):
                raise PreconditionFailed("image of mu is not central in T")
    if not is_exact_pair(ctx).is_pair:
        raise PreconditionFailed("context is not an exact pair")
    if ring is None:
        ring = build_nc_tensor(ctx)
    pres = ring.pres
    ds = s.dim
    t_sp = t._sparse
    s_sp = s._sparse
    qd = pres.dim
    ok = True
    for a in range(qd):
        i, j = divmod(pres.basis_cols[a], ds)
        for b in range(qd):
            kk, ll = divmod(pres.basis_cols[b], ds)
            sv = {}
            for i2, c1 in t_sp[i][kk]:
                for j2, c2 in s_sp[j][ll]:
                    key = i2 * ds + j2
                    sv[key] = sv.get(key, field.zero) + c1 * c2
            comp = pres.project_sparse(sv)
            if comp != ring.algebra.mult[a][b]:
                ok = False
                break
        if not ok:
            break
    return CoincidenceReport(coincides=ok, dim=qd)


# ---------------------------------------------------------------------------
# projective dimension inequalities

@dataclass
class PdInequalityReport:
    conclusive: bool
    pd_rs: object
    pd_bc: object
    pd_tr: object
    pd_cb: object
    left_ok: bool | None
    right_ok: bool | None

    @property
    def all_ok(self):
        return bool(self.conclusive and self.left_ok and self.right_ok)


def pd_inequality_check(td, bound):
    """pd(_RS) <= max(1, pd(_BC)), pd(_BC) <= max(2, pd(_RS)+1) and the
    right-module analogues, computed up to the bound.  Inconclusive when
    any of the four projective dimensions exceeds the bound."""
    ctx = td.context
    s_left = module_via(ctx.lam, LEFT)
    t_right = module_via(ctx.mu, RIGHT)
    c_left = module_via(td.theta, LEFT)
    c_right = module_via(td.theta, RIGHT)
    pds = [projective_dimension(m, bound)
           for m in (s_left, c_left, t_right, c_right)]
    pd_rs, pd_bc, pd_tr, pd_cb = pds
    if not all(p.exact for p in pds):
        return PdInequalityReport(conclusive=False, pd_rs=pd_rs, pd_bc=pd_bc,
                                  pd_tr=pd_tr, pd_cb=pd_cb,
                                  left_ok=None, right_ok=None)
    left_ok = (pd_rs.value <= max(1, pd_bc.value)
               and pd_bc.value <= max(2, pd_rs.value + 1))
    right_ok = (pd_tr.value <= max(1, pd_cb.value)
                and pd_cb.value <= max(2, pd_tr.value + 1))
    return PdInequalityReport(conclusive=True, pd_rs=pd_rs, pd_bc=pd_bc,
                              pd_tr=pd_tr, pd_cb=pd_cb,
                              left_ok=left_ok, right_ok=right_ok)
