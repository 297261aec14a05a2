"""Resolutions, Tor, projective dimension, radical and ring-epi tests.

Free modules A^n are represented by flat coordinate tuples of length
n*dim(A), slot-major: index u*dim(A)+i stands for e_u (x) b_i.  A module
map out of a free module is determined by the images of the generators
e_u (x) 1, which is what resolutions store; k-linear matrices are derived
from those images on demand.

Tor is computed by tensoring a free resolution of the resolved-side
module: F_i (x)_A s collapses to s^{n_i}, so no quotient presentations
are needed along the way.  Projective dimension uses honest projective
covers (radical tops plus idempotent lifting), which also certify
Tor-vanishing beyond the resolution length.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import (
    Matrix, SpanSolver, SparseRref, kernel_basis, left_kernel,
    quotient_space, rank, row_space_basis, sparse_solve, unit_vec, zero_vec,
)
from .algebra import Algebra, AlgebraError
from .modules import (
    LEFT, RIGHT, AlgebraMismatch, Module, module_via, tensor_over,
)


class CharacteristicTooSmall(AlgebraError):
    def __init__(self, p, dim):
        super().__init__(
            f"radical needs characteristic 0 or p > dim; got p={p}, dim={dim}")


class HomologyError(AlgebraError):
    pass


# ---------------------------------------------------------------------------
# radical and semisimple quotient

def radical(a):
    """Basis of the Jacobson radical via the trace form of the regular
    representation (Dickson's criterion; valid over Q or F_p with p > dim)."""
    field = a.field
    if field.p and field.p <= a.dim:
        raise CharacteristicTooSmall(field.p, a.dim)
    # tr(L_v) is linear in v, and L_x L_y = L_{xy}
    tvec = [field.norm(sum(a.mult[i][u][u] for u in range(a.dim)))
            for i in range(a.dim)]
    gram = Matrix(field,
                  [[field.norm(sum(c * tvec[l] for l, c in enumerate(a.mult[i][j])))
                    for j in range(a.dim)] for i in range(a.dim)], cols=a.dim)
    basis = kernel_basis(gram)
    _assert_nilpotent(a, basis)
    return basis


def _assert_nilpotent(a, basis):
    cur = list(basis)
    prev_dim = None
    while cur:
        if prev_dim is not None and len(cur) >= prev_dim:
            raise HomologyError("trace-form kernel is not nilpotent")
        prev_dim = len(cur)
        nxt = [a.mul(j, u) for j in basis for u in cur]
        cur = row_space_basis(a.field, a.dim, nxt)


def semisimple_quotient(a, rad_basis):
    """(A / rad A, quotient presentation)."""
    pres = quotient_space(a.field, a.dim, rad_basis)
    lifts = [pres.lift(unit_vec(a.field, pres.dim, i)) for i in range(pres.dim)]
    mult = [[pres.project(a.mul(lifts[i], lifts[j])) for j in range(pres.dim)]
            for i in range(pres.dim)]
    labels = [f"q{i}" for i in range(pres.dim)]
    bar = Algebra(a.field, labels, mult, pres.project(a.unit))
    return bar, pres


# ---------------------------------------------------------------------------
# free-module plumbing

def _free_slot_ops(a, side):
    if side == LEFT:
        return [a.left_op(a.basis_vector(i)) for i in range(a.dim)]
    return [a.right_op(a.basis_vector(i)) for i in range(a.dim)]


def _apply_slotwise(op, vec, nslots, d):
    out = []
    for u in range(nslots):
        out.extend(op.apply(vec[u * d:(u + 1) * d]))
    return tuple(out)


def _free_map_matrix(a, gens, target_dim, target_act):
    """k-matrix of the free-module map e_u (x) 1 -> gens[u].

    target_act(i, vec) is the action of basis element i on target vectors.
    """
    rows = []
    for g in gens:
        for i in range(a.dim):
            rows.append(target_act(i, g))
    return Matrix(a.field, rows, cols=target_dim)


def _top_generators(a, rad_basis, dim, elem_act, basis_rows=None):
    """Nakayama generators: lifts of a basis of V / rad.V.

    elem_act(jcoords, vec) applies an algebra element; basis_rows defaults
    to the standard basis of k^dim and otherwise must span V.
    """
    field = a.field
    if basis_rows is None:
        basis_rows = [unit_vec(field, dim, i) for i in range(dim)]
    eng = SparseRref(field, dim)
    for j in rad_basis:
        for b in basis_rows:
            v = elem_act(j, b)
            eng.add({i: x for i, x in enumerate(v) if x})
    gens = []
    for b in basis_rows:
        if eng.add({i: x for i, x in enumerate(b) if x}):
            gens.append(b)
    return gens


# ---------------------------------------------------------------------------
# free resolutions

@dataclass
class FreeResolution:
    """... -> A^{n_1} -> A^{n_0} -> X -> 0, exact by construction.

    gens[0] generates X (vectors in X coordinates); gens[i] for i >= 1
    generates the i-th syzygy inside A^{n_{i-1}}.  complete means the last
    computed syzygy was zero.
    """

    module: Module
    side: str
    ranks: list
    gens: list
    complete: bool
    kind: str = "free"

    @property
    def length(self):
        return len(self.ranks) - 1

    def aug_matrix(self):
        a = self.module.algebra
        mod = self.module
        return _free_map_matrix(a, self.gens[0], mod.dim,
                                lambda i, v: mod.action[i].apply(v))

    def diff_matrix(self, i):
        """k-matrix of d_i : A^{n_i} -> A^{n_{i-1}} (1-based)."""
        if not (1 <= i <= self.length):
            raise IndexError(i)
        a = self.module.algebra
        prev = self.ranks[i - 1]
        ops = _free_slot_ops(a, self.side)
        return _free_map_matrix(
            a, self.gens[i], prev * a.dim,
            lambda i2, v: _apply_slotwise(ops[i2], v, prev, a.dim))

    def generator_entries(self, i):
        """gens[i] reshaped as an A-valued matrix (n_i x n_{i-1})."""
        a = self.module.algebra
        prev = self.ranks[i - 1]
        return [[tuple(g[v * a.dim:(v + 1) * a.dim]) for v in range(prev)]
                for g in self.gens[i]]


def free_resolution(x, length, generators="full"):
    """Free resolution of x to the given length.

    generators="full" covers each stage from its full basis (the documented
    contract); "top" uses Nakayama-minimal generator sets (requires the
    radical) and produces the same homology with much smaller terms.
    """
    a = x.algebra
    field = a.field
    rad = radical(a) if generators == "top" else None
    slot_ops = _free_slot_ops(a, x.side)

    def free_elem_act(jcoords, vec, nslots):
        acc = [field.zero] * (nslots * a.dim)
        for i, c in enumerate(jcoords):
            if c:
                img = _apply_slotwise(slot_ops[i], vec, nslots, a.dim)
                acc = [o + c * v for o, v in zip(acc, img)]
        return tuple(field.norm(v) for v in acc)

    if generators == "top":
        g0 = _top_generators(a, rad, x.dim, lambda j, v: x.act(j, v))
    else:
        g0 = [unit_vec(field, x.dim, i) for i in range(x.dim)]
    gens = [g0]
    ranks = [len(g0)]
    complete = False
    psi = _free_map_matrix(a, g0, x.dim, lambda i, v: x.action[i].apply(v))
    for _ in range(length):
        syz = left_kernel(psi)
        if not syz:
            complete = True
            break
        nslots = ranks[-1]
        if generators == "top":
            gi = _top_generators(a, rad, nslots * a.dim,
                                 lambda j, v: free_elem_act(j, v, nslots),
                                 basis_rows=syz)
        else:
            gi = syz
        gens.append(gi)
        ranks.append(len(gi))
        psi = _free_map_matrix(
            a, gi, nslots * a.dim,
            lambda i, v: _apply_slotwise(slot_ops[i], v, nslots, a.dim))
    else:
        if not left_kernel(psi):
            complete = True
    return FreeResolution(module=x, side=x.side, ranks=ranks, gens=gens,
                          complete=complete)


# ---------------------------------------------------------------------------
# projective covers and minimal resolutions

def _amat_mul(a, m1, m2, side):
    """Composite (m1 then m2) of free-module endos given as A-matrices."""
    g = len(m1)
    field = a.field
    out = []
    for u in range(g):
        row = []
        for w in range(g):
            acc = [field.zero] * a.dim
            for v in range(g):
                e1, e2 = m1[u][v], m2[v][w]
                if any(e1) and any(e2):
                    p = a.mul(e1, e2) if side == LEFT else a.mul(e2, e1)
                    acc = [x + y for x, y in zip(acc, p)]
            row.append(tuple(field.norm(x) for x in acc))
        out.append(row)
    return out


def _amat_to_kmatrix(a, m, side):
    """k-linear matrix of the endomorphism of A^g with A-matrix m."""
    g = len(m)
    d = a.dim
    field = a.field
    rows = []
    for u in range(g):
        for i in range(d):
            vec = [field.zero] * (g * d)
            bi = unit_vec(field, d, i)
            for v in range(g):
                ent = m[u][v]
                if any(ent):
                    img = a.mul(bi, ent) if side == LEFT else a.mul(ent, bi)
                    for t, c in enumerate(img):
                        if c:
                            vec[v * d + t] = field.norm(vec[v * d + t] + c)
            rows.append(tuple(vec))
    return Matrix(field, rows, cols=g * d)


@dataclass
class ProjectiveTerm:
    """Direct summand of A^{ambient_rank} cut out by an idempotent."""

    ambient_rank: int
    idempotent: list   # A-valued matrix, ambient_rank x ambient_rank
    basis: list        # rows in A^{ambient_rank} k-coordinates
    dim: int


@dataclass
class MinimalResolution:
    """Projective-cover resolution.

    diffs[i] maps term i+1 into term i (in the terms' own bases); cover is
    the augmentation term-0 -> X.  complete means the last syzygy vanished,
    so pd(X) equals the number of differentials computed.
    """

    module: Module
    side: str
    terms: list
    cover: Matrix
    diffs: list
    complete: bool
    kind: str = "minimal-projective"

    @property
    def length(self):
        return max(len(self.terms) - 1, 0)


def _projective_cover(a, rad, abar, barpres, x):
    """Projective cover P(x) -> x.

    The top of x is covered by Abar^g, an Abar-linear section gives an
    idempotent endomorphism, which lifts through the nilpotent radical by
    Newton iteration; its image inside A^g is the cover.
    """
    field = a.field
    d = a.dim
    jrows = []
    for j in rad:
        op = x.operator(j)
        for b in range(x.dim):
            jrows.append(op.row(b))
    toppres = quotient_space(field, x.dim, jrows)
    g = toppres.dim
    if g == 0:
        raise HomologyError("nonzero module with zero top (radical bug)")
    lifts = [toppres.lift(unit_vec(field, g, u)) for u in range(g)]
    dbar = abar.dim
    bar_lift = [barpres.lift(unit_vec(field, dbar, i)) for i in range(dbar)]
    # induced cover Abar^g -> top(x) and the Abar-structure of top(x)
    cbar_rows = []
    for u in range(g):
        for i in range(dbar):
            cbar_rows.append(toppres.project(x.act(bar_lift[i], lifts[u])))
    cbar = Matrix(field, cbar_rows, cols=g)
    top_act = [toppres.section @ x.operator(bar_lift[i]) @ toppres.projection
               for i in range(dbar)]
    bar_slot = _free_slot_ops(abar, x.side)
    # Abar-linear section H: top -> Abar^g with H @ cbar = I (sparse solve)
    nfree = g * dbar
    nunk = g * nfree
    rows = []
    rhs = []
    for r in range(g):
        for c in range(g):
            coeffs = {}
            for t in range(nfree):
                v = cbar.data[t][c]
                if v:
                    k = r * nfree + t
                    coeffs[k] = coeffs.get(k, field.zero) + v
            rows.append({k: field.norm(v) for k, v in coeffs.items() if field.norm(v)})
            rhs.append(field.one if r == c else field.zero)
    for i in range(dbar):
        ta = top_act[i]
        op = bar_slot[i]
        for r in range(g):
            for c in range(nfree):
                coeffs = {}
                for t in range(g):
                    v = ta.data[r][t]
                    if v:
                        k = t * nfree + c
                        coeffs[k] = coeffs.get(k, field.zero) + v
                # (H @ freeact)[r][c] = sum_t H[r][t] freeact[t][c]
                cu, ci = divmod(c, dbar)
                for t2 in range(dbar):
                    v = op.data[t2][ci]
                    if v:
                        k = r * nfree + cu * dbar + t2
                        coeffs[k] = coeffs.get(k, field.zero) - v
                coeffs = {k: field.norm(v) for k, v in coeffs.items() if field.norm(v)}
                if coeffs:
                    rows.append(coeffs)
                    rhs.append(field.zero)
    sol = sparse_solve(field, nunk, rows, rhs)
    if sol is None:
        raise HomologyError("no module section onto the top (unexpected)")
    hmat = Matrix(field, [list(sol[r * nfree:(r + 1) * nfree]) for r in range(g)],
                  cols=nfree)
    ebar = cbar @ hmat
    # read off Abar-matrix entries and lift to an idempotent over A
    emat = []
    for u in range(g):
        src = [field.zero] * nfree
        for t, c in enumerate(abar.unit):
            src[u * dbar + t] = c
        img = ebar.apply(tuple(src))
        emat.append([barpres.lift(tuple(img[v * dbar:(v + 1) * dbar]))
                     for v in range(g)])
    for _ in range(64):
        e2 = _amat_mul(a, emat, emat, x.side)
        if e2 == emat:
            break
        e3 = _amat_mul(a, e2, emat, x.side)
        three, mtwo = field.of(3), field.of(-2)
        emat = [[tuple(field.norm(three * p + mtwo * q) for p, q in zip(ent2, ent3))
                 for ent2, ent3 in zip(row2, row3)]
                for row2, row3 in zip(e2, e3)]
    else:
        raise HomologyError("idempotent lifting did not converge")
    ek = _amat_to_kmatrix(a, emat, x.side)
    basis = row_space_basis(field, g * d, [tuple(r) for r in ek.data])
    term = ProjectiveTerm(ambient_rank=g, idempotent=emat, basis=basis,
                          dim=len(basis))
    psi = _free_map_matrix(a, lifts, x.dim, lambda i, v: x.action[i].apply(v))
    cover = Matrix(field, [psi.apply(b) for b in term.basis], cols=x.dim)
    if rank(cover) != x.dim:
        raise HomologyError("projective cover is not surjective (unexpected)")
    return term, cover


def _term_module(a, term, side):
    """The projective term as an abstract module in its own basis."""
    field = a.field
    slot_ops = _free_slot_ops(a, side)
    solver = SpanSolver(field, term.ambient_rank * a.dim, term.basis)
    action = []
    for i in range(a.dim):
        rows = []
        for b in term.basis:
            img = _apply_slotwise(slot_ops[i], b, term.ambient_rank, a.dim)
            coords = solver.coords(img)
            if coords is None:
                raise HomologyError("projective summand is not action-stable")
            rows.append(coords)
        action.append(Matrix(field, rows, cols=term.dim))
    return Module(a, side, term.dim, action, validate=False)


def minimal_resolution(x, length):
    """Minimal projective resolution via projective covers.

    Stops early when a syzygy vanishes, certifying pd(x) = number of
    differentials computed.  Raises CharacteristicTooSmall when the
    radical is unavailable.
    """
    a = x.algebra
    rad = radical(a)
    abar, barpres = semisimple_quotient(a, rad)
    terms = []
    diffs = []
    cover0 = Matrix(a.field, [], cols=x.dim)
    cur = x
    embed_prev = None  # syzygy coordinates -> previous term coordinates
    complete = False
    for _ in range(length + 1):
        if cur.dim == 0:
            complete = True
            break
        term, cover = _projective_cover(a, rad, abar, barpres, cur)
        if embed_prev is None:
            cover0 = cover
        else:
            diffs.append(cover @ embed_prev)
        terms.append(term)
        kerrows = left_kernel(cover)
        if not kerrows:
            complete = True
            break
        pmod = _term_module(a, term, x.side)
        ksolver = SpanSolver(a.field, term.dim, kerrows)
        kaction = []
        for i in range(a.dim):
            rows = []
            for kb in kerrows:
                coords = ksolver.coords(pmod.action[i].apply(kb))
                if coords is None:
                    raise HomologyError("syzygy is not action-stable")
                rows.append(coords)
            kaction.append(Matrix(a.field, rows, cols=len(kerrows)))
        cur = Module(a, x.side, len(kerrows), kaction, validate=False)
        embed_prev = Matrix(a.field, kerrows, cols=term.dim)
    return MinimalResolution(module=x, side=x.side, terms=terms, cover=cover0,
                             diffs=diffs, complete=complete)


def minimal_diff_in_radical(res):
    """Minimality witness: each differential lands in rad * (its target)."""
    a = res.module.algebra
    rad = radical(a)
    for i, d in enumerate(res.diffs):
        pmod = _term_module(a, res.terms[i], res.side)
        eng = SparseRref(a.field, pmod.dim)
        for j in rad:
            op = pmod.operator(j)
            for b in range(pmod.dim):
                eng.add({c: v for c, v in enumerate(op.row(b)) if v})
        for row in d.data:
            if eng.reduce({c: v for c, v in enumerate(row) if v}):
                return False
    return True


# ---------------------------------------------------------------------------
# Tor

@dataclass
class TorResult:
    degrees: dict
    bound: int
    field: object
    certified_from: int | None = None

    def dim(self, i):
        return self.degrees.get(i, 0)

    def vanishing_from(self, start=1):
        return all(self.degrees.get(i, 0) == 0
                   for i in range(start, self.bound + 1))


def _check_same_base(t, s):
    if t.algebra is s.algebra:
        return
    if t.algebra.mult != s.algebra.mult or t.algebra.field != s.algebra.field:
        raise AlgebraMismatch("Tor arguments live over different algebras")


def _tensor_rank_of_diff(res, i, m):
    """rank of (d_i tensor m) for a resolution of the opposite-side module."""
    field = res.module.algebra.field
    entries = res.generator_entries(i)
    prev = res.ranks[i - 1]
    dm = m.dim
    rows = []
    for u in range(len(entries)):
        for idx in range(dm):
            base = unit_vec(field, dm, idx)
            row = []
            for v in range(prev):
                ent = entries[u][v]
                if any(ent):
                    row.extend(m.act(ent, base))
                else:
                    row.extend(zero_vec(field, dm))
            rows.append(tuple(row))
    if not rows:
        return 0
    return rank(Matrix(field, rows, cols=prev * dm))


def _tor_from_resolution(res, m, max_degree):
    """Homology dimensions of (resolution terms) tensored with m."""
    dm = m.dim
    ranks = []
    upto = min(max_degree + 1, res.length)
    for i in range(1, upto + 1):
        ranks.append(_tensor_rank_of_diff(res, i, m))
    while len(ranks) < max_degree + 1:
        ranks.append(0)
    degrees = {0: res.ranks[0] * dm - ranks[0]}
    for i in range(1, max_degree + 1):
        ni = res.ranks[i] if i <= res.length else 0
        degrees[i] = (ni * dm - ranks[i - 1] - ranks[i]) if ni else 0
    return degrees


def tor(t, s, max_degree, certify="auto"):
    """dim Tor_i^A(t, s) for 0 <= i <= max_degree.

    t must be a right module and s a left module over the same algebra.
    A free resolution of t is tensored with s; a terminating
    projective-cover resolution of t (when affordable and the radical is
    available) certifies vanishing beyond its length.
    """
    if t.side != RIGHT or s.side != LEFT:
        raise AlgebraMismatch("tor wants (right module, left module)")
    _check_same_base(t, s)
    a = t.algebra
    field = a.field
    if t.dim == 0 or s.dim == 0:
        return TorResult({i: 0 for i in range(max_degree + 1)}, max_degree, field, 0)
    rad_ok = not (field.p and field.p <= a.dim)
    pd_cert = None
    if rad_ok and (certify is True or (certify == "auto" and t.dim * a.dim <= 200)):
        mres = minimal_resolution(t, max_degree + 1)
        if mres.complete:
            pd_cert = mres.length
    eff = max_degree if pd_cert is None else min(max_degree, pd_cert)
    res = free_resolution(t, eff + 1, generators="top" if rad_ok else "full")
    degrees = _tor_from_resolution(res, s, eff)
    for i in range(eff + 1, max_degree + 1):
        degrees[i] = 0
    return TorResult(degrees=degrees, bound=max_degree, field=field,
                     certified_from=pd_cert)


def tor_resolving_left(t, s, max_degree):
    """Same Tor dimensions computed by resolving the left module s
    (the balancedness cross-check)."""
    if t.side != RIGHT or s.side != LEFT:
        raise AlgebraMismatch("tor wants (right module, left module)")
    _check_same_base(t, s)
    field = s.algebra.field
    if t.dim == 0 or s.dim == 0:
        return TorResult({i: 0 for i in range(max_degree + 1)}, max_degree, field)
    rad_ok = not (field.p and field.p <= s.algebra.dim)
    res = free_resolution(s, max_degree + 1,
                          generators="top" if rad_ok else "full")
    degrees = _tor_from_resolution(res, t, max_degree)
    return TorResult(degrees=degrees, bound=max_degree, field=field)


# ---------------------------------------------------------------------------
# projective dimension

@dataclass
class PdResult:
    value: int
    exact: bool  # False means "pd >= value"

    def describe(self):
        return str(self.value) if self.exact else f">= {self.value}"


def projective_dimension(x, bound):
    """Minimal-resolution length if it terminates within bound, else the
    lower-bound report (value = bound + 1, exact = False)."""
    if x.dim == 0:
        return PdResult(0, True)
    res = minimal_resolution(x, bound)
    if res.complete:
        return PdResult(res.length, True)
    return PdResult(bound + 1, False)


# ---------------------------------------------------------------------------
# ring epimorphisms and homological maps

@dataclass
class RingEpiVerdict:
    is_epi: bool
    tensor_dim: int
    target_dim: int
    mult_bijective: bool

    def describe(self):
        if self.is_epi:
            return "ring epimorphism (multiplication S(x)_RS -> S bijective)"
        return (f"not a ring epimorphism: dim S(x)_RS = {self.tensor_dim}, "
                f"dim S = {self.target_dim}")


def is_ring_epimorphism(f):
    """f is a ring epi iff the multiplication S (x)_R S -> S is bijective."""
    s_right = module_via(f, RIGHT)
    s_left = module_via(f, LEFT)
    pres = tensor_over(s_right, s_left)
    tgt = f.target
    if pres.dim != tgt.dim:
        return RingEpiVerdict(False, pres.dim, tgt.dim, False)
    rows = []
    ds = tgt.dim
    for c in pres.basis_cols:
        i, j = divmod(c, ds)
        rows.append(tgt.mul(tgt.basis_vector(i), tgt.basis_vector(j)))
    bij = rank(Matrix(tgt.field, rows, cols=ds)) == tgt.dim
    return RingEpiVerdict(bij, pres.dim, tgt.dim, bij)


@dataclass
class HomologicalVerdict:
    is_epi: bool
    holds: bool
    bound: int
    unconditional: bool
    witness_degree: int | None
    tor_dims: dict

    def describe(self):
        if not self.is_epi:
            return "not a ring epimorphism"
        if self.holds:
            kind = "unconditionally" if self.unconditional else f"up to degree {self.bound}"
            return f"homological {kind}"
        return f"not homological: Tor_{self.witness_degree} is nonzero"


def is_homological_up_to(f, max_degree):
    """Ring epi with Tor_i^R(S, S) = 0 for 1 <= i <= max_degree.

    Unconditional when a terminating projective-cover resolution certifies
    vanishing in all higher degrees (in particular when S is projective on
    the resolved side), and when the answer is negative (a nonzero Tor is
    a final witness).
    """
    epi = is_ring_epimorphism(f)
    s_right = module_via(f, RIGHT)
    s_left = module_via(f, LEFT)
    tr = tor(s_right, s_left, max_degree, certify="auto")
    witness = None
    for i in range(1, max_degree + 1):
        if tr.degrees.get(i, 0):
            witness = i
            break
    holds = epi.is_epi and witness is None
    unconditional = witness is not None
    if holds and tr.certified_from is not None and tr.certified_from <= max_degree:
        unconditional = True
    return HomologicalVerdict(is_epi=epi.is_epi, holds=holds, bound=max_degree,
                              unconditional=unconditional, witness_degree=witness,
                              tor_dims=tr.degrees)
