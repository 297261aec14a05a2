"""Textual presentations of algebras, morphisms, bimodules and contexts.

Grammar (informal; ';' separates statements inside braces/brackets,
'#' starts a line comment, whitespace is free):

    file      := decl*
    decl      := 'field' ('Q' | 'Fp' INT)
               | 'algebra' NAME '=' algexpr
               | 'sub' NAME NAME 'of' NAME 'spanned' '{' lincomb (';' lincomb)* '}'
               | 'morphism' NAME ':' NAME '->' NAME '=' 'matrix' matlit
               | 'pairing' NAME ':' NAME NAME '->' NAME '=' 'matrix' matlit
               | 'bimodule' NAME 'over' NAME NAME '=' bimodexpr
               | 'element' NAME 'in' NAME '=' lincomb
               | 'context' NAME '=' ctxexpr
    algexpr   := 'structconst' '{' 'dim' INT (';' prodline)* [';' unitline] [';'] '}'
               | 'quiver' '{' 'vertices' name+ ';' arrowline* [relline] [boundline] '}'
               | 'matrixalg' INT NAME | 'triangular' NAME NAME NAME
               | 'opposite' NAME | 'product' NAME NAME
    prodline  := INT '*' INT '=' lincomb
    unitline  := 'unit' '=' lincomb
    arrowline := 'arrow' name ':' name '->' name ';'
    relline   := 'relations' pathcomb (',' pathcomb)* ';'
    boundline := 'bound' INT ';'
    pathcomb  := ['-'] pathterm (('+' | '-') pathterm)*
    pathterm  := [rat '*'] name ('*' name)*
    bimodexpr := '{' 'dim' INT (';' actline)* [';' 'distinguished' '=' lincomb] [';'] '}'
               | 'via' NAME NAME
    actline   := ('left' | 'right') INT INT '=' lincomb
    ctxexpr   := '(' NAME ',' NAME ',' NAME [',' NAME] ')'
               | 'morita' NAME NAME NAME NAME NAME NAME
               | 'pure' NAME '[' lincomb (';' lincomb)* ']' NAME '[' lincomb (';' lincomb)* ']'
               | 'extension' NAME | 'milnor' NAME NAME
    matlit    := '[' row (';' row)* ']' ;  row := rat (',' rat)*
    lincomb   := 'zero' | ['-'] term (('+' | '-') term)*
    term      := [rat '*'] INT          # bare INT is a basis index
    rat       := ['-'] INT ['/' INT]

Path composition is left to right: a*b means "first a, then b", so a*b is
composable when target(a) = source(b).  In a bimodule block, "left i j"
gives the action of the i-th left-algebra basis element on the j-th
module basis vector, and "right i j" the action of the j-th right-algebra
basis element on the i-th module basis vector.

The canonical printer (print_file) emits this same grammar; parsing its
output reproduces the same declarations.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .linalg import Field, Matrix, unit_vec
from .algebra import (
    Algebra, AlgebraError, AlgebraMorphism, NonAssociative, make_algebra,
    matrix_algebra, opposite, product, subalgebra_from_spanning,
    triangular_algebra,
)
from .modules import Bimodule, bimodule_via
from .context import (
    check_exact_context, context_from_extension, context_from_milnor,
    context_from_morita, context_from_strictly_pure,
)


class DslError(Exception):
    pass


class DslSyntaxError(DslError):
    def __init__(self, line, col, expected, got=None):
        self.line = line
        self.col = col
        self.expected = expected
        self.got = got
        msg = f"syntax error at {line}:{col}: expected {expected}"
        if got is not None:
            msg += f", got {got!r}"
        super().__init__(msg)


class DuplicateName(DslError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"duplicate name {name!r}")


class UnresolvedReference(DslError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unresolved reference {name!r}")


class NotFiniteDimensional(DslError):
    pass


class BadRelation(DslError):
    pass


# ---------------------------------------------------------------------------
# tokenizer

_PUNCT = ("->", "{", "}", "[", "]", "(", ")", ";", ",", "*", "+", "-", "=",
          ":", "/")


@dataclass
class Token:
    kind: str   # NAME | INT | punctuation literal | EOF
    value: str
    line: int
    col: int


def tokenize(text):
    toks = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("->", i):
            toks.append(Token("->", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in "{}[]();,*+-=:/":
            toks.append(Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("NAME", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise DslSyntaxError(line, col, "a token", ch)
    toks.append(Token("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# AST

@dataclass
class FieldDecl:
    kind: str
    modulus: int | None = None


@dataclass
class Lincomb:
    terms: list  # (Fraction, int basis index); empty list is the zero vector


@dataclass
class StructConst:
    dim: int
    products: list   # ((i, j), Lincomb)
    unit: Lincomb | None


@dataclass
class QuiverExpr:
    vertices: list
    arrows: list     # (name, src, tgt)
    relations: list  # list of [(Fraction, (arrow names...))]
    bound: int


@dataclass
class MatrixAlgExpr:
    size: int
    base: str


@dataclass
class TriangularExpr:
    s: str
    t: str
    m: str


@dataclass
class OppositeExpr:
    base: str


@dataclass
class ProductExpr:
    a: str
    b: str


@dataclass
class AlgebraDecl:
    name: str
    expr: object


@dataclass
class SubDecl:
    name: str
    incl_name: str
    parent: str
    span: list     # of Lincomb


@dataclass
class MorphismDecl:
    name: str
    source: str
    target: str
    rows: list     # of list of Fraction


@dataclass
class PairingDecl:
    name: str
    left: str      # bimodule names
    right: str
    target: str    # algebra name
    rows: list


@dataclass
class BimoduleBody:
    dim: int
    left_lines: list    # ((i, j), Lincomb)
    right_lines: list
    distinguished: Lincomb | None


@dataclass
class BimoduleVia:
    f: str
    g: str


@dataclass
class BimoduleDecl:
    name: str
    left_algebra: str
    right_algebra: str
    expr: object


@dataclass
class ElementDecl:
    name: str
    bimodule: str
    value: Lincomb


@dataclass
class ContextQuadruple:
    lam: str
    mu: str
    bimodule: str
    element: str | None


@dataclass
class ContextMorita:
    a: str
    c: str
    x: str
    y: str
    f: str
    g: str


@dataclass
class ContextPure:
    iota: str
    xspan: list
    kappa: str
    yspan: list


@dataclass
class ContextExtension:
    lam: str


@dataclass
class ContextMilnor:
    j1: str
    j2: str


@dataclass
class ContextDecl:
    name: str
    expr: object


@dataclass
class PresentationFile:
    decls: list


# ---------------------------------------------------------------------------
# parser

class Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, value=None):
        t = self.peek()
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            raise DslSyntaxError(t.line, t.col, want, t.value or "end of input")
        return self.next()

    def at_name(self, value=None):
        t = self.peek()
        return t.kind == "NAME" and (value is None or t.value == value)

    def name_or_int(self):
        t = self.peek()
        if t.kind in ("NAME", "INT"):
            return self.next().value
        raise DslSyntaxError(t.line, t.col, "a name", t.value or "end of input")

    def parse_file(self):
        decls = []
        while self.peek().kind != "EOF":
            decls.append(self.parse_decl())
        return PresentationFile(decls=decls)

    def parse_decl(self):
        t = self.peek()
        if t.kind != "NAME":
            raise DslSyntaxError(t.line, t.col, "a declaration keyword",
                                 t.value or "end of input")
        kw = t.value
        if kw == "field":
            return self.parse_field()
        if kw == "algebra":
            return self.parse_algebra()
        if kw == "sub":
            return self.parse_sub()
        if kw == "morphism":
            return self.parse_morphism()
        if kw == "pairing":
            return self.parse_pairing()
        if kw == "bimodule":
            return self.parse_bimodule()
        if kw == "element":
            return self.parse_element()
        if kw == "context":
            return self.parse_context()
        raise DslSyntaxError(t.line, t.col, "a declaration keyword", kw)

    def parse_field(self):
        self.expect("NAME", "field")
        t = self.peek()
        if t.kind == "NAME" and t.value == "Q":
            self.next()
            return FieldDecl(kind="Q")
        if t.kind == "NAME" and t.value == "Fp":
            self.next()
            p = int(self.expect("INT").value)
            return FieldDecl(kind="Fp", modulus=p)
        raise DslSyntaxError(t.line, t.col, "Q or Fp", t.value)

    def parse_algebra(self):
        self.expect("NAME", "algebra")
        name = self.expect("NAME").value
        self.expect("=")
        t = self.peek()
        if t.kind != "NAME":
            raise DslSyntaxError(t.line, t.col, "an algebra constructor", t.value)
        if t.value == "structconst":
            return AlgebraDecl(name, self.parse_structconst())
        if t.value == "quiver":
            return AlgebraDecl(name, self.parse_quiver())
        if t.value == "matrixalg":
            self.next()
            size = int(self.expect("INT").value)
            base = self.expect("NAME").value
            return AlgebraDecl(name, MatrixAlgExpr(size=size, base=base))
        if t.value == "triangular":
            self.next()
            return AlgebraDecl(name, TriangularExpr(
                s=self.expect("NAME").value, t=self.expect("NAME").value,
                m=self.expect("NAME").value))
        if t.value == "opposite":
            self.next()
            return AlgebraDecl(name, OppositeExpr(base=self.expect("NAME").value))
        if t.value == "product":
            self.next()
            return AlgebraDecl(name, ProductExpr(
                a=self.expect("NAME").value, b=self.expect("NAME").value))
        raise DslSyntaxError(t.line, t.col, "an algebra constructor", t.value)

    def parse_structconst(self):
        self.expect("NAME", "structconst")
        self.expect("{")
        self.expect("NAME", "dim")
        dim = int(self.expect("INT").value)
        products = []
        unit = None
        while True:
            t = self.peek()
            if t.kind == "}":
                self.next()
                break
            self.expect(";")
            t = self.peek()
            if t.kind == "}":
                self.next()
                break
            if t.kind == "NAME" and t.value == "unit":
                self.next()
                self.expect("=")
                unit = self.parse_lincomb()
            elif t.kind == "INT":
                i = int(self.next().value)
                self.expect("*")
                j = int(self.expect("INT").value)
                self.expect("=")
                products.append(((i, j), self.parse_lincomb()))
            else:
                raise DslSyntaxError(t.line, t.col, "a product line or unit",
                                     t.value)
        return StructConst(dim=dim, products=products, unit=unit)

    def parse_quiver(self):
        self.expect("NAME", "quiver")
        self.expect("{")
        self.expect("NAME", "vertices")
        vertices = []
        while self.peek().kind in ("NAME", "INT"):
            vertices.append(self.name_or_int())
        self.expect(";")
        arrows = []
        relations = []
        bound = 12
        while self.peek().kind != "}":
            t = self.peek()
            if t.kind == "NAME" and t.value == "arrow":
                self.next()
                aname = self.name_or_int()
                self.expect(":")
                src = self.name_or_int()
                self.expect("->")
                tgt = self.name_or_int()
                self.expect(";")
                arrows.append((aname, src, tgt))
            elif t.kind == "NAME" and t.value == "relations":
                self.next()
                relations.append(self.parse_pathcomb(arrows))
                while self.peek().kind == ",":
                    self.next()
                    relations.append(self.parse_pathcomb(arrows))
                self.expect(";")
            elif t.kind == "NAME" and t.value == "bound":
                self.next()
                bound = int(self.expect("INT").value)
                self.expect(";")
            else:
                raise DslSyntaxError(t.line, t.col,
                                     "arrow, relations, bound or }", t.value)
        self.expect("}")
        return QuiverExpr(vertices=vertices, arrows=arrows,
                          relations=relations, bound=bound)

    def parse_pathcomb(self, arrows):
        terms = []
        sign = Fraction(1)
        if self.peek().kind == "-":
            self.next()
            sign = Fraction(-1)
        terms.append(self.parse_pathterm(sign))
        while self.peek().kind in ("+", "-"):
            s = Fraction(1) if self.next().kind == "+" else Fraction(-1)
            terms.append(self.parse_pathterm(s))
        return terms

    def parse_pathterm(self, sign):
        coef = Fraction(1)
        t = self.peek()
        if t.kind == "INT":
            coef = self.parse_rational()
            self.expect("*")
        path = [self.name_or_int()]
        while self.peek().kind == "*":
            self.next()
            path.append(self.name_or_int())
        return (sign * coef, tuple(path))

    def parse_rational(self):
        neg = False
        if self.peek().kind == "-":
            self.next()
            neg = True
        num = int(self.expect("INT").value)
        den = 1
        if self.peek().kind == "/":
            self.next()
            den = int(self.expect("INT").value)
        val = Fraction(num, den)
        return -val if neg else val

    def parse_lincomb(self):
        t = self.peek()
        if t.kind == "NAME" and t.value == "zero":
            self.next()
            return Lincomb(terms=[])
        terms = []
        sign = Fraction(1)
        if t.kind == "-":
            self.next()
            sign = Fraction(-1)
        terms.append(self.parse_term(sign))
        while self.peek().kind in ("+", "-"):
            s = Fraction(1) if self.next().kind == "+" else Fraction(-1)
            terms.append(self.parse_term(s))
        return Lincomb(terms=terms)

    def parse_term(self, sign):
        # [rat '*'] INT ; a bare INT is a basis index with coefficient 1
        save = self.pos
        first = self.expect("INT")
        if self.peek().kind in ("*", "/"):
            self.pos = save
            coef = self.parse_rational()
            self.expect("*")
            idx = int(self.expect("INT").value)
            return (sign * coef, idx)
        return (sign, int(first.value))

    def parse_matlit(self):
        self.expect("NAME", "matrix")
        self.expect("[")
        rows = [self.parse_row()]
        while self.peek().kind == ";":
            self.next()
            rows.append(self.parse_row())
        self.expect("]")
        return rows

    def parse_row(self):
        row = [self.parse_rational()]
        while self.peek().kind == ",":
            self.next()
            row.append(self.parse_rational())
        return row

    def parse_sub(self):
        self.expect("NAME", "sub")
        name = self.expect("NAME").value
        incl = self.expect("NAME").value
        self.expect("NAME", "of")
        parent = self.expect("NAME").value
        self.expect("NAME", "spanned")
        self.expect("{")
        span = [self.parse_lincomb()]
        while self.peek().kind == ";":
            self.next()
            if self.peek().kind == "}":
                break
            span.append(self.parse_lincomb())
        self.expect("}")
        return SubDecl(name=name, incl_name=incl, parent=parent, span=span)

    def parse_morphism(self):
        self.expect("NAME", "morphism")
        name = self.expect("NAME").value
        self.expect(":")
        source = self.expect("NAME").value
        self.expect("->")
        target = self.expect("NAME").value
        self.expect("=")
        rows = self.parse_matlit()
        return MorphismDecl(name=name, source=source, target=target, rows=rows)

    def parse_pairing(self):
        self.expect("NAME", "pairing")
        name = self.expect("NAME").value
        self.expect(":")
        left = self.expect("NAME").value
        right = self.expect("NAME").value
        self.expect("->")
        target = self.expect("NAME").value
        self.expect("=")
        rows = self.parse_matlit()
        return PairingDecl(name=name, left=left, right=right, target=target,
                           rows=rows)

    def parse_bimodule(self):
        self.expect("NAME", "bimodule")
        name = self.expect("NAME").value
        self.expect("NAME", "over")
        la = self.expect("NAME").value
        ra = self.expect("NAME").value
        self.expect("=")
        t = self.peek()
        if t.kind == "NAME" and t.value == "via":
            self.next()
            f = self.expect("NAME").value
            g = self.expect("NAME").value
            return BimoduleDecl(name=name, left_algebra=la, right_algebra=ra,
                                expr=BimoduleVia(f=f, g=g))
        self.expect("{")
        self.expect("NAME", "dim")
        dim = int(self.expect("INT").value)
        left_lines, right_lines = [], []
        distinguished = None
        while True:
            t = self.peek()
            if t.kind == "}":
                self.next()
                break
            self.expect(";")
            t = self.peek()
            if t.kind == "}":
                self.next()
                break
            if t.kind == "NAME" and t.value in ("left", "right"):
                which = self.next().value
                i = int(self.expect("INT").value)
                j = int(self.expect("INT").value)
                self.expect("=")
                lc = self.parse_lincomb()
                (left_lines if which == "left" else right_lines).append(((i, j), lc))
            elif t.kind == "NAME" and t.value == "distinguished":
                self.next()
                self.expect("=")
                distinguished = self.parse_lincomb()
            else:
                raise DslSyntaxError(t.line, t.col,
                                     "left, right, distinguished or }", t.value)
        return BimoduleDecl(name=name, left_algebra=la, right_algebra=ra,
                            expr=BimoduleBody(dim=dim, left_lines=left_lines,
                                              right_lines=right_lines,
                                              distinguished=distinguished))

    def parse_element(self):
        self.expect("NAME", "element")
        name = self.expect("NAME").value
        self.expect("NAME", "in")
        bimod = self.expect("NAME").value
        self.expect("=")
        return ElementDecl(name=name, bimodule=bimod, value=self.parse_lincomb())

    def parse_context(self):
        self.expect("NAME", "context")
        name = self.expect("NAME").value
        self.expect("=")
        t = self.peek()
        if t.kind == "(":
            self.next()
            lam = self.expect("NAME").value
            self.expect(",")
            mu = self.expect("NAME").value
            self.expect(",")
            bimod = self.expect("NAME").value
            element = None
            if self.peek().kind == ",":
                self.next()
                element = self.expect("NAME").value
            self.expect(")")
            return ContextDecl(name, ContextQuadruple(lam=lam, mu=mu,
                                                      bimodule=bimod,
                                                      element=element))
        if t.kind == "NAME" and t.value == "morita":
            self.next()
            args = [self.expect("NAME").value for _ in range(6)]
            return ContextDecl(name, ContextMorita(*args))
        if t.kind == "NAME" and t.value == "pure":
            self.next()
            iota = self.expect("NAME").value
            xspan = self.parse_span_bracket()
            kappa = self.expect("NAME").value
            yspan = self.parse_span_bracket()
            return ContextDecl(name, ContextPure(iota=iota, xspan=xspan,
                                                 kappa=kappa, yspan=yspan))
        if t.kind == "NAME" and t.value == "extension":
            self.next()
            return ContextDecl(name, ContextExtension(lam=self.expect("NAME").value))
        if t.kind == "NAME" and t.value == "milnor":
            self.next()
            return ContextDecl(name, ContextMilnor(
                j1=self.expect("NAME").value, j2=self.expect("NAME").value))
        raise DslSyntaxError(t.line, t.col, "a context constructor", t.value)

    def parse_span_bracket(self):
        self.expect("[")
        span = [self.parse_lincomb()]
        while self.peek().kind == ";":
            self.next()
            if self.peek().kind == "]":
                break
            span.append(self.parse_lincomb())
        self.expect("]")
        return span


def parse(text):
    """Parse a presentation file into its AST."""
    return Parser(text).parse_file()


# ---------------------------------------------------------------------------
# quiver elaboration

def elaborate_quiver(q, field):
    """Path algebra modulo relations, on the irreducible-path basis.

    Monomial order: length first, then lexicographic in arrow declaration
    order.  Relations are Gauss-reduced so each has a single leading term;
    leading terms become rewrite rules.  The basis is found by breadth
    first closure; exceeding the length bound raises NotFiniteDimensional,
    and a non-confluent rule set surfaces as BadRelation when the
    associativity check fails.
    """
    vnames = list(q.vertices)
    if len(set(vnames)) != len(vnames):
        raise BadRelation("duplicate vertex names")
    arrow_index = {}
    arrows = {}
    for idx, (aname, src, tgt) in enumerate(q.arrows):
        if aname in arrow_index or aname in vnames:
            raise BadRelation(f"duplicate arrow name {aname!r}")
        if src not in vnames or tgt not in vnames:
            raise UnresolvedReference(f"{src} -> {tgt}")
        arrow_index[aname] = idx
        arrows[aname] = (src, tgt)

    def path_endpoints(path):
        if not path:
            return None
        src = arrows[path[0]][0]
        cur = src
        for a in path:
            if a not in arrows:
                raise UnresolvedReference(a)
            if arrows[a][0] != cur:
                raise BadRelation(f"path {'*'.join(path)} is not composable")
            cur = arrows[a][1]
        return src, cur

    def key(path):
        return (len(path), tuple(arrow_index[a] for a in path))

    # normalize the relations: same endpoints per relation, then Gauss
    rel_vectors = []
    for rel in q.relations:
        vec = {}
        endpoints = None
        for coef, path in rel:
            if len(path) == 1 and path[0] in vnames:
                raise BadRelation("trivial paths are not allowed in relations")
            ep = path_endpoints(path)
            if endpoints is None:
                endpoints = ep
            elif ep != endpoints:
                raise BadRelation("relation mixes paths with different endpoints")
            vec[path] = vec.get(path, Fraction(0)) + coef
        vec = {p: field.of(c) for p, c in vec.items() if field.of(c) != field.zero}
        if vec:
            rel_vectors.append(vec)
    # Gauss elimination with the largest monomial leading
    rules = {}  # leading path -> dict smaller path -> coeff (the rest, negated)
    for vec in rel_vectors:
        vec = dict(vec)
        while vec:
            lead = max(vec, key=key)
            if lead not in rules:
                break
            coef = vec.pop(lead)
            for p, c in rules[lead].items():
                nv = field.norm(vec.get(p, field.zero) + coef * c)
                if nv:
                    vec[p] = nv
                else:
                    vec.pop(p, None)
        if not vec:
            continue
        lead = max(vec, key=key)
        lc = vec.pop(lead)
        inv = field.inv(lc)
        rest = {p: field.norm(-c * inv) for p, c in vec.items()}
        rules[lead] = rest
        # keep earlier rules reduced against the new one (tails only)
        for l2 in list(rules):
            if l2 == lead:
                continue
            tail = rules[l2]
            if lead in tail:
                c = tail.pop(lead)
                for p, cc in rest.items():
                    nv = field.norm(tail.get(p, field.zero) + c * cc)
                    if nv:
                        tail[p] = nv
                    else:
                        tail.pop(p, None)
            rules[l2] = tail
    leads = sorted(rules, key=key)

    def contains_lead(path):
        for lead in leads:
            L = len(lead)
            for start in range(len(path) - L + 1):
                if path[start:start + L] == lead:
                    return start, lead
        return None

    # irreducible paths by breadth-first closure
    basis_paths = [(v,) for v in vnames]   # trivial paths, then by length
    frontier = list(basis_paths)
    length = 0
    while frontier:
        length += 1
        if length > q.bound:
            raise NotFiniteDimensional(
                f"irreducible paths exceed the length bound {q.bound}")
        nxt = []
        for p in frontier:
            endv = p[-1] if p[0] in vnames and len(p) == 1 else arrows[p[-1]][1]
            for aname, (src, tgt) in arrows.items():
                if src != endv:
                    continue
                cand = (aname,) if p[0] in vnames and len(p) == 1 else p + (aname,)
                if contains_lead(cand) is None and cand not in nxt:
                    nxt.append(cand)
        frontier = nxt
        basis_paths.extend(nxt)
    index = {p: i for i, p in enumerate(basis_paths)}
    dim = len(basis_paths)

    def source_of(p):
        return p[0] if p[0] in vnames else arrows[p[0]][0]

    def target_of(p):
        return p[-1] if p[-1] in vnames else arrows[p[-1]][1]

    def normal_form(path, budget=10000):
        """rewrite a composable arrow path to a lincomb over the basis"""
        out = {}
        stack = [(field.one, path)]
        steps = 0
        while stack:
            steps += 1
            if steps > budget:
                raise BadRelation("rewriting did not terminate")
            coef, p = stack.pop()
            hit = contains_lead(p)
            if hit is None:
                out[p] = field.norm(out.get(p, field.zero) + coef)
                continue
            start, lead = hit
            pre, post = p[:start], p[start + len(lead):]
            for q2, c in rules[lead].items():
                if q2 and q2[0] in vnames:
                    stack.append((field.norm(coef * c), pre + post))
                else:
                    stack.append((field.norm(coef * c), pre + q2 + post))
        return {p: c for p, c in out.items() if c}

    def to_vec(lin):
        v = [field.zero] * dim
        for p, c in lin.items():
            if p not in index:
                raise BadRelation(f"normal form left the basis at {p}")
            v[index[p]] = c
        return tuple(v)

    zero = tuple(field.zero for _ in range(dim))
    mult = [[zero] * dim for _ in range(dim)]
    for i, p in enumerate(basis_paths):
        for j, p2 in enumerate(basis_paths):
            if target_of(p) != source_of(p2):
                continue
            trivial_p = p[0] in vnames and len(p) == 1
            trivial_q = p2[0] in vnames and len(p2) == 1
            if trivial_p and trivial_q:
                comp = p
            elif trivial_p:
                comp = p2
            elif trivial_q:
                comp = p
            else:
                comp = p + p2
            mult[i][j] = to_vec(normal_form(comp))
    unit = [field.zero] * dim
    for v in vnames:
        unit[index[(v,)]] = field.one
    labels = ["*".join(p) if not (len(p) == 1 and p[0] in vnames) else f"e_{p[0]}"
              for p in basis_paths]
    try:
        return make_algebra(field, labels, mult, tuple(unit))
    except NonAssociative as e:
        raise BadRelation(
            f"relations do not define a confluent rewriting system: {e}")


# ---------------------------------------------------------------------------
# elaboration

@dataclass
class Workspace:
    field: Field
    algebras: dict = dc_field(default_factory=dict)
    morphisms: dict = dc_field(default_factory=dict)
    pairings: dict = dc_field(default_factory=dict)
    bimodules: dict = dc_field(default_factory=dict)
    elements: dict = dc_field(default_factory=dict)
    contexts: dict = dc_field(default_factory=dict)
    order: list = dc_field(default_factory=list)

    def fresh(self, name):
        if name in self.order:
            raise DuplicateName(name)
        self.order.append(name)


def _lincomb_vec(field, lc, dim):
    v = [field.zero] * dim
    for coef, idx in lc.terms:
        if not (0 <= idx < dim):
            raise DslError(f"basis index {idx} out of range 0..{dim - 1}")
        v[idx] = field.norm(v[idx] + field.of(coef))
    return tuple(v)


def elaborate(pfile, field_override=None):
    """Turn a parsed file into validated Workspace objects.

    A 'field' declaration sets the ambient field; the CLI may override it
    to rerun the same presentation over another exact field.
    """
    field = None
    for d in pfile.decls:
        if isinstance(d, FieldDecl):
            field = Field.rationals() if d.kind == "Q" else Field.prime(d.modulus)
            break
    if field is None:
        field = Field.rationals()
    if field_override is not None:
        field = field_override
    ws = Workspace(field=field)
    for d in pfile.decls:
        if isinstance(d, FieldDecl):
            continue
        if isinstance(d, AlgebraDecl):
            ws.fresh(d.name)
            ws.algebras[d.name] = _elab_algebra(ws, d.expr)
        elif isinstance(d, SubDecl):
            ws.fresh(d.name)
            ws.fresh(d.incl_name)
            parent = _get(ws.algebras, d.parent)
            span = [_lincomb_vec(field, lc, parent.dim) for lc in d.span]
            sub, incl = subalgebra_from_spanning(parent, span)
            ws.algebras[d.name] = sub
            ws.morphisms[d.incl_name] = incl
        elif isinstance(d, MorphismDecl):
            ws.fresh(d.name)
            src = _get(ws.algebras, d.source)
            tgt = _get(ws.algebras, d.target)
            rows = [[field.of(v) for v in row] for row in d.rows]
            if len(rows) != src.dim or any(len(r) != tgt.dim for r in rows):
                raise DslError(
                    f"morphism {d.name}: matrix must be {src.dim}x{tgt.dim}")
            ws.morphisms[d.name] = AlgebraMorphism(src, tgt, rows)
        elif isinstance(d, PairingDecl):
            ws.fresh(d.name)
            ws.pairings[d.name] = d
        elif isinstance(d, BimoduleDecl):
            ws.fresh(d.name)
            ws.bimodules[d.name] = _elab_bimodule(ws, d)
        elif isinstance(d, ElementDecl):
            ws.fresh(d.name)
            mb = _get(ws.bimodules, d.bimodule)
            ws.elements[d.name] = (d.bimodule, _lincomb_vec(field, d.value, mb.dim))
        elif isinstance(d, ContextDecl):
            ws.fresh(d.name)
            ws.contexts[d.name] = _elab_context(ws, d.expr)
        else:
            raise DslError(f"unknown declaration {d!r}")
    return ws


def _get(table, name):
    if name not in table:
        raise UnresolvedReference(name)
    return table[name]


def _elab_algebra(ws, expr):
    field = ws.field
    if isinstance(expr, StructConst):
        dim = expr.dim
        zero = tuple(field.zero for _ in range(dim))
        mult = [[zero] * dim for _ in range(dim)]
        for (i, j), lc in expr.products:
            if not (0 <= i < dim and 0 <= j < dim):
                raise DslError(f"product indices ({i},{j}) out of range")
            mult[i][j] = _lincomb_vec(field, lc, dim)
        if expr.unit is None:
            raise DslError("structconst block needs a unit line")
        unit = _lincomb_vec(field, expr.unit, dim)
        labels = [f"b{i}" for i in range(dim)]
        return make_algebra(field, labels, mult, unit)
    if isinstance(expr, QuiverExpr):
        return elaborate_quiver(expr, field)
    if isinstance(expr, MatrixAlgExpr):
        return matrix_algebra(_get(ws.algebras, expr.base), expr.size)
    if isinstance(expr, TriangularExpr):
        tri = triangular_algebra(_get(ws.algebras, expr.s),
                                 _get(ws.algebras, expr.t),
                                 _get(ws.bimodules, expr.m))
        return tri.algebra
    if isinstance(expr, OppositeExpr):
        return opposite(_get(ws.algebras, expr.base))
    if isinstance(expr, ProductExpr):
        return product(_get(ws.algebras, expr.a), _get(ws.algebras, expr.b))
    raise DslError(f"unknown algebra expression {expr!r}")


def _elab_bimodule(ws, d):
    field = ws.field
    la = _get(ws.algebras, d.left_algebra)
    ra = _get(ws.algebras, d.right_algebra)
    if isinstance(d.expr, BimoduleVia):
        f = _get(ws.morphisms, d.expr.f)
        g = _get(ws.morphisms, d.expr.g)
        if f.source is not la or g.source is not ra:
            raise DslError(f"bimodule {d.name}: via-morphism sources must be "
                           "the over-clause algebras")
        return bimodule_via(f, g)
    body = d.expr
    dim = body.dim
    left = [[[field.zero] * dim for _ in range(dim)] for _ in range(la.dim)]
    right = [[[field.zero] * dim for _ in range(dim)] for _ in range(ra.dim)]
    for (i, j), lc in body.left_lines:
        if not (0 <= i < la.dim and 0 <= j < dim):
            raise DslError(f"left action indices ({i},{j}) out of range")
        vec = _lincomb_vec(field, lc, dim)
        for t, v in enumerate(vec):
            left[i][j][t] = v
    for (i, j), lc in body.right_lines:
        if not (0 <= i < dim and 0 <= j < ra.dim):
            raise DslError(f"right action indices ({i},{j}) out of range")
        vec = _lincomb_vec(field, lc, dim)
        for t, v in enumerate(vec):
            right[j][i][t] = v
    dist = None
    if body.distinguished is not None:
        dist = _lincomb_vec(field, body.distinguished, dim)
    return Bimodule(la, ra, dim,
                    [Matrix(field, m, cols=dim) for m in left],
                    [Matrix(field, m, cols=dim) for m in right],
                    distinguished=dist)


def _elab_context(ws, expr):
    field = ws.field
    if isinstance(expr, ContextQuadruple):
        lam = _get(ws.morphisms, expr.lam)
        mu = _get(ws.morphisms, expr.mu)
        mb = _get(ws.bimodules, expr.bimodule)
        if expr.element is not None:
            bname, coords = _get(ws.elements, expr.element)
            if bname != expr.bimodule:
                raise DslError("element lives in a different bimodule")
            m = coords
        else:
            if mb.distinguished is None:
                raise DslError("context needs an element or a distinguished one")
            m = mb.distinguished
        return check_exact_context(lam, mu, mb, m)
    if isinstance(expr, ContextMorita):
        a = _get(ws.algebras, expr.a)
        c = _get(ws.algebras, expr.c)
        x = _get(ws.bimodules, expr.x)
        y = _get(ws.bimodules, expr.y)
        fdecl = _get(ws.pairings, expr.f)
        gdecl = _get(ws.pairings, expr.g)
        f = _pairing_tensor(ws, fdecl, x, y, a)
        g = _pairing_tensor(ws, gdecl, y, x, c)
        ctx, _ = context_from_morita(a, c, x, y, f, g)
        return ctx
    if isinstance(expr, ContextPure):
        iota = _get(ws.morphisms, expr.iota)
        kappa = _get(ws.morphisms, expr.kappa)
        r = iota.source
        if kappa.source is not r:
            raise DslError("pure context needs morphisms with the same source")
        xspan = [_lincomb_vec(field, lc, iota.target.dim) for lc in expr.xspan]
        yspan = [_lincomb_vec(field, lc, kappa.target.dim) for lc in expr.yspan]
        ctx, _ = context_from_strictly_pure(r, (iota.target, iota, xspan),
                                            (kappa.target, kappa, yspan))
        return ctx
    if isinstance(expr, ContextExtension):
        return context_from_extension(_get(ws.morphisms, expr.lam))
    if isinstance(expr, ContextMilnor):
        return context_from_milnor(_get(ws.morphisms, expr.j1),
                                   _get(ws.morphisms, expr.j2))
    raise DslError(f"unknown context expression {expr!r}")


def _pairing_tensor(ws, decl, left, right, target):
    field = ws.field
    rows = decl.rows
    if len(rows) != left.dim * right.dim or any(len(r) != target.dim for r in rows):
        raise DslError(f"pairing {decl.name}: matrix must be "
                       f"{left.dim * right.dim}x{target.dim}")
    out = []
    for i in range(left.dim):
        out.append([tuple(field.of(v) for v in rows[i * right.dim + j])
                    for j in range(right.dim)])
    return out


# ---------------------------------------------------------------------------
# canonical printer

def _fmt_frac(x):
    return str(x)


def _fmt_lincomb(lc):
    if not lc.terms:
        return "zero"
    parts = []
    for n, (coef, idx) in enumerate(lc.terms):
        c = Fraction(coef)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = str(idx) if mag == 1 else f"{mag}*{idx}"
        if n == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


def _fmt_pathcomb(rel):
    parts = []
    for n, (coef, path) in enumerate(rel):
        c = Fraction(coef)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = "*".join(path) if mag == 1 else f"{mag}*" + "*".join(path)
        if n == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


def _fmt_matrix(rows):
    return "[ " + "; ".join(", ".join(_fmt_frac(v) for v in row)
                            for row in rows) + " ]"


def print_file(pfile):
    """Canonical text of a parsed file; parse(print_file(f)) == f."""
    out = []
    for d in pfile.decls:
        if isinstance(d, FieldDecl):
            out.append("field Q" if d.kind == "Q" else f"field Fp {d.modulus}")
        elif isinstance(d, AlgebraDecl):
            out.append(f"algebra {d.name} = {_print_algexpr(d.expr)}")
        elif isinstance(d, SubDecl):
            span = "; ".join(_fmt_lincomb(lc) for lc in d.span)
            out.append(f"sub {d.name} {d.incl_name} of {d.parent} "
                       f"spanned {{ {span} }}")
        elif isinstance(d, MorphismDecl):
            out.append(f"morphism {d.name} : {d.source} -> {d.target} = "
                       f"matrix {_fmt_matrix(d.rows)}")
        elif isinstance(d, PairingDecl):
            out.append(f"pairing {d.name} : {d.left} {d.right} -> {d.target} = "
                       f"matrix {_fmt_matrix(d.rows)}")
        elif isinstance(d, BimoduleDecl):
            out.append(_print_bimodule(d))
        elif isinstance(d, ElementDecl):
            out.append(f"element {d.name} in {d.bimodule} = {_fmt_lincomb(d.value)}")
        elif isinstance(d, ContextDecl):
            out.append(f"context {d.name} = {_print_ctxexpr(d.expr)}")
        else:
            raise DslError(f"cannot print {d!r}")
    return "\n".join(out) + "\n"


def _print_algexpr(expr):
    if isinstance(expr, StructConst):
        lines = [f"dim {expr.dim}"]
        for (i, j), lc in expr.products:
            lines.append(f"{i}*{j} = {_fmt_lincomb(lc)}")
        if expr.unit is not None:
            lines.append(f"unit = {_fmt_lincomb(expr.unit)}")
        return "structconst { " + "; ".join(lines) + " }"
    if isinstance(expr, QuiverExpr):
        lines = ["vertices " + " ".join(expr.vertices) + ";"]
        for aname, src, tgt in expr.arrows:
            lines.append(f"arrow {aname} : {src} -> {tgt};")
        if expr.relations:
            lines.append("relations "
                         + ", ".join(_fmt_pathcomb(r) for r in expr.relations) + ";")
        lines.append(f"bound {expr.bound};")
        return "quiver { " + " ".join(lines) + " }"
    if isinstance(expr, MatrixAlgExpr):
        return f"matrixalg {expr.size} {expr.base}"
    if isinstance(expr, TriangularExpr):
        return f"triangular {expr.s} {expr.t} {expr.m}"
    if isinstance(expr, OppositeExpr):
        return f"opposite {expr.base}"
    if isinstance(expr, ProductExpr):
        return f"product {expr.a} {expr.b}"
    raise DslError(f"cannot print algebra expression {expr!r}")


def _print_bimodule(d):
    head = f"bimodule {d.name} over {d.left_algebra} {d.right_algebra} = "
    if isinstance(d.expr, BimoduleVia):
        return head + f"via {d.expr.f} {d.expr.g}"
    body = d.expr
    lines = [f"dim {body.dim}"]
    for (i, j), lc in body.left_lines:
        lines.append(f"left {i} {j} = {_fmt_lincomb(lc)}")
    for (i, j), lc in body.right_lines:
        lines.append(f"right {i} {j} = {_fmt_lincomb(lc)}")
    if body.distinguished is not None:
        lines.append(f"distinguished = {_fmt_lincomb(body.distinguished)}")
    return head + "{ " + "; ".join(lines) + " }"


def _print_ctxexpr(expr):
    if isinstance(expr, ContextQuadruple):
        inner = f"{expr.lam} , {expr.mu} , {expr.bimodule}"
        if expr.element:
            inner += f" , {expr.element}"
        return f"( {inner} )"
    if isinstance(expr, ContextMorita):
        return f"morita {expr.a} {expr.c} {expr.x} {expr.y} {expr.f} {expr.g}"
    if isinstance(expr, ContextPure):
        xs = "; ".join(_fmt_lincomb(lc) for lc in expr.xspan)
        ys = "; ".join(_fmt_lincomb(lc) for lc in expr.yspan)
        return f"pure {expr.iota} [ {xs} ] {expr.kappa} [ {ys} ]"
    if isinstance(expr, ContextExtension):
        return f"extension {expr.lam}"
    if isinstance(expr, ContextMilnor):
        return f"milnor {expr.j1} {expr.j2}"
    raise DslError(f"cannot print context expression {expr!r}")


def algebra_to_decl(name, alg):
    """Render an Algebra value as a structconst declaration."""
    products = []
    for i in range(alg.dim):
        for j in range(alg.dim):
            vec = alg.mult[i][j]
            terms = [(Fraction(v) if alg.field.p == 0 else Fraction(int(v)), t)
                     for t, v in enumerate(vec) if v]
            if terms:
                products.append(((i, j), Lincomb(terms=terms)))
    unit_terms = [(Fraction(v) if alg.field.p == 0 else Fraction(int(v)), t)
                  for t, v in enumerate(alg.unit) if v]
    return AlgebraDecl(name, StructConst(dim=alg.dim, products=products,
                                         unit=Lincomb(terms=unit_terms)))
