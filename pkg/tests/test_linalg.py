from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from excon.linalg import (
    Field, Matrix, SpanSolver, kernel_basis, left_kernel, quotient_space,
    rank, rref, solve, span_rank,
)

Q = Field.rationals()
F5 = Field.prime(5)


def M(field, rows):
    return Matrix(field, [[field.of(x) for x in row] for row in rows])


def test_field_construction():
    assert Q.is_rationals
    assert F5.p == 5
    with pytest.raises(ValueError):
        Field.prime(6)
    assert Q.of("3/2") == Fraction(3, 2)
    assert F5.of(Fraction(1, 2)) == 3  # 2 * 3 = 6 = 1 mod 5
    with pytest.raises(ZeroDivisionError):
        F5.of(Fraction(1, 5))


def test_rref_identity():
    m = Matrix.identity(Q, 2)
    red, pivots, rk = rref(m)
    assert red == m
    assert pivots == [0, 1]
    assert rk == 2


def test_rref_dependent_rows():
    m = M(Q, [[1, 2], [2, 4]])
    red, pivots, rk = rref(m)
    assert red.to_lists() == [[1, 2], [0, 0]]
    assert pivots == [0]
    assert rk == 1


def test_rref_swap_over_f5():
    # hand elimination: swap rows, already reduced
    m = M(F5, [[0, 1], [1, 0]])
    red, pivots, rk = rref(m)
    assert red == Matrix.identity(F5, 2)
    assert rk == 2


def test_rref_idempotent():
    m = M(Q, [[2, 4, 1], [1, 1, 1], [3, 5, 2]])
    red1 = rref(m)[0]
    red2 = rref(red1)[0]
    assert red1 == red2


def test_kernel_identity_empty():
    assert kernel_basis(Matrix.identity(Q, 3)) == []


def test_kernel_zero_matrix():
    ker = kernel_basis(Matrix.zero(Q, 2, 3))
    assert ker == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_kernel_line():
    # x + y = 0, normalization: free coordinate gets 1
    ker = kernel_basis(M(Q, [[1, 1]]))
    assert ker == [(Fraction(-1), Fraction(1))]


def test_solve_identity():
    b = (Fraction(3), Fraction(7))
    assert solve(Matrix.identity(Q, 2), b) == b


def test_solve_underdetermined():
    assert solve(M(Q, [[1, 1]]), (Fraction(2),)) == (2, 0)


def test_solve_inconsistent():
    assert solve(M(Q, [[0, 0]]), (Fraction(1),)) is None


def test_solve_exact():
    m = M(Q, [[2, 1], [1, 3]])
    b = (Fraction(5), Fraction(10))
    x = solve(m, b)
    assert tuple(sum(r[j] * x[j] for j in range(2)) for r in m.data) == b


def test_quotient_no_relations():
    q = quotient_space(Q, 2, [])
    assert q.dim == 2
    assert q.projection == Matrix.identity(Q, 2)


def test_quotient_one_relation():
    q = quotient_space(Q, 2, [(Q.of(1), Q.of(-1))])
    assert q.dim == 1
    # both basis vectors map to the same class
    assert q.project((Q.of(1), Q.of(0))) == q.project((Q.of(0), Q.of(1)))
    # section followed by projection is the identity
    assert (q.section @ q.projection) == Matrix.identity(Q, 1)


def test_quotient_full_relations():
    rels = [(Q.of(1), Q.of(0), Q.of(0)), (Q.of(0), Q.of(1), Q.of(0)),
            (Q.of(1), Q.of(1), Q.of(1))]
    q = quotient_space(Q, 3, rels)
    assert q.dim == 0


def test_quotient_relations_die():
    rels = [(Q.of(2), Q.of(4)), (Q.of(1), Q.of(3))]
    q = quotient_space(Q, 2, rels)
    for r in rels:
        assert all(v == 0 for v in q.project(r))


def test_span_solver_roundtrip():
    basis = [(Q.of(1), Q.of(1), Q.of(0)), (Q.of(0), Q.of(1), Q.of(1))]
    sol = SpanSolver(Q, 3, basis)
    assert sol.coords((Q.of(1), Q.of(2), Q.of(1))) == (1, 1)
    assert sol.coords((Q.of(1), Q.of(0), Q.of(0))) is None


small_entries = st.integers(min_value=-4, max_value=4)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4),
       st.lists(small_entries, min_size=16, max_size=16),
       st.sampled_from([0, 5, 101]))
def test_rank_nullity_property(nr, nc, entries, p):
    field = Field(p)
    m = Matrix(field, [[field.of(entries[i * nc + j]) for j in range(nc)]
                       for i in range(nr)])
    ker = kernel_basis(m)
    assert rank(m) + len(ker) == nc
    for v in ker:
        img = tuple(field.norm(sum(row[j] * v[j] for j in range(nc))) for row in m.data)
        assert all(x == 0 for x in img)


@settings(max_examples=40, deadline=None)
@given(st.lists(small_entries, min_size=12, max_size=12),
       st.lists(small_entries, min_size=3, max_size=3),
       st.sampled_from([0, 7]))
def test_solve_property(entries, bvals, p):
    field = Field(p)
    m = Matrix(field, [[field.of(entries[i * 4 + j]) for j in range(4)] for i in range(3)])
    b = tuple(field.of(x) for x in bvals)
    x = solve(m, b)
    if x is not None:
        got = tuple(field.norm(sum(row[j] * x[j] for j in range(4))) for row in m.data)
        assert got == b


def test_sparse_and_dense_rank_agree():
    rows = [[1, 2, 0, 1], [0, 1, 1, 0], [1, 3, 1, 1], [2, 0, 1, 5]]
    m = M(Q, rows)
    assert span_rank(Q, 4, [tuple(Q.of(x) for x in r) for r in rows]) == rank(m)


def test_left_kernel_bridge():
    m = M(Q, [[1], [1]])
    lk = left_kernel(m)
    assert lk == [(Fraction(-1), Fraction(1))]
