from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brentkit import exact as ex
from brentkit.exact import (
    Algorithm,
    MatMulFormat,
    SingularMatrix,
    builtin_strassen,
    invert_exact,
    kron_product,
    natural_algorithm,
    unvectorize,
    vectorize_rowwise,
)

F = Fraction


def int_matrix(rows, cols, lo=-4, hi=4):
    return st.lists(
        st.lists(st.integers(lo, hi), min_size=cols, max_size=cols), min_size=rows, max_size=rows
    ).map(ex.matrix)


def test_rational_canonical_form():
    x = F(6, -4)
    assert (x.numerator, x.denominator) == (-3, 2)
    assert (F(1, 3) + F(2, 7)) - F(2, 7) == F(1, 3)


def test_format_validation():
    with pytest.raises(ValueError):
        MatMulFormat(0, 1, 1)
    assert MatMulFormat(2, 3, 4).role_shape("W") == (4, 2)


def test_natural_smallest():
    q = natural_algorithm(MatMulFormat(1, 1, 1))
    assert q.r == 1
    t = q.terms[0]
    assert (t.u.entries, t.v.entries, t.w.entries) == (((1,),), ((1,),), ((1,),))


def test_natural_222_term_order():
    q = natural_algorithm(MatMulFormat(2, 2, 2))
    assert q.r == 8
    # (i,j,k) = (1,2,1) in 1-based lexicographic order is position 2
    t = q.terms[2]
    assert t.u.entries == ex.unit(2, 2, 0, 1)
    assert t.v.entries == ex.unit(2, 2, 1, 0)
    assert t.w.entries == ex.unit(2, 2, 0, 0)


def test_natural_333_single_nonzero_per_factor():
    q = natural_algorithm(MatMulFormat(3, 3, 3))
    assert q.r == 27
    for t in q.terms:
        for role in ex.ROLES:
            entries = [x for row in t.factor(role).entries for x in row]
            assert sorted(entries) == [0] * 8 + [1]


def test_strassen_shape_and_entries():
    q = builtin_strassen()
    assert q.r == 7 and q.format == MatMulFormat(2, 2, 2)
    assert {x for t in q.terms for role in ex.ROLES for row in t.factor(role).entries for x in row} <= {-1, 0, 1}


def test_algorithm_rejects_bad_shapes():
    with pytest.raises(ex.ShapeError):
        Algorithm.from_factors(MatMulFormat(2, 2, 2), [ex.identity(3)], [ex.identity(2)], [ex.identity(2)])


def test_vectorize_two_by_two():
    a = ex.matrix([[11, 12], [21, 22]])
    assert vectorize_rowwise(a) == (11, 12, 21, 22)


def test_vectorize_zero_and_units():
    assert vectorize_rowwise(ex.zeros(2, 3)) == (0,) * 6
    m, n = 3, 4
    for i in range(m):
        for j in range(n):
            v = vectorize_rowwise(ex.unit(m, n, i, j))
            assert v.index(1) == i * n + j and sum(v) == 1


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_vectorize_linear_bijection(rows, cols, data):
    a = data.draw(int_matrix(rows, cols))
    b = data.draw(int_matrix(rows, cols))
    s = data.draw(st.fractions(min_value=-5, max_value=5, max_denominator=5))
    assert unvectorize(vectorize_rowwise(a), rows, cols) == a
    lhs = vectorize_rowwise(ex.add(a, ex.scale(b, s)))
    rhs = tuple(x + s * y for x, y in zip(vectorize_rowwise(a), vectorize_rowwise(b)))
    assert lhs == rhs


def test_kron_identity():
    assert kron_product(ex.identity(2), ex.identity(3)) == ex.identity(6)


def test_kron_diag_swap():
    swap = ex.matrix([[0, 1], [1, 0]])
    expected = ex.matrix([[0, 2, 0, 0], [2, 0, 0, 0], [0, 0, 0, 3], [0, 0, 3, 0]])
    assert kron_product(ex.diag([2, 3]), swap) == expected


def test_kron_of_generalized_permutations():
    from brentkit.symmetry import is_generalized_permutation

    a = ex.matrix([[0, 2], [-1, 0]])
    b = ex.matrix([[0, 0, 5], [3, 0, 0], [0, F(1, 2), 0]])
    assert is_generalized_permutation(kron_product(a, b))


@settings(max_examples=60)
@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_kron_mixed_product(m, n, data):
    a, c = data.draw(int_matrix(m, m)), data.draw(int_matrix(m, m))
    b, d = data.draw(int_matrix(n, n)), data.draw(int_matrix(n, n))
    assert ex.matmul(kron_product(a, b), kron_product(c, d)) == kron_product(ex.matmul(a, c), ex.matmul(b, d))


def test_invert_examples():
    assert invert_exact(ex.identity(3)) == ex.identity(3)
    assert invert_exact(ex.matrix([[1, 1], [0, 1]])) == ex.matrix([[1, -1], [0, 1]])
    with pytest.raises(SingularMatrix):
        invert_exact(ex.matrix([[1, 2], [2, 4]]))


@given(st.integers(1, 4), st.data())
def test_invert_roundtrip(n, data):
    a = data.draw(int_matrix(n, n))
    try:
        inv = invert_exact(a)
    except SingularMatrix:
        import sympy

        assert sympy.Matrix([list(r) for r in a]).det() == 0
        return
    assert ex.matmul(inv, a) == ex.identity(n)
    assert ex.matmul(a, inv) == ex.identity(n)
