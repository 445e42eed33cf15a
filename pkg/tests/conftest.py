import itertools
import random
from fractions import Fraction

import pytest
import sympy

from brentkit.exact import Algorithm, MatMulFormat, builtin_strassen, natural_algorithm, vectorize_rowwise


@pytest.fixture
def strassen():
    return builtin_strassen()


@pytest.fixture
def nat222():
    return natural_algorithm(MatMulFormat(2, 2, 2))


def small_formats(limit):
    return [MatMulFormat(*f) for f in itertools.product(range(1, limit + 1), repeat=3)]


def naive_residual(q: Algorithm) -> dict:
    """Brent equations evaluated by explicit loops, keyed by (i1,i2,j1,j2,k1,k2)."""
    m, n, p = q.format.as_tuple()
    out = {}
    for i1, i2, j1, j2, k1, k2 in itertools.product(range(m), range(n), range(n), range(p), range(p), range(m)):
        s = Fraction(0)
        for t in q.terms:
            s += t.u.entries[i1][i2] * t.v.entries[j1][j2] * t.w.entries[k1][k2]
        out[(i1, i2, j1, j2, k1, k2)] = s - int(i2 == j1 and j2 == k1 and k2 == i1)
    return out


def sympy_rank(rows) -> int:
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    return sympy.Matrix(rows).rank()


def random_algorithm(fmt: MatMulFormat, r: int, rng: random.Random, lo=-2, hi=2, den=1) -> Algorithm:
    def mat(rows, cols):
        return [[Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den)) for _ in range(cols)] for _ in range(rows)]

    m, n, p = fmt.as_tuple()
    return Algorithm.from_factors(
        fmt, [mat(m, n) for _ in range(r)], [mat(n, p) for _ in range(r)], [mat(p, m) for _ in range(r)]
    )


def prescribed_rank(rng: random.Random, rows: int, cols: int, k: int):
    """rows x cols integer matrix of rank exactly k, as a product of k-column factors."""
    while True:
        left = [[rng.randint(-3, 3) for _ in range(k)] for _ in range(rows)]
        right = [[rng.randint(-3, 3) for _ in range(cols)] for _ in range(k)]
        a = [[sum(left[i][t] * right[t][j] for t in range(k)) for j in range(cols)] for i in range(rows)]
        # keep only draws whose factors are themselves full rank, so the rank is k
        if sympy_rank(left) == k and sympy_rank(right) == k:
            return a


def weak_d_brute_force(q: Algorithm, role: str) -> bool:
    """Search every maximal independent subset and every column order for a
    block-diagonal basis matrix with a leading (cols x cols) block."""
    rows, cols = q.format.role_shape(role)
    side = rows * cols
    vecs = [vectorize_rowwise(f) for f in q.factors(role)]
    for subset in itertools.combinations(range(len(vecs)), side):
        if sympy_rank([vecs[i] for i in subset]) != side:
            continue
        for order in itertools.permutations(subset):
            head, tail = order[:cols], order[cols:]
            if all(not any(vecs[i][cols:]) for i in head) and all(not any(vecs[i][:cols]) for i in tail):
                return True
    return False


def random_sparse_algorithm(rng: random.Random, r: int) -> Algorithm:
    """Tiny <2,2,2> factor triples; most factors live on a single row, so
    both weak-D outcomes are common."""

    def mat():
        rows = rng.choice([(0,), (1,), (1,), (0, 1)])
        return [[rng.choice([0, 1, 1, -1, 2]) if i in rows else 0 for _ in range(2)] for i in range(2)]

    return Algorithm.from_factors(MatMulFormat(2, 2, 2), [mat() for _ in range(r)], [mat() for _ in range(r)], [mat() for _ in range(r)])


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
