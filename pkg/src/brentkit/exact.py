"""Exact rational matrices, algorithms for <m,n,p>, and the small linear
algebra the rest of the package is built on.

Matrices are tuples of row tuples of ``Fraction``; everything here is an
immutable value.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
Matrix = tuple  # tuple[tuple[Fraction, ...], ...]

ROLES = ("U", "V", "W")


class SingularMatrix(ArithmeticError):
    pass


class ShapeError(ValueError):
    pass


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact entries")
    return Fraction(x)


def matrix(rows: Iterable[Iterable]) -> Matrix:
    out = tuple(tuple(as_rational(x) for x in row) for row in rows)
    if out and len({len(r) for r in out}) != 1:
        raise ShapeError("ragged matrix")
    return out


def shape(a: Matrix) -> tuple[int, int]:
    return (len(a), len(a[0]) if a else 0)


def zeros(rows: int, cols: int) -> Matrix:
    return tuple((Fraction(0),) * cols for _ in range(rows))


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def unit(rows: int, cols: int, i: int, j: int) -> Matrix:
    """The matrix e_ij (0-based i, j)."""
    return tuple(
        tuple(Fraction(int(r == i and c == j)) for c in range(cols)) for r in range(rows)
    )


def diag(values: Sequence) -> Matrix:
    n = len(values)
    return tuple(
        tuple(as_rational(values[i]) if i == j else Fraction(0) for j in range(n))
        for i in range(n)
    )


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if shape(a)[1] != shape(b)[0]:
        raise ShapeError(f"cannot multiply {shape(a)} by {shape(b)}")
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def scale(a: Matrix, s) -> Matrix:
    s = as_rational(s)
    return tuple(tuple(s * x for x in row) for row in a)


def add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def is_zero(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def vectorize_rowwise(x: Matrix) -> tuple[Fraction, ...]:
    """Concatenate the rows of ``x``; entry (i, j) lands at i*cols + j."""
    return tuple(v for row in x for v in row)


def unvectorize(vec: Sequence, rows: int, cols: int) -> Matrix:
    if len(vec) != rows * cols:
        raise ShapeError(f"vector of length {len(vec)} cannot be a {rows}x{cols} matrix")
    return tuple(tuple(as_rational(vec[i * cols + j]) for j in range(cols)) for i in range(rows))


def kron_product(a: Matrix, b: Matrix) -> Matrix:
    """Block matrix (a_ij * b)."""
    ra, ca = shape(a)
    rb, cb = shape(b)
    return tuple(
        tuple(a[i][j] * b[k][l] for j in range(ca) for l in range(cb))
        for i in range(ra)
        for k in range(rb)
    )


def invert_exact(a: Matrix) -> Matrix:
    """Gauss-Jordan inverse over Q. Raises SingularMatrix when rank < size."""
    n, cols = shape(a)
    if n != cols:
        raise ShapeError(f"cannot invert a {n}x{cols} matrix")
    work = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if work[r][c] != 0), None)
        if piv is None:
            raise SingularMatrix(f"matrix is singular (no pivot in column {c})")
        work[c], work[piv] = work[piv], work[c]
        inv = 1 / work[c][c]
        work[c] = [x * inv for x in work[c]]
        for r in range(n):
            f = work[r][c]
            if r != c and f != 0:
                pr = work[c]
                work[r] = [x - f * y for x, y in zip(work[r], pr)]
    return tuple(tuple(row[n:]) for row in work)


@dataclass(frozen=True)
class MatMulFormat:
    m: int
    n: int
    p: int

    def __post_init__(self):
        for name in ("m", "n", "p"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"format dimension {name} must be a positive integer, got {v!r}")

    def role_shape(self, role: str) -> tuple[int, int]:
        return {"U": (self.m, self.n), "V": (self.n, self.p), "W": (self.p, self.m)}[role]

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.m, self.n, self.p)

    def __str__(self):
        return f"<{self.m},{self.n},{self.p}>"


@dataclass(frozen=True)
class FactorMatrix:
    role: str
    entries: Matrix

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        object.__setattr__(self, "entries", matrix(self.entries))

    @property
    def shape(self) -> tuple[int, int]:
        return shape(self.entries)

    def vectorize(self) -> tuple[Fraction, ...]:
        return vectorize_rowwise(self.entries)


@dataclass(frozen=True)
class TriadTerm:
    u: FactorMatrix
    v: FactorMatrix
    w: FactorMatrix

    def __post_init__(self):
        if (self.u.role, self.v.role, self.w.role) != ROLES:
            raise ValueError("triad roles must be exactly U, V, W")

    @classmethod
    def of(cls, u, v, w) -> "TriadTerm":
        return cls(FactorMatrix("U", u), FactorMatrix("V", v), FactorMatrix("W", w))

    def factor(self, role: str) -> FactorMatrix:
        return {"U": self.u, "V": self.v, "W": self.w}[role]

    def key(self) -> tuple:
        return (self.u.entries, self.v.entries, self.w.entries)


@dataclass(frozen=True)
class Algorithm:
    """r triad terms u_i (x) v_i (x) w_i; also a point of V(m,n,p;r)."""

    format: MatMulFormat
    terms: tuple[TriadTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("an algorithm needs at least one term")
        for idx, t in enumerate(self.terms):
            for role in ROLES:
                if t.factor(role).shape != self.format.role_shape(role):
                    raise ShapeError(
                        f"term {idx}: {role} factor has shape {t.factor(role).shape}, "
                        f"expected {self.format.role_shape(role)} for {self.format}"
                    )

    @property
    def r(self) -> int:
        return len(self.terms)

    def factors(self, role: str) -> list[Matrix]:
        return [t.factor(role).entries for t in self.terms]

    @classmethod
    def from_factors(cls, fmt: MatMulFormat, us, vs, ws) -> "Algorithm":
        return cls(fmt, tuple(TriadTerm.of(u, v, w) for u, v, w in zip(us, vs, ws, strict=True)))


def natural_algorithm(fmt: MatMulFormat) -> Algorithm:
    """The mnp-term algorithm e_ij (x) e_jk (x) e_ki, terms in lexicographic (i, j, k) order."""
    m, n, p = fmt.as_tuple()
    terms = [
        TriadTerm.of(unit(m, n, i, j), unit(n, p, j, k), unit(p, m, k, i))
        for i in range(m)
        for j in range(n)
        for k in range(p)
    ]
    return Algorithm(fmt, tuple(terms))


# Strassen (1969): M1..M7 written as (A-combination, B-combination, C-targets).
# w holds the C-coefficients transposed, since the W slot of e_ij (x) e_jk (x) e_ki
# is e_ki.
_STRASSEN = (
    ([[1, 0], [0, 1]], [[1, 0], [0, 1]], [[1, 0], [0, 1]]),
    ([[0, 0], [1, 1]], [[1, 0], [0, 0]], [[0, 0], [1, -1]]),
    ([[1, 0], [0, 0]], [[0, 1], [0, -1]], [[0, 1], [0, 1]]),
    ([[0, 0], [0, 1]], [[-1, 0], [1, 0]], [[1, 0], [1, 0]]),
    ([[1, 1], [0, 0]], [[0, 0], [0, 1]], [[-1, 1], [0, 0]]),
    ([[-1, 0], [1, 0]], [[1, 1], [0, 0]], [[0, 0], [0, 1]]),
    ([[0, 1], [0, -1]], [[0, 0], [1, 1]], [[1, 0], [0, 0]]),
)


def builtin_strassen() -> Algorithm:
    return Algorithm(
        MatMulFormat(2, 2, 2),
        tuple(TriadTerm.of(u, v, [list(r) for r in zip(*c)]) for u, v, c in _STRASSEN),
    )
