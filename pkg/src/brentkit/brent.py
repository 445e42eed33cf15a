"""The Brent system B(m,n,p;r): index maps, exact residuals, sparse Jacobian.

Equations are indexed by (i1,i2,j1,j2,k1,k2) in lexicographic order, last
coordinate fastest. Variables are laid out as all alpha entries (term-major,
entries row-major), then all beta, then all gamma.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .exact import Algorithm, MatMulFormat, Matrix, vectorize_rowwise

# int64 is used for the factor products when max|entry|^3 * r stays below this
_INT64_SAFE = 2**62


@dataclass(frozen=True)
class BrentSystem:
    format: MatMulFormat
    r: int

    def __post_init__(self):
        if not isinstance(self.r, int) or self.r < 1:
            raise ValueError(f"r must be a positive integer, got {self.r!r}")

    @property
    def equation_count(self) -> int:
        m, n, p = self.format.as_tuple()
        return (m * n * p) ** 2

    @property
    def variable_count(self) -> int:
        m, n, p = self.format.as_tuple()
        return (m * n + n * p + p * m) * self.r

    @property
    def shape(self) -> tuple[int, int]:
        return (self.equation_count, self.variable_count)

    def equation_index(self, i1, i2, j1, j2, k1, k2) -> int:
        """0-based coordinates in, 0-based row out."""
        m, n, p = self.format.as_tuple()
        return ((((i1 * n + i2) * n + j1) * p + j2) * p + k1) * m + k2

    def equation_tuple(self, e: int) -> tuple[int, int, int, int, int, int]:
        m, n, p = self.format.as_tuple()
        e, k2 = divmod(e, m)
        e, k1 = divmod(e, p)
        e, j2 = divmod(e, p)
        e, j1 = divmod(e, n)
        i1, i2 = divmod(e, n)
        if i1 >= m:
            raise IndexError("equation index out of range")
        return (i1, i2, j1, j2, k1, k2)

    def variable_index(self, role: str, term: int, a: int, b: int) -> int:
        m, n, p = self.format.as_tuple()
        r = self.r
        if role == "U":
            return term * m * n + a * n + b
        if role == "V":
            return r * m * n + term * n * p + a * p + b
        if role == "W":
            return r * (m * n + n * p) + term * p * m + a * m + b
        raise ValueError(f"unknown role {role!r}")

    def variable_tuple(self, k: int) -> tuple[str, int, int, int]:
        m, n, p = self.format.as_tuple()
        r = self.r
        for role, (rows, cols) in (("U", (m, n)), ("V", (n, p)), ("W", (p, m))):
            block = r * rows * cols
            if k < block:
                term, rest = divmod(k, rows * cols)
                a, b = divmod(rest, cols)
                return (role, term, a, b)
            k -= block
        raise IndexError("variable index out of range")

    def rhs(self, e: int) -> int:
        i1, i2, j1, j2, k1, k2 = self.equation_tuple(e)
        return int(i2 == j1 and j2 == k1 and k2 == i1)

    def rhs_vector(self) -> np.ndarray:
        m, n, p = self.format.as_tuple()
        t = np.zeros((m, n, n, p, p, m), dtype=np.int64)
        for i in range(m):
            for j in range(n):
                for k in range(p):
                    t[i, j, j, k, k, i] = 1
        return t.reshape(-1)


def build_system(fmt: MatMulFormat, r: int) -> BrentSystem:
    return BrentSystem(fmt, r)


@dataclass(frozen=True)
class ResidualVector:
    values: tuple[Fraction, ...]

    def __len__(self):
        return len(self.values)

    def is_zero(self) -> bool:
        return not any(self.values)

    def nonzero(self) -> list[int]:
        return [i for i, v in enumerate(self.values) if v != 0]


class SparseRationalMatrix:
    """Triplet matrix: rows/cols as int arrays, values as exact Fractions.

    Triplets are kept sorted row-major with no zeros and no duplicates.
    """

    __slots__ = ("nrows", "ncols", "rows", "cols", "values")

    def __init__(self, nrows: int, ncols: int, rows, cols, values, *, canonical: bool = False):
        rows = np.asarray(rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(cols, dtype=np.int64).reshape(-1)
        values = [v if isinstance(v, Fraction) else Fraction(v) for v in values]
        if not (len(rows) == len(cols) == len(values)):
            raise ValueError("triplet arrays differ in length")
        if len(rows) and (rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols):
            raise IndexError("triplet index out of range")
        if not canonical:
            keep = np.array([v != 0 for v in values], dtype=bool)
            rows, cols = rows[keep], cols[keep]
            values = [v for v, k in zip(values, keep) if k]
            order = np.lexsort((cols, rows))
            rows, cols = rows[order], cols[order]
            values = [values[i] for i in order]
            if len(rows) > 1:
                dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
                if dup.any():
                    raise ValueError("duplicate (row, col) entries")
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.rows = rows
        self.cols = cols
        self.values = tuple(values)

    @classmethod
    def from_dense(cls, a) -> "SparseRationalMatrix":
        a = [list(row) for row in a]
        nrows = len(a)
        ncols = len(a[0]) if a else 0
        trip = [(i, j, Fraction(x)) for i, row in enumerate(a) for j, x in enumerate(row) if x != 0]
        if not trip:
            return cls(nrows, ncols, [], [], [], canonical=True)
        r, c, v = zip(*trip)
        return cls(nrows, ncols, r, c, v, canonical=True)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return len(self.values)

    def triplets(self) -> Iterator[tuple[int, int, Fraction]]:
        for r, c, v in zip(self.rows.tolist(), self.cols.tolist(), self.values):
            yield (r, c, v)

    def row_counts(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.nrows)

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for r, c, v in self.triplets():
            out[r][c] = v
        return out

    def to_float(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.float64)
        out[self.rows, self.cols] = [float(v) for v in self.values]
        return out

    def transpose(self) -> "SparseRationalMatrix":
        return SparseRationalMatrix(self.ncols, self.nrows, self.cols, self.rows, self.values)

    def select_columns(self, columns) -> "SparseRationalMatrix":
        columns = list(columns)
        where = {c: k for k, c in enumerate(columns)}
        trip = [(r, where[c], v) for r, c, v in self.triplets() if c in where]
        if not trip:
            return SparseRationalMatrix(self.nrows, len(columns), [], [], [])
        r, c, v = zip(*trip)
        return SparseRationalMatrix(self.nrows, len(columns), r, c, v)

    def __eq__(self, other):
        if not isinstance(other, SparseRationalMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and self.values == other.values
        )

    def __repr__(self):
        return f"SparseRationalMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"

    def to_matrix_market(self) -> str:
        """MatrixMarket coordinate text; 1-based indices, entries written as num/den."""
        lines = [
            "%%MatrixMarket matrix coordinate rational general",
            f"{self.nrows} {self.ncols} {self.nnz}",
        ]
        for r, c, v in self.triplets():
            lines.append(f"{r + 1} {c + 1} {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_matrix_market(cls, text: str) -> "SparseRationalMatrix":
        body = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("%")]
        nrows, ncols, nnz = (int(x) for x in body[0].split())
        trip = []
        for ln in body[1 : 1 + nnz]:
            r, c, v = ln.split()
            trip.append((int(r) - 1, int(c) - 1, Fraction(v)))
        if not trip:
            return cls(nrows, ncols, [], [], [])
        r, c, v = zip(*trip)
        return cls(nrows, ncols, r, c, v)


def _flat_factors(q: Algorithm) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays of shape (r, mn), (r, np), (r, pm); int64 when exact in int64, else object."""
    flat = [[vectorize_rowwise(m) for m in q.factors(role)] for role in ("U", "V", "W")]
    integral = all(x.denominator == 1 for block in flat for vec in block for x in vec)
    if integral:
        bound = max((abs(x.numerator) for block in flat for vec in block for x in vec), default=0)
        if bound**3 * q.r * 3 < _INT64_SAFE:
            return tuple(np.array([[x.numerator for x in vec] for vec in block], dtype=np.int64) for block in flat)
    return tuple(np.array([list(vec) for vec in block], dtype=object) for block in flat)


def _to_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(int(x))


def residual(q: Algorithm) -> ResidualVector:
    """sum_i alpha beta gamma minus the Kronecker-delta right-hand side, exactly."""
    system = build_system(q.format, q.r)
    U, V, W = _flat_factors(q)
    r = q.r
    uv = (U[:, :, None] * V[:, None, :]).reshape(r, -1)
    t = (uv.T @ W).reshape(-1)
    t = t - system.rhs_vector().astype(t.dtype)
    return ResidualVector(tuple(_to_fraction(x) for x in t))


def is_solution(q: Algorithm) -> bool:
    return residual(q).is_zero()


def jacobian(q: Algorithm) -> SparseRationalMatrix:
    """Exact Jacobian of B(m,n,p;r) at q, one column per variable."""
    system = build_system(q.format, q.r)
    m, n, p = q.format.as_tuple()
    r = q.r
    U, V, W = _flat_factors(q)
    mn, np_, pm = m * n, n * p, p * m
    a_idx, b_idx, c_idx, l_idx = np.meshgrid(
        np.arange(mn), np.arange(np_), np.arange(pm), np.arange(r), indexing="ij"
    )
    a_idx, b_idx, c_idx, l_idx = (x.reshape(-1) for x in (a_idx, b_idx, c_idx, l_idx))
    row = (a_idx * np_ + b_idx) * pm + c_idx

    rows, cols, vals = [], [], []
    # d/d alpha^{(l)}_{a} = beta^{(l)}_b gamma^{(l)}_c, and likewise for beta, gamma
    for col, val in (
        (l_idx * mn + a_idx, V[l_idx, b_idx] * W[l_idx, c_idx]),
        (r * mn + l_idx * np_ + b_idx, U[l_idx, a_idx] * W[l_idx, c_idx]),
        (r * (mn + np_) + l_idx * pm + c_idx, U[l_idx, a_idx] * V[l_idx, b_idx]),
    ):
        nz = np.array([x != 0 for x in val], dtype=bool) if val.dtype == object else val != 0
        rows.append(row[nz])
        cols.append(col[nz])
        vals.append(val[nz])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    order = np.lexsort((cols, rows))
    values = [_to_fraction(x) for x in vals[order]]
    return SparseRationalMatrix(
        system.equation_count, system.variable_count, rows[order], cols[order], values, canonical=True
    )


def residual_float(x: np.ndarray, fmt: MatMulFormat, r: int) -> np.ndarray:
    """Floating residual at a flat variable vector laid out as in BrentSystem."""
    m, n, p = fmt.as_tuple()
    mn, np_, pm = m * n, n * p, p * m
    U = x[: r * mn].reshape(r, mn)
    V = x[r * mn : r * (mn + np_)].reshape(r, np_)
    W = x[r * (mn + np_) :].reshape(r, pm)
    t = np.einsum("la,lb,lc->abc", U, V, W).reshape(-1)
    return t - build_system(fmt, r).rhs_vector()


def variable_vector(q: Algorithm) -> list[Fraction]:
    """Flat variable vector of q in BrentSystem order."""
    out = []
    for role in ("U", "V", "W"):
        for f in q.factors(role):
            out.extend(vectorize_rowwise(f))
    return out


def algorithm_from_vector(x, fmt: MatMulFormat, r: int) -> Algorithm:
    from .exact import unvectorize

    m, n, p = fmt.as_tuple()
    sizes = {"U": (m, n), "V": (n, p), "W": (p, m)}
    pos = 0
    blocks = {}
    for role in ("U", "V", "W"):
        rows, cols = sizes[role]
        mats: list[Matrix] = []
        for _ in range(r):
            mats.append(unvectorize(x[pos : pos + rows * cols], rows, cols))
            pos += rows * cols
        blocks[role] = mats
    return Algorithm.from_factors(fmt, blocks["U"], blocks["V"], blocks["W"])
