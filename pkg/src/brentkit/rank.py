"""Matrix rank three ways: exact fraction-free elimination, multi-prime
modular elimination, and floating SVD with an auditable tolerance.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Sequence

import numpy as np
from sympy import nextprime

from .brent import SparseRationalMatrix

# rank_modular draws primes from [2^21, 2^22): block * p^2 stays below 2^52, so
# float64 matrix products over residues are exact
_PRIME_LO = 2**21
_PRIME_HI = 2**22
_BLOCK = 256


class DenominatorClash(ArithmeticError):
    pass


@dataclass(frozen=True)
class RankResult:
    rank: int
    method: str  # exact | modular | numeric
    certificate: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {"rank": self.rank, "method": self.method, "certificate": self.certificate}


@dataclass(frozen=True)
class TolerancePolicy:
    mode: str = "auto"
    fixed_value: float = 0.0

    def __post_init__(self):
        if self.mode not in ("auto", "fixed"):
            raise ValueError(f"tolerance mode must be auto or fixed, got {self.mode!r}")
        if self.fixed_value < 0:
            raise ValueError("fixed tolerance must be nonnegative")

    def tolerance(self, sigma_max: float, shape: tuple[int, int]) -> float:
        if self.mode == "fixed":
            return self.fixed_value
        return sigma_max * max(shape) * np.finfo(np.float64).eps

    @classmethod
    def parse(cls, text: str) -> "TolerancePolicy":
        if text == "auto":
            return cls()
        return cls("fixed", float(text))


def as_sparse(a) -> SparseRationalMatrix:
    if isinstance(a, SparseRationalMatrix):
        return a
    return SparseRationalMatrix.from_dense(a)


def _integer_rows(a: SparseRationalMatrix) -> list[list[int]]:
    """Dense integer rows, each row scaled by the lcm of its denominators."""
    rows: list[list[Fraction]] = [[] for _ in range(a.nrows)]
    cols: list[list[int]] = [[] for _ in range(a.nrows)]
    for r, c, v in a.triplets():
        rows[r].append(v)
        cols[r].append(c)
    out = []
    for vals, cs in zip(rows, cols):
        dense = [0] * a.ncols
        if vals:
            d = lcm(*(v.denominator for v in vals))
            for c, v in zip(cs, vals):
                dense[c] = v.numerator * (d // v.denominator)
        out.append(dense)
    return out


def _bareiss_pivots(m: list[list[int]], ncols: int) -> list[int]:
    """Fraction-free echelon reduction in place; returns pivot columns.

    Column skipping keeps the Bareiss divisions exact: every updated entry is
    a minor on the pivot columns found so far plus its own column.
    """
    m = [row for row in m if any(row)]
    nrows = len(m)
    prev = 1
    k = 0
    pivots = []
    for c in range(ncols):
        if k == nrows:
            break
        piv = next((i for i in range(k, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[k], m[piv] = m[piv], m[k]
        pk = m[k]
        akk = pk[c]
        for i in range(k + 1, nrows):
            ri = m[i]
            aic = ri[c]
            if aic == 0:
                if akk != prev:
                    m[i] = ri[:c] + [akk * x // prev for x in ri[c:]]
                continue
            m[i] = ri[:c] + [0] + [(akk * x - aic * y) // prev for x, y in zip(ri[c + 1 :], pk[c + 1 :])]
        prev = akk
        pivots.append(c)
        k += 1
    return pivots


def rank_exact(a) -> RankResult:
    a = as_sparse(a)
    pivots = _bareiss_pivots(_integer_rows(a), a.ncols)
    return RankResult(len(pivots), "exact", {"pivot_columns": pivots})


def column_basis(a) -> list[int]:
    """Greedy leftmost maximal independent column subset (0-based indices)."""
    return list(rank_exact(a).certificate["pivot_columns"])


def _rank_mod_p(a: SparseRationalMatrix, p: int) -> int:
    dense = np.zeros(a.shape, dtype=np.int64)
    if a.nnz:
        vals = [v.numerator % p * pow(v.denominator, -1, p) % p for v in a.values]
        dense[a.rows, a.cols] = vals
    return rank_mod_p_dense(dense, p)


def _reduce(x: np.ndarray, p: int, pinv: float) -> np.ndarray:
    """x mod p for float arrays of integers with |x| < 2^52, in place."""
    q = np.floor(x * pinv)
    x -= q * p
    # the quotient estimate can be off by one either way
    x[x < 0] += p
    x[x >= p] -= p
    return x


def _panel_eliminate(panel: np.ndarray, p: int):
    """Echelon-reduce a float panel of residues in place.

    Returns (row permutation, multipliers L, pivot offsets) with the permuted
    original panel equal to L @ panel[:t] mod p.
    """
    nrows, width = panel.shape
    pinv = 1.0 / p
    perm = np.arange(nrows)
    lower = np.zeros((nrows, min(nrows, width)), dtype=np.float64)
    t = 0
    offsets = []
    for j in range(width):
        if t == nrows:
            break
        nz = np.flatnonzero(panel[t:, j])
        if nz.size == 0:
            continue
        piv = t + int(nz[0])
        if piv != t:
            panel[[t, piv]] = panel[[piv, t]]
            lower[[t, piv]] = lower[[piv, t]]
            perm[[t, piv]] = perm[[piv, t]]
        inv = pow(int(panel[t, j]), -1, p)
        below = t + 1 + np.flatnonzero(panel[t + 1 :, j])
        if below.size:
            f = _reduce(panel[below, j] * inv, p, pinv)
            lower[below, t] = f
            rows = panel[below, j:] - f[:, None] * panel[t, j:]
            panel[below, j:] = _reduce(rows, p, pinv)
        lower[t, t] = 1.0
        offsets.append(j)
        t += 1
    return perm, lower[:, :t], offsets


def rank_mod_p_dense(m: np.ndarray, p: int, block: int = _BLOCK) -> int:
    """Rank of an integer matrix of residues mod p, for p < 2^22.

    Blocked right-looking elimination; trailing updates are float64 matrix
    products, exact because block * p^2 < 2^52.
    """
    if block * (p - 1) ** 2 >= 2**52:
        raise ValueError(f"prime {p} too large for exact float64 blocks of {block}")
    pinv = 1.0 / p
    m = m[np.any(m != 0, axis=1)]
    if m.shape[0] > m.shape[1]:
        m = m.T
    a = np.mod(np.asarray(m, dtype=np.float64), p)
    nrows, ncols = a.shape
    k = 0
    for c0 in range(0, ncols, block):
        if k == nrows:
            break
        c1 = min(c0 + block, ncols)
        panel = a[k:, c0:c1].copy()
        perm, lower, offsets = _panel_eliminate(panel, p)
        t = len(offsets)
        if t == 0:
            continue
        # rows k.. are already zero left of c0
        a[k:, c0:] = a[k:, c0:][perm]
        a[k:, c0:c1] = panel
        if c1 < ncols:
            trail = a[k:, c1:]
            # pivot rows: forward substitution with the unit lower triangle
            for s in range(1, t):
                trail[s] -= lower[s, :s] @ trail[:s]
                _reduce(trail[s], p, pinv)
            if nrows - k > t:
                trail[t:] -= lower[t:] @ trail[:t]
                _reduce(trail[t:], p, pinv)
        k += t
    return k


def _sample_primes(count: int, rng: random.Random, excluded: set[int]) -> list[int]:
    primes: list[int] = []
    attempts = 0
    while len(primes) < count:
        attempts += 1
        if attempts > 100 * count:
            raise DenominatorClash("could not find primes avoiding every denominator")
        cand = nextprime(rng.randrange(_PRIME_LO, _PRIME_HI - 1000))
        if cand in primes or cand >= _PRIME_HI:
            continue
        if any(d % cand == 0 for d in excluded):
            continue
        primes.append(int(cand))
    return primes


def rank_modular(a, prime_count: int = 3, seed: int = 0, jobs: int = 1) -> RankResult:
    """Max over sampled word-size primes of rank mod p; a lower bound on the rank over Q."""
    if prime_count < 1:
        raise ValueError("prime_count must be at least 1")
    a = as_sparse(a)
    dens = {v.denominator for v in a.values if v.denominator != 1}
    rng = random.Random(seed)
    primes = _sample_primes(prime_count, rng, dens)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            ranks = list(pool.map(lambda p: _rank_mod_p(a, p), primes))
    else:
        ranks = [_rank_mod_p(a, p) for p in primes]
    return RankResult(max(ranks), "modular", {"primes": primes, "ranks": ranks, "seed": seed})


def rank_numeric(a, tol: TolerancePolicy | None = None) -> RankResult:
    tol = tol or TolerancePolicy()
    a = as_sparse(a)
    dense = a.to_float()
    if min(dense.shape) == 0:
        s = np.zeros(0)
    else:
        s = np.linalg.svd(dense, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    threshold = tol.tolerance(smax, a.shape)
    rank = int(np.sum(s > threshold))
    if 0 < rank < s.size:
        gap = float(s[rank - 1] / s[rank]) if s[rank] > 0 else float("inf")
    else:
        gap = float("inf")
    return RankResult(
        rank,
        "numeric",
        {"spectrum": s.tolist(), "tolerance": threshold, "mode": tol.mode, "gap_ratio": gap},
    )


def compute_rank(a, method: str = "modular", *, primes: int = 3, seed: int = 0, tol: TolerancePolicy | None = None) -> RankResult:
    if method == "exact":
        return rank_exact(a)
    if method == "modular":
        return rank_modular(a, primes, seed)
    if method == "numeric":
        return rank_numeric(a, tol)
    raise ValueError(f"unknown rank method {method!r}")


def vector_rank(vectors: Sequence[Sequence]) -> int:
    """Exact rank of a family of vectors (treated as columns)."""
    vectors = list(vectors)
    if not vectors:
        return 0
    cols = [list(v) for v in vectors]
    a = [[cols[j][i] for j in range(len(cols))] for i in range(len(cols[0]))]
    return rank_exact(a).rank
