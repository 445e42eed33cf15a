"""Isotropy-group elements acting on algorithms.

Four variants: sandwiching T(a,b,c), per-term rescaling, term permutation,
and the triad symmetries (cyclic and transpose) that may change the format.
"""
from __future__ import annotations

import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from . import exact as ex
from .brent import is_solution, jacobian
from .exact import Algorithm, MatMulFormat, Matrix, TriadTerm
from .rank import compute_rank


class DimensionMismatch(ValueError):
    pass


class VariantMismatch(TypeError):
    pass


class NotASolution(ValueError):
    pass


@dataclass(frozen=True)
class Sandwich:
    a: Matrix
    b: Matrix
    c: Matrix
    _inv: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        mats = tuple(ex.matrix(x) for x in (self.a, self.b, self.c))
        for name, x in zip("abc", mats):
            if ex.shape(x)[0] != ex.shape(x)[1]:
                raise DimensionMismatch(f"sandwich matrix {name} is not square")
        inv = tuple(ex.invert_exact(x) for x in mats)
        object.__setattr__(self, "a", mats[0])
        object.__setattr__(self, "b", mats[1])
        object.__setattr__(self, "c", mats[2])
        object.__setattr__(self, "_inv", inv)

    def dims(self) -> tuple[int, int, int]:
        return (len(self.a), len(self.b), len(self.c))


@dataclass(frozen=True)
class TermScale:
    """u_i -> lam_i u_i, v_i -> mu_i v_i, w_i -> (lam_i mu_i)^-1 w_i."""

    pairs: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        pairs = tuple((ex.as_rational(l), ex.as_rational(m)) for l, m in self.pairs)
        if any(l == 0 or m == 0 for l, m in pairs):
            raise ValueError("term scalars must be nonzero")
        object.__setattr__(self, "pairs", pairs)


@dataclass(frozen=True)
class TermPermutation:
    """Result term i is input term sigma[i]."""

    sigma: tuple[int, ...]

    def __post_init__(self):
        sigma = tuple(int(x) for x in self.sigma)
        if sorted(sigma) != list(range(len(sigma))):
            raise ValueError(f"{sigma} is not a permutation of 0..{len(sigma) - 1}")
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class TriadSymmetry:
    """A word in the triad maps, applied right to left.

    cyclic:    (u, v, w) -> (v, w, u),       <m,n,p> -> <n,p,m>
    transpose: (u, v, w) -> (v^T, u^T, w^T), <m,n,p> -> <p,n,m>
    """

    kinds: tuple[str, ...]

    def __post_init__(self):
        kinds = (self.kinds,) if isinstance(self.kinds, str) else tuple(self.kinds)
        for k in kinds:
            if k not in ("cyclic", "transpose"):
                raise ValueError(f"unknown triad symmetry {k!r}")
        object.__setattr__(self, "kinds", kinds)


GroupElement = Union[Sandwich, TermScale, TermPermutation, TriadSymmetry]


def _apply_triad(kind: str, q: Algorithm) -> Algorithm:
    m, n, p = q.format.as_tuple()
    if kind == "cyclic":
        fmt = MatMulFormat(n, p, m)
        terms = [TriadTerm.of(t.v.entries, t.w.entries, t.u.entries) for t in q.terms]
    else:
        fmt = MatMulFormat(p, n, m)
        terms = [
            TriadTerm.of(ex.transpose(t.v.entries), ex.transpose(t.u.entries), ex.transpose(t.w.entries))
            for t in q.terms
        ]
    return Algorithm(fmt, tuple(terms))


def apply_element(g: GroupElement, q: Algorithm) -> Algorithm:
    if isinstance(g, Sandwich):
        if g.dims() != q.format.as_tuple():
            raise DimensionMismatch(f"sandwich of size {g.dims()} cannot act on {q.format}")
        ai, bi, ci = g._inv
        mm = ex.matmul
        terms = [
            TriadTerm.of(
                mm(mm(g.a, t.u.entries), bi),
                mm(mm(g.b, t.v.entries), ci),
                mm(mm(g.c, t.w.entries), ai),
            )
            for t in q.terms
        ]
        return Algorithm(q.format, tuple(terms))
    if isinstance(g, TermScale):
        if len(g.pairs) != q.r:
            raise DimensionMismatch(f"{len(g.pairs)} scalar pairs for {q.r} terms")
        terms = [
            TriadTerm.of(ex.scale(t.u.entries, l), ex.scale(t.v.entries, mu), ex.scale(t.w.entries, 1 / (l * mu)))
            for t, (l, mu) in zip(q.terms, g.pairs)
        ]
        return Algorithm(q.format, tuple(terms))
    if isinstance(g, TermPermutation):
        if len(g.sigma) != q.r:
            raise DimensionMismatch(f"permutation of {len(g.sigma)} cannot act on {q.r} terms")
        return Algorithm(q.format, tuple(q.terms[s] for s in g.sigma))
    if isinstance(g, TriadSymmetry):
        for kind in reversed(g.kinds):
            q = _apply_triad(kind, q)
        return q
    raise TypeError(f"not a group element: {g!r}")


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """The element acting as g after h."""
    if type(g) is not type(h):
        raise VariantMismatch(f"cannot compose {type(g).__name__} with {type(h).__name__}")
    if isinstance(g, Sandwich):
        if g.dims() != h.dims():
            raise DimensionMismatch("sandwich sizes differ")
        return Sandwich(ex.matmul(g.a, h.a), ex.matmul(g.b, h.b), ex.matmul(g.c, h.c))
    if isinstance(g, TermScale):
        if len(g.pairs) != len(h.pairs):
            raise DimensionMismatch("scale lengths differ")
        return TermScale(tuple((l1 * l2, m1 * m2) for (l1, m1), (l2, m2) in zip(g.pairs, h.pairs)))
    if isinstance(g, TermPermutation):
        if len(g.sigma) != len(h.sigma):
            raise DimensionMismatch("permutation lengths differ")
        return TermPermutation(tuple(h.sigma[i] for i in g.sigma))
    return TriadSymmetry(g.kinds + h.kinds)


def invert(g: GroupElement) -> GroupElement:
    if isinstance(g, Sandwich):
        return Sandwich(*g._inv)
    if isinstance(g, TermScale):
        return TermScale(tuple((1 / l, 1 / m) for l, m in g.pairs))
    if isinstance(g, TermPermutation):
        inv = [0] * len(g.sigma)
        for i, s in enumerate(g.sigma):
            inv[s] = i
        return TermPermutation(tuple(inv))
    if isinstance(g, TriadSymmetry):
        word: list[str] = []
        for kind in reversed(g.kinds):
            word.extend(["cyclic", "cyclic"] if kind == "cyclic" else ["transpose"])
        return TriadSymmetry(tuple(word))
    raise TypeError(f"not a group element: {g!r}")


def _tensor_key(t: TriadTerm) -> tuple:
    """Representation of u (x) v (x) w that ignores the (lam, mu, 1/(lam mu)) rescaling."""
    u, v, w = (ex.vectorize_rowwise(t.factor(r).entries) for r in ex.ROLES)
    if not any(u) or not any(v) or not any(w):
        return ("zero",)
    su = next(x for x in u if x != 0)
    sv = next(x for x in v if x != 0)
    return (
        tuple(x / su for x in u),
        tuple(x / sv for x in v),
        tuple(x * su * sv for x in w),
    )


def same_algorithm(q1: Algorithm, q2: Algorithm, mode: str = "raw") -> bool:
    """Multiset equality of terms; mode raw compares matrices, tensor compares u(x)v(x)w."""
    if q1.format != q2.format or q1.r != q2.r:
        return False
    if mode == "raw":
        return Counter(t.key() for t in q1.terms) == Counter(t.key() for t in q2.terms)
    if mode == "tensor":
        return Counter(map(_tensor_key, q1.terms)) == Counter(map(_tensor_key, q2.terms))
    raise ValueError(f"unknown comparison mode {mode!r}")


def fixes_algorithm(g: GroupElement, q: Algorithm, mode: str = "raw") -> bool:
    return same_algorithm(apply_element(g, q), q, mode)


def is_generalized_permutation(a: Matrix) -> bool:
    rows, cols = ex.shape(a)
    if rows != cols:
        return False
    return all(sum(1 for x in line if x != 0) == 1 for line in (*a, *zip(*a)))


# -- random elements ---------------------------------------------------------


def random_invertible(n: int, rng: random.Random, lo: int = -3, hi: int = 3) -> Matrix:
    while True:
        a = ex.matrix([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])
        try:
            ex.invert_exact(a)
        except ex.SingularMatrix:
            continue
        return a


def random_generalized_permutation(n: int, rng: random.Random) -> Matrix:
    perm = list(range(n))
    rng.shuffle(perm)
    vals = [rng.choice([-3, -2, -1, 1, 2, 3]) * Fraction(1, rng.randint(1, 3)) for _ in range(n)]
    return tuple(
        tuple(vals[i] if perm[i] == j else Fraction(0) for j in range(n)) for i in range(n)
    )


def _nonzero_scalar(rng: random.Random) -> Fraction:
    return Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))


def random_element(kind: str, q: Algorithm, rng: random.Random) -> GroupElement:
    m, n, p = q.format.as_tuple()
    if kind == "sandwich":
        return Sandwich(random_invertible(m, rng), random_invertible(n, rng), random_invertible(p, rng))
    if kind == "scale":
        return TermScale(tuple((_nonzero_scalar(rng), _nonzero_scalar(rng)) for _ in range(q.r)))
    if kind == "permute":
        sigma = list(range(q.r))
        rng.shuffle(sigma)
        return TermPermutation(tuple(sigma))
    if kind in ("cyclic", "transpose"):
        return TriadSymmetry((kind,))
    raise ValueError(f"unknown action {kind!r}")


def describe(g: GroupElement) -> dict:
    """JSON form: variant tag plus rationals as strings."""

    def mat(x):
        return [[str(v) for v in row] for row in x]

    if isinstance(g, Sandwich):
        return {"variant": "sandwich", "a": mat(g.a), "b": mat(g.b), "c": mat(g.c)}
    if isinstance(g, TermScale):
        return {"variant": "scale", "pairs": [[str(l), str(m)] for l, m in g.pairs]}
    if isinstance(g, TermPermutation):
        return {"variant": "permute", "sigma": list(g.sigma)}
    return {"variant": "triad", "kinds": list(g.kinds)}


def element_from_json(d: dict) -> GroupElement:
    variant = d["variant"]
    if variant == "sandwich":
        return Sandwich(*(ex.matrix([[Fraction(x) for x in row] for row in d[k]]) for k in "abc"))
    if variant == "scale":
        return TermScale(tuple((Fraction(l), Fraction(m)) for l, m in d["pairs"]))
    if variant == "permute":
        return TermPermutation(tuple(d["sigma"]))
    if variant == "triad":
        return TriadSymmetry(tuple(d["kinds"]))
    raise ValueError(f"unknown group element variant {variant!r}")


# -- orbit experiment ----------------------------------------------------------


@dataclass(frozen=True)
class OrbitExperimentReport:
    base_rank: int
    samples: tuple[tuple[dict, int], ...]
    all_equal: bool

    def to_json(self) -> dict:
        return {
            "base_rank": self.base_rank,
            "samples": [{"element": g, "rank": r} for g, r in self.samples],
            "all_equal": self.all_equal,
        }


def orbit_rank_experiment(
    q: Algorithm, samples: int, seed: int = 0, method: str = "exact", jobs: int = 1, primes: int = 3
) -> OrbitExperimentReport:
    """Jacobian rank at q versus at random sandwich images of q.

    Reports only; equality of ranks along an orbit is not assumed.
    """
    if not is_solution(q):
        raise NotASolution("orbit experiment needs a solution of the Brent equations")
    base = compute_rank(jacobian(q), method, primes=primes, seed=seed).rank
    rng = random.Random(seed)
    elements = [random_element("sandwich", q, rng) for _ in range(samples)]

    def one(g):
        return compute_rank(jacobian(apply_element(g, q)), method, primes=primes, seed=seed).rank

    if jobs > 1 and samples > 1:
        with ThreadPoolExecutor(jobs) as pool:
            ranks = list(pool.map(one, elements))
    else:
        ranks = [one(g) for g in elements]
    results = tuple((describe(g), r) for g, r in zip(elements, ranks))
    return OrbitExperimentReport(base, results, all(r == base for r in ranks))
