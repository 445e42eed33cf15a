"""Basis matrices of factor families, Kronecker factorization, the D and
weak-D property checks, and local-dimension bound reports.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import exact as ex
from .exact import Algorithm, Matrix
from .rank import RankResult, column_basis, rank_exact, vector_rank


class DeficientSpan(ValueError):
    pass


PROVEN_YES = "proven_yes"
PROVEN_NO = "proven_no_for_canonical_basis"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class BasisMatrix:
    role: str
    matrix: Matrix
    source_terms: tuple[int, ...]


def _columns_to_matrix(cols: list[tuple]) -> Matrix:
    return tuple(zip(*cols)) if cols else ()


def basis_matrix(q: Algorithm, role: str) -> BasisMatrix:
    """Columns are R(factor) for the greedy-leftmost independent factors."""
    rows, cols = q.format.role_shape(role)
    vecs = [ex.vectorize_rowwise(f) for f in q.factors(role)]
    picked = column_basis(_columns_to_matrix(vecs))
    if len(picked) < rows * cols:
        raise DeficientSpan(
            f"{role} factors span only {len(picked)} of {rows * cols} dimensions; not a solution"
        )
    return BasisMatrix(role, _columns_to_matrix([vecs[i] for i in picked]), tuple(picked))


def rearrange(a: Matrix, m: int, n: int) -> Matrix:
    """m^2 x n^2 array whose row i*m+j is the row-wise vectorized (i, j) block of size n."""
    return tuple(
        tuple(a[i * n + k][j * n + l] for k in range(n) for l in range(n))
        for i in range(m)
        for j in range(m)
    )


def kron_factorize(a: Matrix, m: int, n: int) -> Optional[tuple[Matrix, Matrix]]:
    """(A, B) with A (x) B == a exactly, or None.

    B is the first nonzero n x n block itself, so A carries a 1 at that block.
    """
    if ex.shape(a) != (m * n, m * n):
        raise ex.ShapeError(f"expected a {m * n}x{m * n} matrix, got {ex.shape(a)}")
    blocks = rearrange(a, m, n)
    first = next((k for k, blk in enumerate(blocks) if any(blk)), None)
    if first is None:
        return None
    ref = blocks[first]
    pos = next(k for k, x in enumerate(ref) if x != 0)
    b = ex.unvectorize(ref, n, n)
    coeffs = [blk[pos] / ref[pos] for blk in blocks]
    # rank one iff every block is its coefficient times the reference block
    for c, blk in zip(coeffs, blocks):
        if any(x != c * y for x, y in zip(blk, ref)):
            return None
    return ex.unvectorize(coeffs, m, m), b


def unit_basis_containment(q: Algorithm, role: str, mode: str = "literal") -> bool:
    return _unit_scalars(q, role, mode) is not None


def _unit_scalars(q: Algorithm, role: str, mode: str) -> Optional[dict]:
    """For each (i, j), the first lam with lam e_ij among the factors (lam == 1 in literal mode)."""
    if mode not in ("literal", "up_to_scalar"):
        raise ValueError(f"unknown containment mode {mode!r}")
    rows, cols = q.format.role_shape(role)
    found: dict[tuple[int, int], Fraction] = {}
    for f in q.factors(role):
        nz = [(i, j, x) for i, row in enumerate(f) for j, x in enumerate(row) if x != 0]
        if len(nz) != 1:
            continue
        i, j, x = nz[0]
        if mode == "literal" and x != 1:
            continue
        found.setdefault((i, j), x)
    if len(found) < rows * cols:
        return None
    return found


@dataclass(frozen=True)
class DPropertyVerdict:
    status: str
    witness: Optional[tuple[Matrix, Matrix]] = None
    step: str = ""
    orderings_tried: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        out = {"status": self.status, "step": self.step, "orderings_tried": list(self.orderings_tried)}
        if self.witness is not None:
            out["witness"] = {
                "a": [[str(x) for x in row] for row in self.witness[0]],
                "b": [[str(x) for x in row] for row in self.witness[1]],
            }
        return out


def verify_witness(q: Algorithm, role: str, a: Matrix, b: Matrix) -> bool:
    """Check {e_ij} is contained in {a f_i b^-1} for the role's factors, exactly."""
    try:
        binv = ex.invert_exact(b)
        ex.invert_exact(a)
    except ex.SingularMatrix:
        return False
    rows, cols = q.format.role_shape(role)
    images = {ex.matmul(ex.matmul(a, f), binv) for f in q.factors(role)}
    return all(ex.unit(rows, cols, i, j) in images for i in range(rows) for j in range(cols))


def _signature_orderings(vecs: list[tuple], rows: int, cols: int) -> dict[str, list[int]]:
    def support(k):
        return [(i, j) for i in range(rows) for j in range(cols) if vecs[k][i * cols + j] != 0]

    def row_sig(k):
        return tuple(sorted({i for i, _ in support(k)}))

    def col_sig(k):
        return tuple(sorted({j for _, j in support(k)}))

    def first_pos(k):
        s = support(k)
        return s[0] if s else (rows, cols)

    idx = range(len(vecs))
    return {
        "row_then_column_signature": sorted(idx, key=lambda k: (row_sig(k), col_sig(k))),
        "column_then_row_signature": sorted(idx, key=lambda k: (col_sig(k), row_sig(k))),
        "first_support_position": sorted(idx, key=first_pos),
        "first_support_column_major": sorted(idx, key=lambda k: first_pos(k)[::-1]),
    }


def d_property_check(q: Algorithm, role: str) -> DPropertyVerdict:
    """Sound three-state decision of the D-property for one factor family.

    proven_yes always carries a verified witness (a, b). A negative answer
    only covers the greedy basis under the orderings listed in the verdict.
    """
    rows, cols = q.format.role_shape(role)
    basis = basis_matrix(q, role)

    scalars = _unit_scalars(q, role, "up_to_scalar")
    if scalars is not None:
        # a = diag(x), b = diag(y) maps lam e_ij to e_ij iff lam x_i = y_j
        x = [1 / scalars[(i, 0)] for i in range(rows)]
        y = [scalars[(0, j)] * x[0] for j in range(cols)]
        a, b = ex.diag(x), ex.diag(y)
        if verify_witness(q, role, a, b):
            return DPropertyVerdict(PROVEN_YES, (a, b), "unit_basis_containment")

    vecs = list(zip(*basis.matrix))
    orderings = {"greedy": list(range(rows * cols))}
    orderings.update(_signature_orderings(vecs, rows, cols))
    tried = []
    seen = set()
    for name, order in orderings.items():
        if tuple(order) in seen:
            continue
        seen.add(tuple(order))
        tried.append(name)
        mat = _columns_to_matrix([vecs[k] for k in order])
        fac = kron_factorize(mat, rows, cols)
        if fac is None:
            continue
        um, un = fac
        a, b = ex.invert_exact(um), ex.transpose(un)
        if verify_witness(q, role, a, b):
            return DPropertyVerdict(PROVEN_YES, (a, b), f"kron_factorize:{name}", tuple(tried))
        return DPropertyVerdict(UNKNOWN, None, f"kron_factorize:{name}", tuple(tried))
    return DPropertyVerdict(PROVEN_NO, None, "kron_factorize", tuple(tried))


def algorithm_d_property(verdicts: dict[str, DPropertyVerdict]) -> str:
    """D-property of the algorithm needs two of the three families."""
    yes = sum(v.status == PROVEN_YES for v in verdicts.values())
    return PROVEN_YES if yes >= 2 else UNKNOWN


def weak_d_check(q: Algorithm, role: str) -> bool:
    """Block-diagonal basis exists iff the factors supported on row 1 span row 1
    and the factors vanishing on row 1 span the remaining rows."""
    rows, cols = q.format.role_shape(role)
    first_row, rest = [], []
    for f in q.factors(role):
        vec = ex.vectorize_rowwise(f)
        head_nz = any(vec[:cols])
        tail_nz = any(vec[cols:])
        if head_nz and not tail_nz:
            first_row.append(vec[:cols])
        elif not head_nz:
            rest.append(vec[cols:])
    if vector_rank(first_row) != cols:
        return False
    if rows == 1:
        return True
    return vector_rank(rest) == rows * cols - cols


def algorithm_weak_d(q: Algorithm) -> bool:
    return all(weak_d_check(q, role) for role in ex.ROLES)


@dataclass(frozen=True)
class BoundReport:
    format: tuple[int, int, int]
    r: int
    k: int
    rank: int
    rank_method: str
    u: int
    l: int
    l_prime: int
    l_dprime: int
    g: int
    g_prime: int
    g_dprime: int
    d_property: dict
    d_property_algorithm: str
    weak_d: dict
    weak_d_algorithm: bool

    @property
    def l_valid(self) -> bool:
        return self.d_property_algorithm == PROVEN_YES or self.weak_d_algorithm

    @property
    def anomaly(self) -> bool:
        """u below the finite-stabilizer lower bound; flagged for manual review."""
        return self.u < self.l_dprime

    def to_json(self) -> dict:
        return {
            "format": list(self.format),
            "r": self.r,
            "k": self.k,
            "rank": self.rank,
            "rank_method": self.rank_method,
            "u": self.u,
            "l": self.l,
            "l_valid": self.l_valid,
            "l_prime": self.l_prime,
            "l_dprime": self.l_dprime,
            "l_dprime_conditional": True,
            "g": self.g,
            "g_prime": self.g_prime,
            "g_dprime": self.g_dprime,
            "anomaly_u_below_l_dprime": self.anomaly,
            "precondition_flags": {
                "d_property": self.d_property,
                "d_property_algorithm": self.d_property_algorithm,
                "weak_d": self.weak_d,
                "weak_d_algorithm": self.weak_d_algorithm,
            },
        }


def lower_bounds(m: int, n: int, p: int, r: int) -> tuple[int, int, int]:
    base = m * m + n * n + p * p
    l = base - m - n - p - 3
    return l, l + 2 * r, base + 2 * r - 3


def role_verdicts(q: Algorithm) -> dict[str, DPropertyVerdict]:
    out = {}
    for role in ex.ROLES:
        try:
            out[role] = d_property_check(q, role)
        except DeficientSpan:
            out[role] = DPropertyVerdict(UNKNOWN, None, "deficient_span")
    return out


def bound_report(q: Algorithm, rank: RankResult, verdicts: dict[str, DPropertyVerdict] | None = None) -> BoundReport:
    m, n, p = q.format.as_tuple()
    k = (m * n + n * p + p * m) * q.r
    u = k - rank.rank
    l, l1, l2 = lower_bounds(m, n, p, q.r)
    verdicts = verdicts if verdicts is not None else role_verdicts(q)
    weak = {role: weak_d_check(q, role) for role in ex.ROLES}
    return BoundReport(
        format=(m, n, p),
        r=q.r,
        k=k,
        rank=rank.rank,
        rank_method=rank.method,
        u=u,
        l=l,
        l_prime=l1,
        l_dprime=l2,
        g=u - l,
        g_prime=u - l1,
        g_dprime=u - l2,
        d_property={role: v.to_json() for role, v in verdicts.items()},
        d_property_algorithm=algorithm_d_property(verdicts),
        weak_d=weak,
        weak_d_algorithm=all(weak.values()),
    )


def rearrangement_rank(a: Matrix, m: int, n: int) -> int:
    return rank_exact(rearrange(a, m, n)).rank
