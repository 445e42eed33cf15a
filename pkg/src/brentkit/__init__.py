"""Verification and analysis of solutions of the Brent equations."""
from .brent import BrentSystem, SparseRationalMatrix, build_system, is_solution, jacobian, residual
from .exact import (
    Algorithm,
    FactorMatrix,
    MatMulFormat,
    SingularMatrix,
    TriadTerm,
    builtin_strassen,
    invert_exact,
    kron_product,
    natural_algorithm,
    unvectorize,
    vectorize_rowwise,
)
from .rank import RankResult, TolerancePolicy, column_basis, rank_exact, rank_modular, rank_numeric

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "BrentSystem",
    "FactorMatrix",
    "MatMulFormat",
    "RankResult",
    "SingularMatrix",
    "SparseRationalMatrix",
    "TolerancePolicy",
    "TriadTerm",
    "build_system",
    "builtin_strassen",
    "column_basis",
    "invert_exact",
    "is_solution",
    "jacobian",
    "kron_product",
    "natural_algorithm",
    "rank_exact",
    "rank_modular",
    "rank_numeric",
    "residual",
    "unvectorize",
    "vectorize_rowwise",
]
