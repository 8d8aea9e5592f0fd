"""Exact local complexity measures for ReLU networks."""

__version__ = "0.1.0"

from .fundim import (
    RankConfig,
    RankProfile,
    batch_functional_dimension,
    estimate_functional_dimension,
    grow_full_batch,
    rank_profile,
    real_rank_stability_check,
)
from .linalg import RankBudgetError, r_R_rank, r_RR_rank, rank_rational
from .network import Architecture, NonSmoothPointError, Parameter, TernaryPattern, forward, ternary_label
from .paths import (
    activation_matrix,
    algebraic_evaluation,
    algebraic_jacobian,
    enumerate_complete_paths,
    path_count,
)
from .poly import PolyMatrix, SparsePoly, parse_poly

__all__ = [
    "Architecture",
    "NonSmoothPointError",
    "Parameter",
    "PolyMatrix",
    "RankBudgetError",
    "RankConfig",
    "RankProfile",
    "SparsePoly",
    "TernaryPattern",
    "activation_matrix",
    "algebraic_evaluation",
    "algebraic_jacobian",
    "batch_functional_dimension",
    "enumerate_complete_paths",
    "estimate_functional_dimension",
    "forward",
    "grow_full_batch",
    "parse_poly",
    "path_count",
    "r_RR_rank",
    "r_R_rank",
    "rank_profile",
    "rank_rational",
    "real_rank_stability_check",
    "ternary_label",
]
