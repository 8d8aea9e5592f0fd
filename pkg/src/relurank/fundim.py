"""Batch functional dimension, rank profiles and greedy full-batch growth."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import (
    DEFAULT_BOUND,
    DEFAULT_MINOR_BUDGET,
    DEFAULT_TRIALS,
    IncrementalRowBasis,
    r_R_rank,
    r_RR_rank,
    rank_rational,
)
from .network import NonSmoothPointError, Parameter, exact_gradient, is_parametrically_smooth, ternary_label
from .paths import activation_matrix, algebraic_jacobian, enumerate_complete_paths, path_count

__all__ = [
    "RankConfig",
    "RankProfile",
    "GreedyBatch",
    "numeric_jacobian",
    "batch_functional_dimension",
    "rank_profile",
    "grow_full_batch",
    "estimate_functional_dimension",
    "real_rank_stability_check",
]


@dataclass(frozen=True)
class RankConfig:
    mode: str = "randomized"
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    bound: int = DEFAULT_BOUND
    budget: int = DEFAULT_MINOR_BUDGET

    def r_R(self, M) -> int:
        return r_R_rank(M, self.mode, self.trials, self.seed, self.bound, self.budget)


@dataclass(frozen=True)
class RankProfile:
    dim_ba_fun: int
    r_R: int
    r_RR: int
    rank_alpha: int
    m: int
    D: int
    n_paths: int

    @property
    def chain_ok(self) -> bool:
        return (
            self.dim_ba_fun <= self.r_R <= self.r_RR <= self.rank_alpha
            and self.r_RR <= min(self.m, self.D)
            and self.rank_alpha <= min(self.m, self.n_paths)
        )

    @property
    def rank_gap(self) -> int:
        return self.r_RR - self.r_R

    def to_json(self) -> dict:
        out = asdict(self)
        out["chain_ok"] = self.chain_ok
        return out


def _check_smooth(param: Parameter, Z):
    for i, z in enumerate(Z):
        if not is_parametrically_smooth(param, z):
            raise NonSmoothPointError(i, ternary_label(param, z))


def numeric_jacobian(param: Parameter, Z: Sequence[Sequence]) -> list[list]:
    """The algebraic Jacobian instantiated at theta (exact)."""
    param = param.as_rational()
    if not Z:
        return []
    J = algebraic_jacobian(param, Z)
    return J.evaluate(param.theta)


def batch_functional_dimension(param: Parameter, Z: Sequence[Sequence]) -> int:
    if param.number_mode == "float64":
        _check_smooth(param, Z)
        if not Z:
            return 0
        J = np.array([exact_gradient(param, z) for z in Z], dtype=np.float64)
        return int(np.linalg.matrix_rank(J))
    param = param.as_rational()
    _check_smooth(param, Z)
    if not Z:
        return 0
    return rank_rational(numeric_jacobian(param, Z))


def rank_profile(param: Parameter, Z: Sequence[Sequence], cfg: RankConfig = RankConfig()) -> RankProfile:
    """All four ranks of a smooth batch; check ``.chain_ok`` for the inequality chain."""
    param = param.as_rational()
    _check_smooth(param, Z)
    n_paths = path_count(param.arch)
    if not Z:
        return RankProfile(0, 0, 0, 0, 0, param.D, n_paths)
    table = enumerate_complete_paths(param.arch)
    J = algebraic_jacobian(param, Z, table)
    dim = rank_rational(J.evaluate(param.theta))
    rR = cfg.r_R(J)
    # theta itself is one more evaluation point for the ring-rank lower bound
    rR = max(rR, dim)
    rRR = r_RR_rank(J)
    ra = activation_matrix(param, Z, table).rank
    return RankProfile(dim, rR, rRR, ra, len(Z), param.D, n_paths)


@dataclass(frozen=True)
class GreedyBatch:
    rank: int
    points: tuple
    exhausted: bool  # patience ran out before reaching rank D
    samples: int

    @property
    def lower_bound_only(self) -> bool:
        return self.exhausted


MAX_SPREAD = 1e6


def _lattice_point(rng: np.random.Generator, n0: int, spread: float, denom: int):
    g = rng.standard_normal(n0) * spread
    return tuple(Fraction(int(round(v * denom)), denom) for v in g)


def grow_full_batch(param: Parameter, patience: int = 50, seed: int = 0, denom: int = 16,
                    growth: float = 1.05, max_samples: int = 100_000) -> GreedyBatch:
    """Greedily add smooth points that raise the Jacobian rank.

    Stops at rank D or after ``patience`` consecutive samples without
    improvement.  Points come from a Gaussian-like rational lattice whose
    spread grows by ``growth`` per sample so that far regions get visited.
    """
    param = param.as_rational()
    rng = np.random.default_rng([seed, 0xF00D])
    D, n0 = param.D, param.arch.input_dim
    basis = IncrementalRowBasis(D)
    kept = []
    idle = 0
    spread = 1.0
    samples = 0
    smooth_seen = False
    while basis.rank < D and idle < patience and samples < max_samples:
        z = _lattice_point(rng, n0, spread, denom)
        samples += 1
        spread = min(spread * growth, MAX_SPREAD)
        if not is_parametrically_smooth(param, z):
            if not smooth_seen and samples >= 20 * patience:
                break
            continue
        smooth_seen = True
        if basis.add(exact_gradient(param, z)):
            kept.append(z)
            idle = 0
        else:
            idle += 1
    if not smooth_seen:
        raise ValueError("no parametrically smooth point found within the sampling budget")
    return GreedyBatch(basis.rank, tuple(kept), basis.rank < D, samples)


def estimate_functional_dimension(param: Parameter, budget: int = 50, seed: int = 0) -> int:
    """Lower bound on the functional dimension from greedy batch growth (``budget`` = patience)."""
    return grow_full_batch(param, patience=budget, seed=seed).rank


def real_rank_stability_check(param: Parameter, Z: Sequence[Sequence], cfg: RankConfig = RankConfig()) -> bool:
    """True iff the rank at theta equals the ring rank of the algebraic Jacobian."""
    param = param.as_rational()
    _check_smooth(param, Z)
    if not Z:
        return True
    J = algebraic_jacobian(param, Z)
    dim = rank_rational(J.evaluate(param.theta))
    return dim == max(cfg.r_R(J), dim)
