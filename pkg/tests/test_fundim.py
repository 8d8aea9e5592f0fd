from fractions import Fraction as F

import numpy as np
import pytest

from helpers import random_param, smooth_instance
from relurank.family import rank_gap_example, family_jacobian
from relurank.fundim import (
    RankConfig,
    batch_functional_dimension,
    estimate_functional_dimension,
    grow_full_batch,
    rank_profile,
    real_rank_stability_check,
)
from relurank.linalg import r_R_rank, r_RR_rank
from relurank.network import Architecture, NonSmoothPointError, Parameter


def test_batch_dimension_examples(param, batch):
    assert batch_functional_dimension(param, batch) == 3
    assert batch_functional_dimension(param, [(-5,)]) == 1
    assert batch_functional_dimension(param, []) == 0
    with pytest.raises(NonSmoothPointError):
        batch_functional_dimension(param, [(1,)])


def test_float_mode_dimension(param, batch):
    pf = Parameter.from_theta(param.arch, [float(v) for v in param.theta], "float64")
    assert batch_functional_dimension(pf, batch) == 3


def test_profile_example(param, batch):
    prof = rank_profile(param, batch)
    assert (prof.dim_ba_fun, prof.r_R, prof.r_RR, prof.rank_alpha) == (3, 3, 3, 3)
    assert prof.chain_ok and prof.rank_gap == 0
    assert rank_profile(param, batch, RankConfig("exact")).r_R == 3
    empty = rank_profile(param, [])
    assert (empty.dim_ba_fun, empty.r_R, empty.r_RR, empty.rank_alpha) == (0, 0, 0, 0)


def test_profile_many_points_bounded_by_D():
    p, Z = smooth_instance(21, (1, 2, 1), 10)
    prof = rank_profile(p, Z)
    assert prof.dim_ba_fun <= 7 and prof.chain_ok


def test_rank_gap_family():
    J = family_jacobian(rank_gap_example())
    assert r_R_rank(J) == 3 and r_RR_rank(J) == 4


def test_estimate_examples(param):
    assert estimate_functional_dimension(param) == 5
    affine = Parameter.from_theta(Architecture((1, 1)), [F(3, 7), 2])
    assert estimate_functional_dimension(affine) == 2


def test_estimate_dead_hidden_layer():
    # every hidden neuron is off everywhere, so only the output bias moves the function
    p = Parameter.from_theta(Architecture((1, 2, 1)), [0, -1, 0, -1, 0, 0, 0])
    assert estimate_functional_dimension(p) == 1
    g = grow_full_batch(p)
    assert g.rank == 1 and g.lower_bound_only


def test_all_zero_theta_has_no_smooth_points():
    with pytest.raises(ValueError):
        estimate_functional_dimension(Parameter.zeros(Architecture((1, 2, 1))))
    assert estimate_functional_dimension(Parameter.zeros(Architecture((2, 1)))) == 3


def test_greedy_batch_is_smooth_and_realizes_rank(param):
    g = grow_full_batch(param, seed=4)
    assert batch_functional_dimension(param, list(g.points)) == g.rank == len(g.points)


def test_stability_examples(param, batch):
    assert real_rank_stability_check(param, batch)
    assert real_rank_stability_check(param, [])
    # on the 2x2 minor's zero locus: both rows collapse to multiples of (x, 1, x, 1 ...)
    bad = Parameter.from_theta(param.arch, [0, 1, 1, -1, 0, 1, 0])
    Z = [(F(1, 2),), (F(3, 4),)]
    assert batch_functional_dimension(bad, Z) == 1
    assert rank_profile(bad, Z).r_R == 2
    assert not real_rank_stability_check(bad, Z)


def test_batch_monotonicity_and_estimate_dominates():
    for k in range(10):
        p, Z = smooth_instance(600 + k, (2, 3, 1), 5)
        dims = [batch_functional_dimension(p, Z[:i]) for i in range(len(Z) + 1)]
        assert dims == sorted(dims)
        assert estimate_functional_dimension(p, seed=k) >= dims[-1]


def test_stability_holds_on_random_trials():
    hits = 0
    n = 100
    for k in range(n):
        p, Z = smooth_instance(700 + k, [(1, 2, 1), (2, 3, 1)][k % 2], 3)
        hits += real_rank_stability_check(p, Z)
    assert hits >= 99
