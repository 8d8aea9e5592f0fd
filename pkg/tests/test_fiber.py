from fractions import Fraction as F

import numpy as np
import pytest

from helpers import smooth_instance
from relurank.fiber import (
    constancy_deviations,
    constancy_order_check,
    evaluation_map,
    fiber_walk,
    gradient_rowspace_check,
    jacobian_null_space,
    rowspace_residual_vector,
)
from relurank.fundim import batch_functional_dimension, grow_full_batch, numeric_jacobian
from relurank.network import Architecture, Parameter


def test_null_space_examples(param, batch):
    ns = jacobian_null_space(param, batch)
    assert len(ns) == 4
    assert len(jacobian_null_space(param, [])) == 7
    affine = Parameter.from_theta(Architecture((1, 1)), [2, 1])
    assert jacobian_null_space(affine, [(0,), (1,)]) == []


def test_rank_nullity():
    for k in range(10):
        p, Z = smooth_instance(900 + k, (2, 3, 1), 1 + k % 5)
        assert len(jacobian_null_space(p, Z)) + batch_functional_dimension(p, Z) == p.D


def test_constancy_along_kernel(param, batch):
    for v in jacobian_null_space(param, batch):
        assert constancy_order_check(param, batch, v)
        (t1, d1), (t2, d2) = constancy_deviations(param, batch, v, [F(1, 100), F(1, 1000)])
        if d1:
            assert d1 / d2 == 100


def test_constancy_fails_off_kernel(param, batch):
    J = numeric_jacobian(param, batch)
    assert not constancy_order_check(param, batch, J[2])


def test_zero_direction(param, batch):
    assert constancy_order_check(param, batch, [0] * 7)
    assert all(d == 0 for _, d in constancy_deviations(param, batch, [0] * 7, [F(1, 10)]))


def test_walk(param, batch):
    rep = fiber_walk(param, batch, steps=20, step_size=1e-2)
    assert rep.completed and rep.steps_taken == 20
    assert rep.max_deviation <= 1e-8
    assert set(rep.ranks) == {3}
    other = fiber_walk(param, batch, steps=20, step_size=1e-2, seed=5)
    ea = evaluation_map(param.with_theta(rep.theta_final), batch)
    eb = evaluation_map(param.with_theta(other.theta_final), batch)
    assert max(abs(a - b) for a, b in zip(ea, eb)) <= 2e-9


def test_walk_zero_steps(param, batch):
    rep = fiber_walk(param, batch, steps=0)
    assert rep.completed and rep.max_deviation == 0


def test_walk_crossing_boundary(param, batch):
    rep = fiber_walk(param, batch, steps=5, step_size=2.0)
    assert not rep.completed and rep.error and rep.steps_taken < 5


def test_walk_full_rank_reports():
    p = Parameter.from_theta(Architecture((1, 1)), [2, 1])
    rep = fiber_walk(p, [(0,), (1,)], steps=2)
    assert not rep.completed and "full column rank" in rep.error


def test_rowspace_examples(param, batch):
    assert gradient_rowspace_check(param, batch, [3, -1, F(2, 7)]) == 0
    labels = evaluation_map(param, batch)
    assert all(v == 0 for v in rowspace_residual_vector(param, batch, labels))
    with pytest.raises(ValueError):
        rowspace_residual_vector(param, batch, [1])


def test_rowspace_residual_random():
    rng = np.random.default_rng(13)
    for k in range(30):
        p, Z = smooth_instance(1000 + k, [(1, 2, 1), (2, 3, 1), (2, 4, 3, 1)][k % 3], 1 + k % 4)
        labels = [F(int(v), 7) for v in rng.integers(-20, 20, size=len(Z))]
        assert gradient_rowspace_check(p, Z, labels) == 0


def test_fiber_is_a_point_with_full_batch(param):
    g = grow_full_batch(param)
    assert len(jacobian_null_space(param, list(g.points))) == param.D - g.rank
