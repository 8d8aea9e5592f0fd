"""Acceptance criteria 1-7, one test each.

Tolerances and runtime limits are pinned here:
  1  exact polynomial equality, < 1 s
  2  exact ranks, lower == upper == 4, < 10 s
  3  >= 200 trials, chain in every trial, dim_ba_fun == r_R in >= 99%, < 300 s
  4  exact equality on 100 + 100 instances, < 60 s
  5  four-row set has shattered size 1; 500 random sets with m <= 5 against brute force, < 60 s
  6  nullity 4, exact 100x constancy ratio, walk deviation <= 1e-8, residual exactly 0, < 60 s
  7  estimates 5 and 2, < 30 s
"""

import time
from fractions import Fraction as F
from itertools import combinations, product

import numpy as np

from helpers import BATCH, example_param, smooth_instance
from relurank.campaign import CampaignConfig, run_conjecture_campaign
from relurank.family import rank_gap_example, family_jacobian
from relurank.fiber import constancy_deviations, constancy_order_check, fiber_walk, gradient_rowspace_check, jacobian_null_space
from relurank.fundim import estimate_functional_dimension
from relurank.linalg import r_R_rank, r_RR_rank
from relurank.network import Architecture, Parameter, forward
from relurank.paths import algebraic_evaluation, algebraic_jacobian, algebraic_representation, verify_path_factorization
from relurank.poly import parse_poly, poly_eval
from relurank.shatter import PolyDifferences, is_shattered, max_shattered_subset, psi_bracket, sauer_check, shifting

ARCHS = ((1, 2, 1), (2, 3, 1), (2, 4, 3, 1))


class Timer:
    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t


def test_criterion_1_worked_example_symbolic():
    with Timer() as t:
        param = example_param()
        P = lambda s: parse_poly(s, 7)
        evals = algebraic_evaluation(param, BATCH)
        J = algebraic_jacobian(param, BATCH)
    assert evals == [P("t7"), P("t5*(t1/2 + t2) + t7"), P("t5*(3/2*t1 + t2) + t6*(3/2*t3 + t4) + t7")]
    printed = [
        ["0", "0", "0", "0", "0", "0", "1"],
        ["1/2*t5", "t5", "0", "0", "1/2*t1 + t2", "0", "1"],
        ["3/2*t5", "t5", "3/2*t6", "t6", "3/2*t1 + t2", "3/2*t3 + t4", "1"],
    ]
    assert [list(row) for row in J.entries] == [[P(s) for s in row] for row in printed]
    assert t.elapsed < 1.0


def test_criterion_2_rank_gap_example():
    with Timer() as t:
        fam = rank_gap_example()
        J = family_jacobian(fam)
        rR, rRR = r_R_rank(J), r_RR_rank(J)
        rR_exact = r_R_rank(J, mode="exact")
        b = psi_bracket(PolyDifferences(fam, (0, 0, 0)), [F(1), F(1, 2), F(1, 4), F(1, 8)], 10_000, rRR, seed=0)
    assert (rR, rR_exact, rRR) == (3, 3, 4)
    assert (b.lower, b.upper) == (4, 4)
    assert t.elapsed < 10.0


def test_criterion_3_inequality_chain():
    with Timer() as t:
        cfg = CampaignConfig(architectures=ARCHS, trials=210, batch_min=1, batch_max=4, samples_per_level=1000,
                             eps_levels=5, seed=2024)
        rep = run_conjecture_campaign(cfg)
    rows = rep.rows
    assert len(rows) >= 200 and not rep.failures
    for r in rows:
        assert r["dim_ba_fun"] <= r["psi_lower"] <= r["r_RR"] <= r["rank_alpha"], r
        assert r["psi_upper"] == r["r_RR"] and r["chain_ok"], r
    eq = sum(r["dim_ba_fun"] == r["r_R"] for r in rows) / len(rows)
    assert eq >= 0.99
    assert {r["architecture"] for r in rows} == {"(1,2|1)", "(2,3|1)", "(2,4,3|1)"}
    assert t.elapsed < 300.0


def test_criterion_4_path_sum_oracle():
    with Timer() as t:
        for k in range(100):
            p, Z = smooth_instance(10_000 + k, ARCHS[k % 3], 1)
            x = Z[0]
            poly = algebraic_representation(p, x)
            assert poly_eval(poly, list(p.theta) + list(x)) == forward(p, x)[0]
        for k in range(100):
            p, Z = smooth_instance(20_000 + k, ARCHS[k % 3], 1 + k % 5)
            assert verify_path_factorization(p, Z)
    assert t.elapsed < 60.0


def _oracle_shattered(rows, m):
    return {S for k in range(m + 1) for S in combinations(range(m), k)
            if len({tuple(r[i] for i in S) for r in rows}) == 2**k}


def test_criterion_5_shifting_and_sauer():
    four_rows = {(-1, -1, -1), (1, -1, -1), (1, -1, 1), (1, 1, 1)}
    assert max_shattered_subset(four_rows)[0] == 1
    rng = np.random.default_rng(55)
    with Timer() as t:
        for _ in range(500):
            m = int(rng.integers(1, 6))
            cube = list(product((-1, 1), repeat=m))
            n = int(rng.integers(1, len(cube) + 1))
            rows = {cube[i] for i in rng.choice(len(cube), size=n, replace=False)}
            shifted = shifting(rows)
            oracle = _oracle_shattered(rows, m)
            assert len(shifted) == len(rows)
            assert _oracle_shattered(shifted, m) <= oracle
            size, witness = max_shattered_subset(rows)
            assert size == max(len(S) for S in oracle) and is_shattered(rows, witness)
            assert sauer_check(rows, size)
    assert t.elapsed < 60.0


def test_criterion_6_fiber_suite():
    with Timer() as t:
        param = example_param()
        ns = jacobian_null_space(param, BATCH)
        assert len(ns) == 4
        for v in ns:
            assert constancy_order_check(param, BATCH, v, (F(1, 100), F(1, 1000)))
            (_, d1), (_, d2) = constancy_deviations(param, BATCH, v, (F(1, 100), F(1, 1000)))
            assert d1 == 0 or d1 / d2 == 100
        for seed in range(3):
            rep = fiber_walk(param, BATCH, steps=20, step_size=1e-2, seed=seed)
            assert rep.completed and rep.max_deviation <= 1e-8
        rng = np.random.default_rng(66)
        for k in range(100):
            p, Z = smooth_instance(30_000 + k, ARCHS[k % 3], 1 + k % 4)
            labels = [F(int(v), 13) for v in rng.integers(-50, 50, size=len(Z))]
            assert gradient_rowspace_check(p, Z, labels) == 0
    assert t.elapsed < 60.0


def test_criterion_7_functional_dimension_estimate():
    with Timer() as t:
        assert estimate_functional_dimension(example_param()) == 5
        assert estimate_functional_dimension(Parameter.from_theta(Architecture((1, 1)), [2, 1])) == 2
    assert t.elapsed < 30.0
