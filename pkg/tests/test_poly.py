from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from relurank.poly import PolyMatrix, SparsePoly, as_fraction, parse_poly, poly_eval, poly_partial


def t(i, n=7):
    return SparsePoly.variable(i, n)


def test_partial_of_example_entry():
    p = t(4) * (t(0) * F(1, 2) + t(1)) + t(6)
    assert poly_partial(p, 4) == t(0) * F(1, 2) + t(1)


def test_partial_of_constant_is_zero():
    assert poly_partial(SparsePoly.constant(1, 3), 0).is_zero()


def test_partial_rank_gap_entry():
    p = parse_poly("t3 - (t1^2 - t2^2)", 3)
    assert poly_partial(p, 0) == parse_poly("-2*t1", 3)


def test_eval_examples():
    p = t(4) * (t(0) * F(1, 2) + t(1)) + t(6)
    assert poly_eval(p, (1, 0, 1, -1, 1, 1, 0)) == F(1, 2)
    assert poly_eval(SparsePoly.zero(3), (5, 6, 7)) == 0
    assert poly_eval(parse_poly("t3 - (t1^2 - t2^2)", 3), (1, 1, 1)) == 1


def test_parser_and_text_round_trip():
    p = parse_poly("θ5*(3/2*θ1 + θ2) − θ6·θ4 + 0.5", 7)
    assert p == SparsePoly.from_text(p.to_text(), 7)
    assert p.coefficient((1, 0, 0, 0, 1, 0, 0)) == F(3, 2)
    assert p.coefficient((0,) * 7) == F(1, 2)


@pytest.mark.parametrize("bad", ["t1 +", "t9", "(t1", "t1 / t2", "1/0", "t1 $ 2"])
def test_parser_rejects(bad):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_poly(bad, 3)


def test_as_fraction():
    assert as_fraction("3/4") == F(3, 4)
    assert as_fraction(0.5) == F(1, 2)
    with pytest.raises(ValueError):
        as_fraction("1/0")
    with pytest.raises(ValueError):
        as_fraction("abc")


def test_matrix_json_round_trip():
    M = PolyMatrix.from_strings([["t1", "t2^2"], ["1", "t1*t2 - 3"]], 2)
    assert PolyMatrix.from_json(M.to_json()).to_json() == M.to_json()
    assert M.evaluate((2, 3)) == [[2, 9], [1, 3]]


small = st.integers(-3, 3)
polys = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), small, max_size=5).map(
    lambda d: SparsePoly(2, {k: F(v) for k, v in d.items()}))
points = st.tuples(st.fractions(max_denominator=5), st.fractions(max_denominator=5))


@settings(max_examples=100, deadline=None)
@given(polys, polys, points)
def test_ring_operations_commute_with_evaluation(p, q, x):
    assert (p * q).evaluate(x) == p.evaluate(x) * q.evaluate(x)
    assert (p + q).evaluate(x) == p.evaluate(x) + q.evaluate(x)
    assert (p - q).evaluate(x) == p.evaluate(x) - q.evaluate(x)


@settings(max_examples=100, deadline=None)
@given(polys, polys)
def test_leibniz_rule(p, q):
    for i in range(2):
        assert (p * q).partial(i) == p.partial(i) * q + p * q.partial(i)


@settings(max_examples=60, deadline=None)
@given(polys, st.tuples(st.floats(-2, 2), st.floats(-2, 2)), st.integers(0, 1))
def test_partial_matches_finite_differences(p, x, i):
    # forward differences are first order in h, so the error shrinks about 10x per decade
    exact = float(p.partial(i).evaluate([F(v) for v in x]))
    errs = []
    for h in (1e-3, 1e-4):
        y = list(x)
        y[i] += h
        errs.append(abs((p.evaluate(y) - p.evaluate(list(x))) / h - exact))
    assert errs[1] <= max(errs[0] / 5, 1e-6)
