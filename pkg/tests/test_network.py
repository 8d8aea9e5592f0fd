from fractions import Fraction as F

import numpy as np
import pytest

from helpers import random_param, random_point, smooth_instance
from relurank.network import (
    Architecture,
    Parameter,
    activation_stable_radius,
    exact_gradient,
    forward,
    is_parametrically_smooth,
    layer_genericity_check,
    output_preactivation_zero,
    preactivations,
    ternary_label,
)
from relurank.paths import algebraic_representation


def test_forward_examples(param):
    out, pat = forward(param, (F(3, 2),))
    assert out == 2 and pat.hidden == ((1, 1),)
    out, pat = forward(param, (-1,))
    assert out == 0 and pat.hidden == ((-1, -1),)


@pytest.mark.parametrize("widths", [(1, 2, 1), (2, 3, 3, 1), (3, 1)])
def test_zero_parameter(widths):
    p = Parameter.zeros(Architecture(widths))
    x = (F(7, 3),) * widths[0]
    out, pat = forward(p, x)
    assert out == 0
    assert all(s == 0 for layer in pat.hidden for s in layer)
    if len(widths) > 2:
        assert not is_parametrically_smooth(p, x)


def test_ternary_and_smoothness(param):
    assert ternary_label(param, (F(1, 2),)).hidden == ((1, -1),)
    assert ternary_label(param, (1,)).hidden == ((1, 0),)
    assert is_parametrically_smooth(param, (F(1, 2),))
    assert not is_parametrically_smooth(param, (1,))


def test_output_zero_does_not_break_smoothness(param):
    assert output_preactivation_zero(param, (-1,))
    assert is_parametrically_smooth(param, (-1,))
    assert str(ternary_label(param, (-1,))) == "--|0"


def test_unrolling_order():
    arch = Architecture((1, 2, 1))
    p = Parameter.from_theta(arch, range(1, 8))
    assert p.weights == (((1,), (3,)), ((5, 6),))
    assert p.biases == ((2, 4), (7,))
    assert p.theta == tuple(F(i) for i in range(1, 8))
    assert arch.weight_index(2, 0, 1) == 5 and arch.bias_index(1, 1) == 3


def test_architecture_validation():
    with pytest.raises(ValueError):
        Architecture((2, 3, 2))
    with pytest.raises(ValueError):
        Architecture((1,))
    with pytest.raises(ValueError):
        Parameter.from_theta(Architecture((1, 1)), [1])
    with pytest.raises(ValueError):
        forward(Parameter.zeros(Architecture((2, 1))), (1,))


def test_genericity_examples(param):
    rep = layer_genericity_check(param)
    assert rep.generic and [l.layer for l in rep.layers] == [1, 2]
    dup = Parameter.from_theta(Architecture((2, 2, 1)), [1, 2, 3, 1, 2, 3, 1, 1, 0])
    rep = layer_genericity_check(dup)
    assert not rep.generic
    assert (0, 1) in rep.layers[0].violations
    wide = Parameter.from_theta(Architecture((1, 5, 1)), range(1, 17))
    rep = layer_genericity_check(wide, cap=3)
    assert rep.layers[0].skipped and rep.skipped


def test_parallel_hyperplanes_in_plane_are_not_generic():
    # two parallel lines in R^2: the pair has normals of rank 1 < 2
    p = Parameter.from_theta(Architecture((2, 2, 1)), [1, 0, 0, 1, 0, 1, 1, 1, 0])
    assert not layer_genericity_check(p).generic


def _naive_labels(param, x):
    a = [F(v) for v in x]
    out = []
    for l in range(param.arch.depth):
        W, b = param.weights[l], param.biases[l]
        y = [sum(W[j][i] * a[i] for i in range(len(a))) + b[j] for j in range(len(W))]
        out.append(tuple((v > 0) - (v < 0) for v in y))
        a = [max(v, 0) for v in y]
    return tuple(out)


def test_labels_match_naive_recomputation():
    rng = np.random.default_rng(5)
    for widths in [(1, 2, 1), (2, 3, 1), (2, 4, 3, 1), (3, 2, 2, 1)]:
        for _ in range(25):
            p = random_param(rng, widths, scale=3, denom=2)
            x = random_point(rng, widths[0], denom=2)
            assert ternary_label(p, x).signs == _naive_labels(p, x)


def test_preactivations_layer_count(param):
    assert len(preactivations(param, (F(1, 2),))) == 2


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    for k in range(10):
        p, Z = smooth_instance(100 + k, (2, 3, 1), 1)
        g = exact_gradient(p, Z[0])
        h = F(1, 10**6)
        for i in range(p.D):
            th = list(p.theta)
            th[i] += h
            fd = (forward(p.with_theta(th), Z[0])[0] - forward(p, Z[0])[0]) / h
            # the output is piecewise polynomial of degree <= 1 in each coordinate on a region
            assert fd == g[i]


def test_input_derivative_matches_path_polynomial():
    for k in range(10):
        p, Z = smooth_instance(200 + k, (2, 4, 3, 1), 1)
        poly = algebraic_representation(p, Z[0])
        x = Z[0]
        for i in range(2):
            dpoly = poly.partial(p.D + i).evaluate(list(p.theta) + list(x))
            for h in (F(1, 10**5), F(1, 10**6)):
                xs = list(x)
                xs[i] += h
                if ternary_label(p, xs).hidden != ternary_label(p, x).hidden:
                    continue
                fd = (forward(p, xs)[0] - forward(p, x)[0]) / h
                assert fd == dpoly


def test_float_mode_agrees_with_rational():
    rng = np.random.default_rng(3)
    p = random_param(rng, (2, 3, 1))
    pf = Parameter.from_theta(p.arch, [float(v) for v in p.theta], "float64")
    x = random_point(rng, 2)
    assert abs(forward(pf, x)[0] - float(forward(p, x)[0])) < 1e-12
    assert pf.as_rational().number_mode == "rational"


def test_stable_radius(param, batch):
    r = activation_stable_radius(param, batch)
    assert 0.1 < r <= 0.25
    assert activation_stable_radius(param, [(1,)]) == 0.0
