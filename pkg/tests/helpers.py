from fractions import Fraction as F

import numpy as np

from relurank.network import Architecture, Parameter, is_parametrically_smooth

THETA_TILDE = (1, 0, 1, -1, 1, 1, 0)
BATCH = [(F(-1),), (F(1, 2),), (F(3, 2),)]


def example_param() -> Parameter:
    return Parameter.from_theta(Architecture((1, 2, 1)), THETA_TILDE)


def random_param(rng, widths, scale=100, denom=97) -> Parameter:
    arch = Architecture(tuple(widths))
    nums = rng.integers(-scale, scale, size=arch.n_params, endpoint=True)
    return Parameter.from_theta(arch, [F(int(n), denom) for n in nums])


def random_point(rng, n0, denom=8, spread=2.0):
    return tuple(F(int(round(v * denom)), denom) for v in rng.standard_normal(n0) * spread)


def random_smooth_batch(rng, param, m, tries=500):
    pts = []
    for _ in range(tries):
        if len(pts) == m:
            break
        z = random_point(rng, param.arch.input_dim)
        if z not in pts and is_parametrically_smooth(param, z):
            pts.append(z)
    return pts if len(pts) == m else None


def smooth_instance(seed, widths, m):
    """A (param, batch) pair with a smooth batch of size m, retrying theta as needed."""
    rng = np.random.default_rng(seed)
    while True:
        p = random_param(rng, widths)
        Z = random_smooth_batch(rng, p, m)
        if Z is not None:
            return p, Z
