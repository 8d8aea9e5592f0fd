import os
import subprocess
import sys

import numpy as np
import pytest

from relurank import kernels
from relurank.family import PolyFamily, rank_gap_example
from relurank.network import Architecture, Parameter, forward
from relurank.shatter import REL_TOL, NetworkDifferences, PolyDifferences

needs_compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="extension not built")


def _relu_args(rng, widths, S, m):
    D = sum(widths[i + 1] * (widths[i] + 1) for i in range(len(widths) - 1))
    return (rng.standard_normal((S, D)), rng.standard_normal((m, widths[0])),
            np.array(widths, dtype=np.int64), rng.standard_normal(m))


def test_numpy_backend_signs_match_forward():
    rng = np.random.default_rng(0)
    widths = (2, 3, 1)
    thetas, pts, w, f0 = _relu_args(rng, widths, 50, 3)
    codes = kernels.python_backend.relu_difference_signs(thetas, pts, w, f0, REL_TOL)
    arch = Architecture(widths)
    for s in range(50):
        p = Parameter.from_theta(arch, list(thetas[s]), "float64")
        for i in range(3):
            d = forward(p, list(pts[i]))[0] - f0[i]
            if codes[s, i]:
                assert np.sign(d) == codes[s, i]


@needs_compiled
@pytest.mark.parametrize("widths", [(1, 2, 1), (2, 4, 3, 1), (3, 1)])
def test_backends_agree_relu(widths):
    rng = np.random.default_rng(len(widths))
    args = _relu_args(rng, widths, 2000, 4)
    a = kernels.python_backend.relu_difference_signs(*args, REL_TOL)
    b = kernels.compiled_backend.relu_difference_signs(*args, REL_TOL)
    assert np.array_equal(a, b)


@needs_compiled
def test_backends_agree_poly():
    rng = np.random.default_rng(1)
    for fam in (rank_gap_example(), PolyFamily.from_strings(2, ["t1*t2 - 1/3", "t1^3", "2"])):
        d = PolyDifferences(fam)
        thetas = rng.uniform(-1, 1, (3000, fam.D))
        args = (thetas, d._exps, d._coefs, d._slots, d._f0_float, REL_TOL)
        assert np.array_equal(kernels.python_backend.poly_difference_signs(*args),
                              kernels.compiled_backend.poly_difference_signs(*args))


def test_uncertain_entries_are_flagged(param, batch):
    fam = NetworkDifferences(param, batch)
    codes = fam.float_signs(np.array([fam.anchor_float]))
    assert not codes.any()


def test_backend_name():
    assert kernels.BACKEND_NAME in ("cython", "numpy")


def test_pure_python_fallback_selected_by_env():
    env = dict(os.environ, RELURANK_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from relurank import kernels; print(kernels.BACKEND_NAME)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
