"""Compare the compiled sign kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--samples 50000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from relurank import kernels
from relurank.family import rank_gap_example
from relurank.shatter import REL_TOL, PolyDifferences


def _relu_case(rng, widths, S, m):
    D = sum(widths[i + 1] * (widths[i] + 1) for i in range(len(widths) - 1))
    thetas = rng.standard_normal((S, D))
    points = rng.standard_normal((m, widths[0]))
    f0 = rng.standard_normal(m)
    return thetas, points, np.array(widths, dtype=np.int64), f0


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=50_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(args.seed)
    py, cy = kernels.python_backend, kernels.compiled_backend

    print(f"{'case':<28}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}  agree")
    for widths, m in [((1, 2, 1), 3), ((2, 4, 3, 1), 4), ((3, 8, 8, 1), 6)]:
        args_ = _relu_case(rng, widths, args.samples, m)
        a = py.relu_difference_signs(*args_, REL_TOL)
        b = cy.relu_difference_signs(*args_, REL_TOL)
        tp = _best(lambda: py.relu_difference_signs(*args_, REL_TOL), args.repeat)
        tc = _best(lambda: cy.relu_difference_signs(*args_, REL_TOL), args.repeat)
        name = f"relu {widths} m={m}"
        print(f"{name:<28}{tp * 1e3:>12.2f}{tc * 1e3:>13.2f}{tp / tc:>9.1f}  {np.array_equal(a, b)}")

    fam = PolyDifferences(rank_gap_example())
    thetas = rng.uniform(-1, 1, (args.samples, fam.D))
    pargs = (thetas, fam._exps, fam._coefs, fam._slots, fam._f0_float, REL_TOL)
    a, b = py.poly_difference_signs(*pargs), cy.poly_difference_signs(*pargs)
    tp = _best(lambda: py.poly_difference_signs(*pargs), args.repeat)
    tc = _best(lambda: cy.poly_difference_signs(*pargs), args.repeat)
    print(f"{'poly rank-gap family':<28}{tp * 1e3:>12.2f}{tc * 1e3:>13.2f}{tp / tc:>9.1f}  {np.array_equal(a, b)}")


if __name__ == "__main__":
    main()
