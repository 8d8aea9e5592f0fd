"""Single-network report: rank profile, smoothness flags and genericity proxy."""

from __future__ import annotations

import csv
import io
from fractions import Fraction
from pathlib import Path

from .fundim import RankConfig, batch_functional_dimension, rank_profile, real_rank_stability_check
from .io import format_rational, load_batch, load_network
from .network import Parameter, is_parametrically_smooth, layer_genericity_check, output_preactivation_zero, ternary_label

__all__ = ["analyze", "profile_csv"]

PROFILE_COLUMNS = ["dim_ba_fun", "r_R", "r_RR", "rank_alpha", "m", "D", "n_paths", "chain_ok"]


def analyze(network, batch, rank_mode: str = "randomized", number_mode: str | None = None,
            seed: int = 0, genericity_cap: int = 12) -> dict:
    """Analyze a network on a batch.

    ``network`` and ``batch`` are either paths to JSON files or a Parameter and a
    list of points.  Non-smooth points are listed and dropped before any rank
    is computed.
    """
    param = load_network(network) if isinstance(network, (str, Path)) else network
    if number_mode is not None and number_mode != param.number_mode:
        param = param.as_rational() if number_mode == "rational" else Parameter.from_theta(
            param.arch, [float(v) for v in param.theta], "float64")
    Z = load_batch(batch, param.arch.input_dim, param.number_mode) if isinstance(batch, (str, Path)) else list(batch)

    points, kept, rejected = [], [], []
    for i, z in enumerate(Z):
        smooth = is_parametrically_smooth(param, z)
        points.append({
            "index": i,
            "point": [format_rational(v) for v in z],
            "pattern": str(ternary_label(param, z)),
            "smooth": smooth,
            "output_zero": output_preactivation_zero(param, z),
        })
        (kept if smooth else rejected).append(i)
    Zs = [Z[i] for i in kept]

    exact = param.as_rational()
    Zx = [tuple(Fraction(v) for v in z) for z in Zs]
    cfg = RankConfig(rank_mode, seed=seed)
    profile = rank_profile(exact, Zx, cfg)
    out = {
        "architecture": list(param.arch.widths),
        "number_mode": param.number_mode,
        "rank_mode": rank_mode,
        "profile": profile.to_json(),
        "rank_alpha": profile.rank_alpha,
        "points": points,
        "rejected": rejected,
        "real_rank_stable": real_rank_stability_check(exact, Zx, cfg),
        "genericity": layer_genericity_check(exact, genericity_cap).to_json(),
    }
    if param.number_mode == "float64":
        # numerical rank alongside the exact one; they can differ near rank drops
        out["dim_ba_fun_float64"] = batch_functional_dimension(param, Zs)
    return out


def profile_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_COLUMNS + ["n_rejected", "real_rank_stable", "generic"])
    p = report["profile"]
    w.writerow([p[k] for k in PROFILE_COLUMNS]
               + [len(report["rejected"]), report["real_rank_stable"], report["genericity"]["generic"]])
    return buf.getvalue()
