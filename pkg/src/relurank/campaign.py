"""Randomized campaigns over architectures, parameters and batches.

Each trial samples an exact-rational parameter and a parametrically smooth
batch, computes the rank profile and a sampled bracket on the persistent
pseudoshattering number, and records whether

    dim_ba_fun <= psi_lower <= psi_upper <= r_RR <= rank_alpha

holds.  Trials are reproducible from ``(config, trial index)``; the
aggregate only counts, it never certifies the almost-everywhere claims.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .family import PolyFamily, family_jacobian
from .fundim import RankConfig, rank_profile
from .linalg import RankBudgetError, r_R_rank, r_RR_rank, rank_rational
from .network import Architecture, Parameter, activation_stable_radius, is_parametrically_smooth, layer_genericity_check
from .paths import PathBudgetError
from .shatter import NetworkDifferences, PolyDifferences, geometric_schedule, psi_bracket

__all__ = ["CampaignConfig", "CampaignReport", "run_trial", "run_conjecture_campaign", "CAVEAT"]

CAVEAT = (
    "Sampled parameters avoid measure-zero exceptional sets only with probability one; "
    "these counts support, but cannot certify, statements about almost every parameter."
)

CSV_COLUMNS = [
    "trial", "kind", "architecture", "m", "D", "dim_ba_fun", "psi_lower", "psi_upper",
    "r_R", "r_RR", "rank_alpha", "chain_ok", "conjecture_support", "generic", "capacity",
    "eps_min", "failure",
]


@dataclass(frozen=True)
class CampaignConfig:
    architectures: tuple = ((1, 2, 1),)
    trials: int = 50
    batch_min: int = 1
    batch_max: int = 4
    theta_scale: int = 100  # numerators uniform in [-scale, scale]
    theta_denom: int = 97
    point_spread: float = 2.0
    point_denom: int = 8
    eps0: Fraction = Fraction(1)
    eps_levels: int = 6
    samples_per_level: int = 2000
    targeted: bool = True
    rank_mode: str = "randomized"
    rank_trials: int = 3
    seed: int = 0
    workers: int = 1
    max_point_tries: int = 500
    families: tuple = ()  # (PolyFamily, anchor) pairs, one extra trial each

    def __post_init__(self):
        object.__setattr__(self, "architectures", tuple(tuple(int(n) for n in a) for a in self.architectures))
        object.__setattr__(self, "eps0", Fraction(self.eps0))
        if self.trials < 0 or self.batch_min < 1 or self.batch_max < self.batch_min:
            raise ValueError("trial and batch counts must be positive with batch_min <= batch_max")
        if self.samples_per_level < 1 or self.eps_levels < 1 or self.eps0 <= 0:
            raise ValueError("sampling schedule must be positive")
        if self.theta_denom < 1 or self.point_denom < 1 or self.theta_scale < 1:
            raise ValueError("lattice parameters must be positive")
        if self.trials and not self.architectures:
            raise ValueError("need at least one architecture")
        for a in self.architectures:
            Architecture(a)

    @classmethod
    def from_json(cls, data: dict) -> "CampaignConfig":
        data = dict(data)
        fams = []
        for f in data.pop("families", []):
            fam = PolyFamily.from_json(f)
            anchor = tuple(Fraction(v) for v in f.get("anchor", [0] * fam.D))
            fams.append((fam, anchor))
        if "eps0" in data:
            data["eps0"] = Fraction(str(data["eps0"]))
        if "architectures" in data:
            data["architectures"] = tuple(tuple(a) for a in data["architectures"])
        return cls(families=tuple(fams), **data)

    def to_json(self) -> dict:
        out = asdict(self)
        out["eps0"] = str(self.eps0)
        out["architectures"] = [list(a) for a in self.architectures]
        out["families"] = [
            dict(f.to_json(), anchor=[str(v) for v in anchor]) for f, anchor in self.families
        ]
        return out


@dataclass
class CampaignReport:
    config: CampaignConfig
    rows: list = field(default_factory=list)

    @property
    def completed(self) -> list:
        return [r for r in self.rows if r["failure"] is None]

    @property
    def failures(self) -> list:
        return [{"trial": r["trial"], "reason": r["failure"]} for r in self.rows if r["failure"] is not None]

    def aggregate(self) -> dict:
        done = self.completed
        n = len(done)
        frac = (lambda k: sum(1 for r in done if r[k]) / n) if n else (lambda k: None)
        gaps = Counter(r["r_RR"] - r["r_R"] for r in done)
        eq = sum(1 for r in done if r["dim_ba_fun"] == r["r_R"])
        return {
            "n_trials": len(self.rows),
            "n_completed": n,
            "n_failed": len(self.rows) - n,
            "chain_ok_fraction": frac("chain_ok"),
            "conjecture_support_fraction": frac("conjecture_support"),
            "dim_equals_r_R_fraction": eq / n if n else None,
            "rank_gap_histogram": {str(k): gaps[k] for k in sorted(gaps)},
            "failures": self.failures,
            "caveat": CAVEAT,
        }

    @property
    def violations(self) -> list:
        return [r["trial"] for r in self.completed if not r["chain_ok"]]

    def to_json(self) -> dict:
        return {"config": self.config.to_json(), "aggregate": self.aggregate(), "trials": self.rows}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in CSV_COLUMNS})
        return buf.getvalue()


def _empty_row(trial: int, kind: str, label: str) -> dict:
    row = {k: None for k in CSV_COLUMNS}
    row.update(trial=trial, kind=kind, architecture=label)
    return row


def _dyadic_floor(x: float) -> Fraction:
    if x <= 0:
        return Fraction(0)
    k = 0
    while Fraction(1, 2**k) > x:
        k += 1
    return Fraction(1, 2**k)


def _sample_theta(rng, arch: Architecture, cfg: CampaignConfig) -> Parameter:
    nums = rng.integers(-cfg.theta_scale, cfg.theta_scale, size=arch.n_params, endpoint=True)
    return Parameter.from_theta(arch, [Fraction(int(n), cfg.theta_denom) for n in nums])


def _sample_batch(rng, param: Parameter, m: int, cfg: CampaignConfig):
    pts = []
    tries = 0
    while len(pts) < m and tries < cfg.max_point_tries:
        tries += 1
        g = rng.standard_normal(param.arch.input_dim) * cfg.point_spread
        z = tuple(Fraction(int(round(v * cfg.point_denom)), cfg.point_denom) for v in g)
        if z in pts or not is_parametrically_smooth(param, z):
            continue
        pts.append(z)
    return pts if len(pts) == m else None


def _finish_row(row: dict, bracket, dim: int, r_R: int, r_RR: int, rank_alpha):
    row.update(
        dim_ba_fun=dim, r_R=r_R, r_RR=r_RR, rank_alpha=rank_alpha,
        psi_lower=bracket.lower, psi_upper=bracket.upper, capacity=bracket.patterns.capacity,
        conjecture_support=bracket.lower == bracket.upper,
    )
    chain = dim <= bracket.lower <= bracket.upper <= r_RR and r_R <= r_RR
    if rank_alpha is not None:
        chain = chain and r_RR <= rank_alpha
    row["chain_ok"] = chain
    return row


def _network_trial(trial: int, cfg: CampaignConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, trial])
    arch = Architecture(cfg.architectures[trial % len(cfg.architectures)])
    row = _empty_row(trial, "network", str(arch))
    param = _sample_theta(rng, arch, cfg)
    row["D"] = param.D
    row["generic"] = layer_genericity_check(param).generic
    m = int(rng.integers(cfg.batch_min, cfg.batch_max, endpoint=True))
    row["m"] = m
    Z = _sample_batch(rng, param, m, cfg)
    if Z is None:
        row["failure"] = "non-smooth batch: no smooth points found within the sampling budget"
        return row
    try:
        profile = rank_profile(param, Z, RankConfig(cfg.rank_mode, cfg.rank_trials, seed=cfg.seed * 7919 + trial))
    except RankBudgetError as exc:
        row["failure"] = f"rank-mode budget: {exc}"
        return row
    except PathBudgetError as exc:
        row["failure"] = f"path budget: {exc}"
        return row
    radius = _dyadic_floor(activation_stable_radius(param, Z))
    if radius == 0:
        row["failure"] = "pattern boundary: no activation-stable radius"
        return row
    schedule = geometric_schedule(min(cfg.eps0, radius), cfg.eps_levels)
    row["eps_min"] = str(schedule[-1])
    fam = NetworkDifferences(param, Z)
    bracket = psi_bracket(fam, schedule, cfg.samples_per_level, profile.r_RR, seed=cfg.seed * 7919 + trial,
                          targeted=cfg.targeted)
    _finish_row(row, bracket, profile.dim_ba_fun, profile.r_R, profile.r_RR, profile.rank_alpha)
    row["chain_ok"] = row["chain_ok"] and profile.chain_ok
    return row


def _family_trial(trial: int, fam: PolyFamily, anchor, cfg: CampaignConfig) -> dict:
    row = _empty_row(trial, "family", fam.name or "custom")
    row.update(D=fam.D, m=fam.m)
    J = family_jacobian(fam)
    dim = rank_rational(J.evaluate(anchor)) if fam.m else 0
    try:
        r_R = max(r_R_rank(J, cfg.rank_mode, cfg.rank_trials, seed=cfg.seed * 7919 + trial), dim) if fam.m else 0
    except RankBudgetError as exc:
        row["failure"] = f"rank-mode budget: {exc}"
        return row
    r_RR = r_RR_rank(J) if fam.m else 0
    schedule = geometric_schedule(cfg.eps0, cfg.eps_levels)
    row["eps_min"] = str(schedule[-1])
    bracket = psi_bracket(PolyDifferences(fam, anchor), schedule, cfg.samples_per_level, r_RR,
                          seed=cfg.seed * 7919 + trial, targeted=cfg.targeted)
    return _finish_row(row, bracket, dim, r_R, r_RR, None)


def run_trial(trial: int, cfg: CampaignConfig) -> dict:
    """One reproducible trial; network trials first, then one per custom family."""
    if trial < cfg.trials:
        return _network_trial(trial, cfg)
    fam, anchor = cfg.families[trial - cfg.trials]
    return _family_trial(trial, fam, anchor, cfg)


def _run_indexed(args):
    trial, cfg = args
    return run_trial(trial, cfg)


def run_conjecture_campaign(cfg: CampaignConfig) -> CampaignReport:
    n = cfg.trials + len(cfg.families)
    jobs = [(t, cfg) for t in range(n)]
    if cfg.workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_indexed, jobs))
    else:
        rows = [_run_indexed(j) for j in jobs]
    return CampaignReport(cfg, rows)
