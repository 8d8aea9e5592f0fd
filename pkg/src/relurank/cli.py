"""Command line interface.

Exit codes: 0 success, 1 input error, 2 budget exceeded, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import analyze, profile_csv
from .campaign import CampaignConfig, run_conjecture_campaign
from .family import PolyFamily, family_jacobian
from .fiber import fiber_walk
from .fundim import RankConfig, rank_profile
from .io import InputError, _read_json, format_rational, load_batch, load_network
from .linalg import RankBudgetError, r_RR_rank
from .network import NonSmoothPointError
from .paths import PathBudgetError, enumerate_complete_paths, open_paths
from .shatter import NetworkDifferences, PolyDifferences, geometric_schedule, psi_bracket

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3


class InvariantViolation(RuntimeError):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    p.add_argument("--rank-mode", choices=["exact", "randomized"], default=argparse.SUPPRESS)
    p.add_argument("--number-mode", choices=["rational", "float64"], default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS, help="write output here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS)
    return p


GLOBAL_DEFAULTS = {"seed": 0, "rank_mode": "randomized", "number_mode": None, "out": None, "format": "json"}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="relurank", parents=[common],
                                     description="Local complexity measures for ReLU networks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="rank profile of a network on a batch")
    a.add_argument("network")
    a.add_argument("batch")
    a.add_argument("--genericity-cap", type=int, default=12)

    s = sub.add_parser("shatter", parents=[common], help="sampled bracket on persistent pseudodimension")
    s.add_argument("network", nargs="?")
    s.add_argument("batch", nargs="?")
    s.add_argument("--family", help="polynomial family JSON instead of a network")
    s.add_argument("--eps-start", default="1")
    s.add_argument("--eps-levels", type=int, default=6)
    s.add_argument("--samples-per-level", type=int, default=2000)
    s.add_argument("--no-targeted", action="store_true", help="uniform ball sampling only")

    c = sub.add_parser("conjecture", parents=[common], help="randomized campaign over architectures")
    c.add_argument("--config", help="campaign config JSON; flags below override it")
    c.add_argument("--arch", action="append", help="widths like 1,2,1 (repeatable)")
    c.add_argument("--trials", type=int)
    c.add_argument("--batch-min", type=int)
    c.add_argument("--batch-max", type=int)
    c.add_argument("--eps-start")
    c.add_argument("--eps-levels", type=int)
    c.add_argument("--samples-per-level", type=int)
    c.add_argument("--workers", type=int)
    c.add_argument("--family", action="append", help="polynomial family JSON (repeatable)")

    f = sub.add_parser("fiber-walk", parents=[common], help="random walk inside a batch fiber")
    f.add_argument("network")
    f.add_argument("batch")
    f.add_argument("--steps", type=int, default=20)
    f.add_argument("--step-size", type=float, default=1e-2)
    f.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("paths", parents=[common], help="complete path table and open masks")
    p.add_argument("network")
    p.add_argument("batch", nargs="?")
    return parser


def _rational_arg(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational number: {text!r}") from exc
    return v


def _load_family(path):
    data = _read_json(path)
    try:
        fam = PolyFamily.from_json(data)
        anchor = tuple(_rational_arg(str(v)) for v in data.get("anchor", [0] * fam.D))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed family file {path}: {exc}") from exc
    if len(anchor) != fam.D:
        raise InputError(f"anchor has length {len(anchor)}, expected {fam.D}")
    return fam, anchor


def _to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_analyze(args):
    report = analyze(args.network, args.batch, args.rank_mode, args.number_mode, args.seed, args.genericity_cap)
    text = profile_csv(report) if args.format == "csv" else None
    if not report["profile"]["chain_ok"]:
        raise InvariantViolation("rank chain violated", report)
    return report, text


def cmd_shatter(args):
    schedule = geometric_schedule(_rational_arg(args.eps_start), args.eps_levels)
    if args.family:
        fam_poly, anchor = _load_family(args.family)
        fam = PolyDifferences(fam_poly, anchor)
        upper = r_RR_rank(family_jacobian(fam_poly)) if fam_poly.m else 0
    else:
        if not (args.network and args.batch):
            raise InputError("shatter needs NETWORK BATCH or --family")
        param = load_network(args.network).as_rational()
        Z = load_batch(args.batch, param.arch.input_dim)
        fam = NetworkDifferences(param, Z)
        upper = rank_profile(param, Z, RankConfig(args.rank_mode, seed=args.seed)).r_RR
    bracket = psi_bracket(fam, schedule, args.samples_per_level, upper, args.seed, not args.no_targeted)
    report = bracket.to_json()
    report["persisted_counts"] = bracket.patterns.persisted_counts()
    text = None
    if args.format == "csv":
        rows = [[i, format_rational(l.eps), len(l.patterns), c, l.n_samples, l.n_rejected]
                for i, (l, c) in enumerate(zip(bracket.patterns.levels, report["persisted_counts"]))]
        text = _to_csv(["level", "eps", "patterns", "persisted", "samples", "rejected"], rows)
    if bracket.lower > bracket.upper:
        raise InvariantViolation("psi_lower exceeds r_RR", report)
    return report, text


def cmd_conjecture(args):
    data = _read_json(args.config) if args.config else {}
    try:
        cfg = CampaignConfig.from_json(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad campaign config: {exc}") from exc
    over = {}
    if args.arch:
        try:
            over["architectures"] = tuple(tuple(int(n) for n in a.split(",")) for a in args.arch)
        except ValueError as exc:
            raise InputError(f"bad --arch: {exc}") from exc
    for k in ("trials", "batch_min", "batch_max", "eps_levels", "samples_per_level", "workers"):
        if getattr(args, k) is not None:
            over[k] = getattr(args, k)
    if args.eps_start is not None:
        over["eps0"] = _rational_arg(args.eps_start)
    if args.family:
        over["families"] = cfg.families + tuple(_load_family(p) for p in args.family)
    over["seed"] = args.seed if args.seed_given else cfg.seed
    if args.rank_mode_given:
        over["rank_mode"] = args.rank_mode
    fields = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    fields.update(over)
    try:
        cfg = CampaignConfig(**fields)
    except ValueError as exc:
        raise InputError(f"bad campaign config: {exc}") from exc
    report = run_conjecture_campaign(cfg)
    text = report.to_csv() if args.format == "csv" else None
    payload = report.to_json()
    if report.violations:
        raise InvariantViolation(f"chain violated in trials {report.violations}", payload)
    return payload, text


def cmd_fiber_walk(args):
    param = load_network(args.network).as_rational()
    Z = load_batch(args.batch, param.arch.input_dim)
    rep = fiber_walk(param, Z, args.steps, args.step_size, args.tol, args.seed,
                     cfg=RankConfig(args.rank_mode, seed=args.seed))
    out = rep.to_json()
    text = None
    if args.format == "csv":
        rows = [[i + 1, r, d, k] for i, (r, d, k) in enumerate(zip(rep.residuals, rep.deviations, rep.ranks))]
        text = _to_csv(["step", "residual", "deviation", "rank"], rows)
    return out, text


def cmd_paths(args):
    param = load_network(args.network).as_rational()
    table = enumerate_complete_paths(param.arch)
    Z = load_batch(args.batch, param.arch.input_dim) if args.batch else []
    masks = [[bool(b) for b in open_paths(param, z, table)] for z in Z]
    out = {"architecture": list(param.arch.widths), "n_paths": len(table.paths),
           "paths": table.to_json(), "open_masks": masks}
    text = None
    if args.format == "csv":
        rows = [[i, p["start"], " ".join(map(str, p["edges"])), p["monomial"]] + [m[i] for m in masks]
                for i, p in enumerate(out["paths"])]
        text = _to_csv(["path", "start", "edges", "monomial"] + [f"z{j}" for j in range(len(Z))], rows)
    return out, text


COMMANDS = {
    "analyze": cmd_analyze,
    "shatter": cmd_shatter,
    "conjecture": cmd_conjecture,
    "fiber-walk": cmd_fiber_walk,
    "paths": cmd_paths,
}


def _emit(args, payload, text):
    if text is None:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed_given = hasattr(args, "seed")
    args.rank_mode_given = hasattr(args, "rank_mode")
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        payload, text = COMMANDS[args.command](args)
    except InvariantViolation as exc:
        if exc.payload is not None:
            _emit(args, exc.payload, None)
        print(f"error: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (RankBudgetError, PathBudgetError) as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, NonSmoothPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(args, payload, text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
