"""Persistent sign patterns of difference families and the shifting algorithm.

Sign patterns are tuples over ``{-1, +1}``.  A pattern counts as observed
only if some parameter inside the ball produced it under exact evaluation;
samples where any difference is exactly 0 are rejected.  Float evaluation
is used as a filter: entries whose sign is uncertain are recomputed in
exact rationals, so every recorded sign is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .family import PolyFamily, family_jacobian
from .linalg import row_space_basis
from .network import Parameter, exact_gradient, forward, sgn
from .poly import as_fraction

__all__ = [
    "DifferenceFamily",
    "NetworkDifferences",
    "PolyDifferences",
    "LevelPatterns",
    "SignPatternSet",
    "PsiBracket",
    "geometric_schedule",
    "sample_sign_patterns",
    "sample_schedule",
    "persistent_capacity",
    "shifting",
    "is_shattered",
    "shattered_subsets",
    "max_shattered_subset",
    "persistently_shattered_max",
    "psi_bracket",
    "sauer_bound",
    "sauer_check",
]

REL_TOL = 2.0**-30
SHRINK = 1.0 - 2.0**-20
WITNESS_SCALES = (0.5, 2.0**-4, 2.0**-8, 2.0**-12)
MAX_TARGET_BITS = 10

Pattern = tuple


# ----------------------------------------------------------------------
# difference families


class DifferenceFamily:
    """``theta -> F_theta(z_i) - F_anchor(z_i)`` over a fixed batch."""

    D: int
    m: int
    anchor: tuple

    def float_signs(self, thetas: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exact_differences(self, theta: Sequence[Fraction]) -> list[Fraction]:
        raise NotImplementedError

    def jacobian(self) -> list[list] | None:
        """Exact Jacobian of the family at the anchor, if available."""
        return None

    @property
    def anchor_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.anchor], dtype=np.float64)


class NetworkDifferences(DifferenceFamily):
    def __init__(self, param: Parameter, Z: Sequence[Sequence]):
        self.param = param.as_rational()
        self.Z = [tuple(as_fraction(v) for v in z) for z in Z]
        self.D = self.param.D
        self.m = len(self.Z)
        self.anchor = self.param.theta
        self._f0 = [forward(self.param, z)[0] for z in self.Z]
        self._widths = np.array(self.param.arch.widths, dtype=np.int64)
        self._points = np.array([[float(v) for v in z] for z in self.Z], dtype=np.float64).reshape(
            self.m, self.param.arch.input_dim)
        self._f0_float = np.array([float(v) for v in self._f0], dtype=np.float64)

    def float_signs(self, thetas):
        return kernels.relu_difference_signs(
            np.ascontiguousarray(thetas), self._points, self._widths, self._f0_float, REL_TOL)

    def exact_differences(self, theta):
        p = self.param.with_theta(theta)
        return [forward(p, z)[0] - f for z, f in zip(self.Z, self._f0)]

    def jacobian(self):
        return [exact_gradient(self.param, z) for z in self.Z]


class PolyDifferences(DifferenceFamily):
    def __init__(self, fam: PolyFamily, anchor: Sequence | None = None):
        self.fam = fam
        self.D = fam.D
        self.m = fam.m
        self.anchor = tuple(as_fraction(v) for v in (anchor if anchor is not None else [0] * fam.D))
        if len(self.anchor) != fam.D:
            raise ValueError(f"anchor must have length {fam.D}")
        self._f0 = fam.evaluate(self.anchor)
        exps, coefs, slots = [], [], []
        for p, poly in enumerate(fam.slots):
            for e, c in poly.items():
                exps.append(e)
                coefs.append(float(c))
                slots.append(p)
        self._exps = np.array(exps, dtype=np.int64).reshape(len(exps), fam.D)
        self._coefs = np.array(coefs, dtype=np.float64)
        self._slots = np.array(slots, dtype=np.int64)
        self._f0_float = np.array([float(v) for v in self._f0], dtype=np.float64)

    def float_signs(self, thetas):
        return kernels.poly_difference_signs(
            np.ascontiguousarray(thetas), self._exps, self._coefs, self._slots, self._f0_float, REL_TOL)

    def exact_differences(self, theta):
        return [v - f for v, f in zip(self.fam.evaluate(theta), self._f0)]

    def jacobian(self):
        if not self.fam.slots:
            return []
        return family_jacobian(self.fam).evaluate(self.anchor)


# ----------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class LevelPatterns:
    eps: Fraction
    patterns: frozenset
    n_samples: int
    n_rejected: int
    n_exact: int  # entries re-evaluated in exact arithmetic
    n_targeted: int = 0

    @property
    def rejection_rate(self) -> float:
        total = self.n_samples + self.n_targeted
        return self.n_rejected / total if total else 0.0

    def to_json(self) -> dict:
        return {
            "eps": str(self.eps),
            "n_patterns": len(self.patterns),
            "n_samples": self.n_samples,
            "n_targeted": self.n_targeted,
            "n_rejected": self.n_rejected,
            "n_exact": self.n_exact,
        }


@dataclass(frozen=True)
class SignPatternSet:
    m: int
    levels: tuple[LevelPatterns, ...]

    @property
    def persisted(self) -> frozenset:
        if not self.levels:
            return frozenset()
        out = set(self.levels[0].patterns)
        for lvl in self.levels[1:]:
            out &= lvl.patterns
        return frozenset(out)

    @property
    def capacity(self) -> int:
        return len(self.persisted)

    def persisted_counts(self) -> list[int]:
        """Size of the running intersection after each level."""
        counts, running = [], None
        for lvl in self.levels:
            running = set(lvl.patterns) if running is None else running & lvl.patterns
            counts.append(len(running))
        return counts


def geometric_schedule(eps0=1, levels: int = 6) -> list[Fraction]:
    eps0 = as_fraction(eps0)
    if eps0 <= 0 or levels < 1:
        raise ValueError("need eps0 > 0 and at least one level")
    return [eps0 / 2**k for k in range(levels)]


def _ball_offsets(rng: np.random.Generator, n: int, D: int, eps: float):
    """Uniform points of the open ball as dyadic rationals ``ints / 2**k``."""
    g = rng.standard_normal((n, D))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    r = rng.random(n) ** (1.0 / D)
    u = g / norms[:, None] * (r * SHRINK)[:, None]
    return _to_dyadic(u, eps)


def _to_dyadic(u: np.ndarray, eps: float):
    # resolution fixed relative to eps; |ints| <= 2**41
    k = 40 - math.floor(math.log2(eps))
    ints = np.rint(u * eps * 2.0**k).astype(np.int64)
    return ints, k


def _witness_directions(fam: DifferenceFamily) -> list[np.ndarray]:
    """Unit directions whose first-order image hits each sign vector.

    Targets every sign vector on a maximal independent set of Jacobian rows
    and, when the batch is small, every sign vector on the whole batch.
    """
    J = fam.jacobian()
    if not J or fam.m == 0:
        return []
    Jf = np.array([[float(v) for v in row] for row in J], dtype=np.float64)
    rows = row_space_basis(J)
    dirs = []
    targets = []
    if rows and len(rows) <= MAX_TARGET_BITS:
        pinv = np.linalg.pinv(Jf[rows])
        targets += [pinv @ np.array(s, dtype=np.float64) for s in product((-1.0, 1.0), repeat=len(rows))]
    if fam.m <= MAX_TARGET_BITS and len(rows) < fam.m:
        pinv = np.linalg.pinv(Jf)
        targets += [pinv @ np.array(s, dtype=np.float64) for s in product((-1.0, 1.0), repeat=fam.m)]
    for v in targets:
        n = np.linalg.norm(v)
        if n > 0:
            dirs.append(v / n)
    return dirs


def _classify(fam: DifferenceFamily, ints: np.ndarray, k: int):
    """Exact sign rows for the candidate offsets ``ints / 2**k``; None rows are rejected."""
    if ints.shape[0] == 0:
        return [], 0
    anchor = fam.anchor
    thetas = fam.anchor_float[None, :] + ints.astype(np.float64) / 2.0**k
    codes = fam.float_signs(thetas)
    rows = []
    n_exact = 0
    denom = 2**k
    for s in range(codes.shape[0]):
        row = codes[s]
        if row.all():
            rows.append(tuple(int(c) for c in row))
            continue
        theta = [a + Fraction(int(d), denom) for a, d in zip(anchor, ints[s])]
        diffs = fam.exact_differences(theta)
        n_exact += int(np.count_nonzero(row == 0))
        exact_row = tuple(sgn(v) for v in diffs)
        rows.append(exact_row if all(exact_row) else None)
    return rows, n_exact


def sample_sign_patterns(fam: DifferenceFamily, eps, n_samples: int, seed: int = 0, level: int = 0,
                         targeted: bool = False, _directions=None) -> LevelPatterns:
    """Distinct exact sign patterns realized by parameters in the open ``eps``-ball."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng([seed, level])
    ints, k = _ball_offsets(rng, n_samples, fam.D, float(eps))
    n_target = 0
    if targeted:
        dirs = _witness_directions(fam) if _directions is None else _directions
        if dirs:
            cand = np.array([d * c * SHRINK for d in dirs for c in WITNESS_SCALES])
            t_ints, _ = _to_dyadic(cand, float(eps))
            ints = np.vstack([ints, t_ints])
            n_target = t_ints.shape[0]
    rows, n_exact = _classify(fam, ints, k)
    patterns = frozenset(r for r in rows if r is not None)
    rejected = sum(1 for r in rows if r is None)
    return LevelPatterns(eps, patterns, n_samples, rejected, n_exact, n_target)


def sample_schedule(fam: DifferenceFamily, schedule: Sequence, n_per_level: int, seed: int = 0,
                    targeted: bool = False) -> SignPatternSet:
    sched = [as_fraction(e) for e in schedule]
    if not sched or any(e <= 0 for e in sched) or any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("schedule must be positive and strictly decreasing")
    dirs = _witness_directions(fam) if targeted else None
    levels = tuple(
        sample_sign_patterns(fam, e, n_per_level, seed, level, targeted, dirs)
        for level, e in enumerate(sched)
    )
    return SignPatternSet(fam.m, levels)


def persistent_capacity(fam: DifferenceFamily, schedule: Sequence, n_per_level: int, seed: int = 0,
                        targeted: bool = False) -> int:
    """Number of sign patterns seen at every level of the schedule."""
    return sample_schedule(fam, schedule, n_per_level, seed, targeted).capacity


# ----------------------------------------------------------------------
# shattering combinatorics


def shifting(patterns: Iterable[Pattern]) -> frozenset:
    """Down-shift until stable: flip a +1 to -1 whenever that creates no duplicate.

    Keeps the number of rows; every coordinate set shattered by the result
    was shattered by the input, and the +1 positions of each output row form
    a shattered set.
    """
    rows = set(tuple(r) for r in patterns)
    if not rows:
        return frozenset()
    m = len(next(iter(rows)))
    changed = True
    while changed:
        changed = False
        for i in range(m):
            for r in sorted(rows):
                if r[i] == 1:
                    s = r[:i] + (-1,) + r[i + 1:]
                    if s not in rows:
                        rows.discard(r)
                        rows.add(s)
                        changed = True
    return frozenset(rows)


def is_shattered(patterns: Iterable[Pattern], coords: Sequence[int]) -> bool:
    coords = tuple(coords)
    seen = {tuple(r[i] for i in coords) for r in patterns}
    return len(seen) == 2 ** len(coords)


def shattered_subsets(patterns: Iterable[Pattern], m: int | None = None) -> set[tuple[int, ...]]:
    """Every coordinate subset shattered by ``patterns`` (exhaustive)."""
    rows = [tuple(r) for r in patterns]
    if not rows:
        return set()
    m = len(rows[0]) if m is None else m
    out = {()}
    for k in range(1, m + 1):
        found = False
        for S in combinations(range(m), k):
            # shattering is hereditary: all (k-1)-subsets must be shattered
            if all(S[:i] + S[i + 1:] in out for i in range(k)) and is_shattered(rows, S):
                out.add(S)
                found = True
        if not found:
            break
    return out


def max_shattered_subset(patterns: Iterable[Pattern], exhaustive_limit: int = 1 << 16):
    """Largest shattered coordinate set: ``(size, witness)``.

    The shifted family gives a certified lower bound with its witness; larger
    sizes are then searched exhaustively while the number of candidate
    subsets stays under ``exhaustive_limit``.
    """
    rows = [tuple(r) for r in patterns]
    if not rows:
        return 0, ()
    m = len(rows[0])
    shifted = shifting(rows)
    best_row = max(sorted(shifted), key=lambda r: sum(1 for v in r if v == 1))
    witness = tuple(i for i, v in enumerate(best_row) if v == 1)
    size = len(witness)
    top = min(m, int(math.log2(len(rows))))
    for k in range(size + 1, top + 1):
        if math.comb(m, k) > exhaustive_limit:
            break
        hit = next((S for S in combinations(range(m), k) if is_shattered(rows, S)), None)
        if hit is None:
            break
        size, witness = k, hit
    return size, witness


def persistently_shattered_max(levels: Sequence[LevelPatterns], m: int, exhaustive_limit: int = 1 << 16):
    """Largest coordinate set shattered at every level (each level on its own)."""
    if not levels or m == 0:
        return 0, ()
    top = min(m, min(int(math.log2(len(l.patterns))) if l.patterns else 0 for l in levels))
    best = (0, ())
    if top == 0:
        return best
    if sum(math.comb(m, k) for k in range(1, top + 1)) > exhaustive_limit:
        return best
    for k in range(1, top + 1):
        hit = next(
            (S for S in combinations(range(m), k) if all(is_shattered(l.patterns, S) for l in levels)),
            None,
        )
        if hit is None:
            break
        best = (k, hit)
    return best


@dataclass(frozen=True)
class PsiBracket:
    lower: int
    upper: int
    witness: tuple[int, ...]
    patterns: SignPatternSet = field(repr=False)

    @property
    def certified(self) -> bool:
        return self.lower == self.upper

    def to_json(self) -> dict:
        return {
            "psi_lower": self.lower,
            "psi_upper": self.upper,
            "witness": list(self.witness),
            "capacity": self.patterns.capacity,
            "certified": self.certified,
            # per-level shattered size, so a gap to the persistent value is visible
            "levels": [dict(l.to_json(), max_shattered=max_shattered_subset(l.patterns)[0])
                       for l in self.patterns.levels],
        }


def psi_bracket(fam: DifferenceFamily, schedule: Sequence, n_per_level: int, rank_upper: int,
                seed: int = 0, targeted: bool = True) -> PsiBracket:
    """Bracket the size of the largest persistently pseudoshattered subset.

    ``lower`` is certified by observed shattering at every level, ``upper``
    is the supplied real row rank of the algebraic Jacobian.
    """
    sps = sample_schedule(fam, schedule, n_per_level, seed, targeted)
    size_a, wit_a = max_shattered_subset(sps.persisted)
    size_b, wit_b = persistently_shattered_max(sps.levels, fam.m)
    lower, witness = (size_a, wit_a) if size_a >= size_b else (size_b, wit_b)
    return PsiBracket(lower, int(rank_upper), tuple(witness), sps)


def sauer_bound(m: int, d: int) -> int:
    return sum(math.comb(m, i) for i in range(0, min(d, m) + 1))


def sauer_check(patterns: Iterable[Pattern], d: int, m: int | None = None) -> bool:
    """True iff the number of patterns is at most sum_{i<=d} C(m, i)."""
    if d < 0:
        raise ValueError("d must be >= 0")
    rows = {tuple(r) for r in patterns}
    if not rows:
        return True
    m = len(next(iter(rows))) if m is None else m
    return len(rows) <= sauer_bound(m, d)
