"""Exact rational linear algebra and ranks of matrices over Q[t1..tD].

Matrices over the rationals are plain nested sequences of ``Fraction`` (or
ints).  Ranks are decided exactly: rows are cleared of denominators and
reduced with Bareiss fraction-free elimination over Python integers.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .poly import PolyMatrix, SparsePoly, as_fraction, grlex_key

__all__ = [
    "RankBudgetError",
    "rank_rational",
    "rref",
    "null_space",
    "row_space_basis",
    "r_R_rank",
    "r_RR_rank",
    "poly_determinant",
    "minor_count",
    "flatten_rows",
    "IncrementalRowBasis",
]

DEFAULT_BOUND = 10**6
DEFAULT_TRIALS = 3
DEFAULT_MINOR_BUDGET = 10**5


class RankBudgetError(RuntimeError):
    """Exact minor enumeration would exceed the configured budget."""


def _integer_rows(M: Sequence[Sequence]) -> list[list[int]]:
    rows = []
    for row in M:
        fr = [as_fraction(v) for v in row]
        lcm = 1
        for v in fr:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        rows.append([int(v * lcm) for v in fr])
    return rows


def rank_rational(M: Sequence[Sequence]) -> int:
    """Exact rank of a rational matrix (Bareiss elimination on integer rows)."""
    A = [r for r in _integer_rows(M) if any(r)]
    if not A:
        return 0
    n_rows, n_cols = len(A), len(A[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        piv = next((r for r in range(rank, n_rows) if A[r][col]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][col]
        for r in range(rank + 1, n_rows):
            a = A[r][col]
            row_r, row_p = A[r], A[rank]
            for c in range(col + 1, n_cols):
                row_r[c] = (p * row_r[c] - a * row_p[c]) // prev
            row_r[col] = 0
        prev = p
        rank += 1
        if rank == n_rows:
            break
    return rank


def rref(M: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    A = [[as_fraction(v) for v in row] for row in M]
    if not A:
        return [], []
    n_rows, n_cols = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(n_rows):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return A[:r], pivots


def null_space(M: Sequence[Sequence], n_cols: int | None = None) -> list[list[Fraction]]:
    """Exact basis of the right kernel ``{v : M v = 0}``."""
    if n_cols is None:
        if not M:
            raise ValueError("n_cols is required for an empty matrix")
        n_cols = len(M[0])
    R, pivots = rref(M) if M else ([], [])
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for row, pc in zip(R, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def row_space_basis(M: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal set of linearly independent rows (greedy, in order)."""
    basis = IncrementalRowBasis(len(M[0]) if M else 0)
    return [i for i, row in enumerate(M) if basis.add(row)]


class IncrementalRowBasis:
    """Keeps an echelon basis so that independence of new rows is cheap to test."""

    def __init__(self, n_cols: int):
        self.n_cols = n_cols
        self._rows: dict[int, list[Fraction]] = {}  # pivot column -> normalized row

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, row: Sequence) -> list[Fraction]:
        v = [as_fraction(x) for x in row]
        for c in sorted(self._rows):
            if v[c]:
                f = v[c]
                v = [a - f * b for a, b in zip(v, self._rows[c])]
        return v

    def add(self, row: Sequence) -> bool:
        """Add ``row`` if it is independent of the current span; report whether it was."""
        v = self.reduce(row)
        piv = next((c for c, x in enumerate(v) if x), None)
        if piv is None:
            return False
        inv = 1 / v[piv]
        v = [x * inv for x in v]
        for c, r in self._rows.items():
            if r[piv]:
                f = r[piv]
                self._rows[c] = [a - f * b for a, b in zip(r, v)]
        self._rows[piv] = v
        return True


# ----------------------------------------------------------------------
# ranks over the polynomial ring


def minor_count(m: int, n: int) -> int:
    return sum(math.comb(m, r) * math.comb(n, r) for r in range(1, min(m, n) + 1))


def poly_determinant(M: Sequence[Sequence[SparsePoly]]) -> SparsePoly:
    """Symbolic determinant by Laplace expansion memoized over column subsets."""
    k = len(M)
    if k == 0:
        raise ValueError("empty matrix")
    if any(len(r) != k for r in M):
        raise ValueError("determinant needs a square matrix")
    nvars = M[0][0].nvars
    # det of rows 0..|S|-1 restricted to column set S (bitmask)
    dets: dict[int, SparsePoly] = {0: SparsePoly.constant(1, nvars)}
    for size in range(1, k + 1):
        row = M[size - 1]
        new: dict[int, SparsePoly] = {}
        for cols in combinations(range(k), size):
            mask = 0
            for c in cols:
                mask |= 1 << c
            acc = SparsePoly.zero(nvars)
            for pos, c in enumerate(cols):
                entry = row[c]
                if entry.is_zero():
                    continue
                sub = dets.get(mask & ~(1 << c))
                if sub is None or sub.is_zero():
                    continue
                term = entry * sub
                acc = acc + term if (size - 1 + pos) % 2 == 0 else acc - term
            new[mask] = acc
        dets = new
    return dets[(1 << k) - 1]


def _random_point(rng: np.random.Generator, nvars: int, bound: int) -> list[int]:
    return [int(v) for v in rng.integers(-bound, bound, size=nvars, endpoint=True)]


def _rank_at(M: PolyMatrix, point) -> int:
    return rank_rational(M.evaluate(point))


def r_R_rank(
    M: PolyMatrix,
    mode: str = "randomized",
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    bound: int = DEFAULT_BOUND,
    budget: int = DEFAULT_MINOR_BUDGET,
) -> int:
    """Rank of ``M`` over the polynomial ring (= determinantal rank).

    ``randomized``: max rank over ``trials`` integer evaluation points drawn
    from ``[-bound, bound]^D``; never exceeds the true value.
    ``exact``: largest ``r`` with a nonzero symbolic ``r x r`` minor.  A
    nonzero value of the minor at a random point already certifies a nonzero
    determinant, so the symbolic expansion only runs for minors that vanish
    there.
    """
    m, n = M.shape
    if m == 0 or n == 0:
        return 0
    if mode == "randomized":
        if trials < 1:
            raise ValueError("trials must be >= 1")
        best = 0
        top = min(m, n)
        for t in range(trials):
            rng = np.random.default_rng([seed, t])
            best = max(best, _rank_at(M, _random_point(rng, M.nvars, bound)))
            if best == top:
                break
        return best
    if mode != "exact":
        raise ValueError(f"unknown rank mode {mode!r}")
    count = minor_count(m, n)
    if count > budget:
        raise RankBudgetError(
            f"{count} minors exceed the exact-mode budget of {budget}; use randomized mode"
        )
    rng = np.random.default_rng([seed, 0x5EED])
    point = [Fraction(v) for v in _random_point(rng, M.nvars, bound)]
    values = M.evaluate(point)
    for r in range(min(m, n), 0, -1):
        for rows in combinations(range(m), r):
            for cols in combinations(range(n), r):
                sub_vals = [[values[i][j] for j in cols] for i in rows]
                if rank_rational(sub_vals) == r:
                    return r
                sub = [[M.entries[i][j] for j in cols] for i in rows]
                if not poly_determinant(sub).is_zero():
                    return r
    return 0


def flatten_rows(M: PolyMatrix) -> tuple[list[list[Fraction]], list[tuple[int, tuple[int, ...]]]]:
    """Coefficient vectors of the rows, indexed by (column, monomial).

    Monomials are the union over the whole matrix, in graded lex order.
    """
    monos = sorted({e for row in M.entries for p in row for e, _ in p.items()}, key=grlex_key)
    index = [(j, e) for j in range(M.cols) for e in monos]
    flat = [[row[j].coefficient(e) for j, e in index] for row in M.entries]
    return flat, index


def r_RR_rank(M: PolyMatrix) -> int:
    """Maximal number of rows of ``M`` linearly independent over the reals."""
    if M.rows == 0:
        return 0
    flat, index = flatten_rows(M)
    if not index:
        return 0
    return rank_rational(flat)
