"""Numerical checks of batch-fiber geometry.

Near a parameter in the real rank stable set, the evaluation map on a batch
is constant to first order along the Jacobian kernel, the set of parameters
with the same batch outputs is a smooth slice of dimension ``D - rank``, and
loss gradients stay in the Jacobian row space.  The functions here test each
of these statements on concrete networks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fundim import RankConfig, numeric_jacobian, real_rank_stability_check
from .linalg import null_space, rank_rational, row_space_basis, rref
from .network import NonSmoothPointError, Parameter, exact_gradient, forward, is_parametrically_smooth, ternary_label
from .paths import algebraic_evaluation
from .poly import SparsePoly, as_fraction

__all__ = [
    "PatternChangedError",
    "FiberWalkReport",
    "evaluation_map",
    "jacobian_null_space",
    "constancy_deviations",
    "constancy_order_check",
    "fiber_walk",
    "rowspace_residual_vector",
    "gradient_rowspace_check",
]


class PatternChangedError(RuntimeError):
    """Every trial step left the activation region of some batch point."""


def _smooth_or_raise(param, Z):
    for i, z in enumerate(Z):
        if not is_parametrically_smooth(param, z):
            raise NonSmoothPointError(i, ternary_label(param, z))


def evaluation_map(param: Parameter, Z: Sequence[Sequence]) -> list:
    return [forward(param, z)[0] for z in Z]


def jacobian_null_space(param: Parameter, Z: Sequence[Sequence]) -> list[list[Fraction]]:
    """Exact basis of the kernel of the batch Jacobian at theta."""
    param = param.as_rational()
    _smooth_or_raise(param, Z)
    D = param.D
    if not Z:
        return [[Fraction(int(i == j)) for j in range(D)] for i in range(D)]
    return null_space(numeric_jacobian(param, Z), D)


def _patterns(param, Z):
    # hidden signs only; the output sign may legitimately sit at 0 on the fiber
    return [ternary_label(param, z).hidden for z in Z]


def constancy_deviations(param: Parameter, Z, v: Sequence, t_grid: Sequence) -> list[tuple[Fraction, Fraction | None]]:
    """``(t, max_i |E_i(theta + t v) - E_i(theta)|)``; None where a pattern changed."""
    param = param.as_rational()
    theta = param.theta
    v = [as_fraction(x) for x in v]
    base = _patterns(param, Z)
    e0 = evaluation_map(param, Z)
    out = []
    for t in t_grid:
        t = as_fraction(t)
        moved = param.with_theta([a + t * b for a, b in zip(theta, v)])
        if _patterns(moved, Z) != base:
            out.append((t, None))
            continue
        e = evaluation_map(moved, Z)
        out.append((t, max((abs(a - b) for a, b in zip(e, e0)), default=Fraction(0))))
    return out


def constancy_order_check(param: Parameter, Z, v: Sequence,
                          t_grid: Sequence = (Fraction(1, 100), Fraction(1, 1000)),
                          slack: float = 1.5) -> bool:
    """Ratio test for second-order constancy of the batch outputs along ``v``.

    ``C`` is fitted as ``dev(t_max) / t_max**2`` and every smaller step must
    satisfy ``dev(t) <= slack * C * t**2``.
    """
    devs = [(t, d) for t, d in constancy_deviations(param, Z, v, sorted(t_grid, reverse=True)) if d is not None]
    if not devs:
        raise PatternChangedError("activation pattern changed at every trial step")
    if all(d == 0 for _, d in devs):
        return True
    if len(devs) < 2:
        raise PatternChangedError("need at least two admissible steps for the ratio test")
    t_max, d_max = devs[0]
    C = d_max / t_max**2
    return all(d <= Fraction(slack) * C * t * t for t, d in devs[1:])


@dataclass
class FiberWalkReport:
    steps_requested: int
    steps_taken: int = 0
    max_deviation: float = 0.0
    residuals: list = field(default_factory=list)  # final GN residual per step
    deviations: list = field(default_factory=list)  # exact max |E_Z - E_Z(theta0)| per step
    ranks: list = field(default_factory=list)
    error: str | None = None
    theta_final: tuple | None = None

    @property
    def completed(self) -> bool:
        return self.error is None and self.steps_taken == self.steps_requested

    def to_json(self) -> dict:
        return {
            "steps_requested": self.steps_requested,
            "steps_taken": self.steps_taken,
            "completed": self.completed,
            "max_deviation": self.max_deviation,
            "residuals": self.residuals,
            "deviations": self.deviations,
            "ranks": self.ranks,
            "error": self.error,
        }


def _float_param(param: Parameter, theta) -> Parameter:
    return Parameter.from_theta(param.arch, [float(v) for v in theta], "float64")


def _float_eval(param, theta, Z):
    p = _float_param(param, theta)
    return np.array([forward(p, z)[0] for z in Z], dtype=np.float64)


def _float_jac(param, theta, Z):
    p = _float_param(param, theta)
    return np.array([exact_gradient(p, z) for z in Z], dtype=np.float64)


def fiber_walk(param: Parameter, Z: Sequence[Sequence], steps: int = 20, step_size: float = 1e-2,
               tol: float = 1e-9, seed: int = 0, max_iter: int = 50,
               cfg: RankConfig = RankConfig()) -> FiberWalkReport:
    """Random walk inside the batch fiber of theta.

    Each step moves along a random unit kernel direction of the Jacobian and
    then runs Gauss-Newton back onto the level set ``E_Z = E_Z(theta0)``.
    Activation patterns and the Jacobian rank are re-verified exactly after
    every step; the first failure truncates the walk and is reported.
    """
    param = param.as_rational()
    _smooth_or_raise(param, Z)
    report = FiberWalkReport(steps)
    if not real_rank_stability_check(param, Z, cfg):
        report.error = "theta is not in the real rank stable set for Z"
        return report
    Zf = [[float(v) for v in z] for z in Z]
    base = _patterns(param, Z)
    e0 = evaluation_map(param, Z)
    e0f = np.array([float(v) for v in e0])
    r = rank_rational(numeric_jacobian(param, Z)) if Z else 0
    rng = np.random.default_rng([seed, 0xF1BE])
    theta = np.array([float(v) for v in param.theta])
    report.theta_final = tuple(param.theta)
    for _ in range(steps):
        if not Z:
            cand = theta + step_size * _unit(rng.standard_normal(param.D))
            res_norm = 0.0
        else:
            J = _float_jac(param, theta, Zf)
            _, _, vt = np.linalg.svd(J)
            kernel = vt[r:]
            if kernel.shape[0] == 0:
                report.error = "Jacobian has full column rank; the fiber is a point"
                break
            direction = _unit(rng.standard_normal(kernel.shape[0]) @ kernel)
            cand = theta + step_size * direction
            res_norm = math.inf
            for _ in range(max_iter):
                res = _float_eval(param, cand, Zf) - e0f
                res_norm = float(np.max(np.abs(res)))
                if res_norm <= tol:
                    break
                Jc = _float_jac(param, cand, Zf)
                cand = cand - np.linalg.lstsq(Jc, res, rcond=None)[0]
            else:
                res = _float_eval(param, cand, Zf) - e0f
                res_norm = float(np.max(np.abs(res)))
            if res_norm > tol:
                report.error = f"Gauss-Newton did not converge (residual {res_norm:.3e})"
                break
        exact = param.with_theta([Fraction(float(v)) for v in cand])
        if _patterns(exact, Z) != base:
            report.error = "activation pattern changed; walk truncated"
            break
        rank_t = rank_rational([exact_gradient(exact, z) for z in Z]) if Z else 0
        if rank_t != r:
            report.error = f"Jacobian rank changed from {r} to {rank_t}"
            break
        dev = max((abs(a - b) for a, b in zip(evaluation_map(exact, Z), e0)), default=Fraction(0))
        theta = cand
        report.steps_taken += 1
        report.residuals.append(res_norm)
        report.deviations.append(float(dev))
        report.ranks.append(rank_t)
        report.max_deviation = max(report.max_deviation, float(dev))
        report.theta_final = tuple(exact.theta)
    return report


def _unit(v):
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def rowspace_residual_vector(param: Parameter, Z: Sequence[Sequence], labels: Sequence) -> list[Fraction]:
    """Component of the squared-loss gradient orthogonal to the Jacobian row space.

    The gradient is taken by formally differentiating the loss polynomial
    ``(1/2m) * sum (E^R_{z_i} - y_i)^2`` and evaluating at theta, which does
    not route through the Jacobian rows themselves.
    """
    param = param.as_rational()
    _smooth_or_raise(param, Z)
    if len(labels) != len(Z):
        raise ValueError("need one label per batch point")
    D = param.D
    if not Z:
        return [Fraction(0)] * D
    m = len(Z)
    y = [as_fraction(v) for v in labels]
    loss = SparsePoly.zero(D)
    for e, yi in zip(algebraic_evaluation(param, Z), y):
        diff = e - yi
        loss = loss + diff * diff
    loss = loss * Fraction(1, 2 * m)
    theta = param.theta
    g = [loss.partial(i).evaluate(theta) for i in range(D)]
    J = numeric_jacobian(param, Z)
    B = [J[i] for i in row_space_basis(J)]
    if not B:
        return g
    gram = [[sum(a * b for a, b in zip(ri, rj)) for rj in B] for ri in B]
    rhs = [sum(a * b for a, b in zip(ri, g)) for ri in B]
    sol, _ = rref([row + [c] for row, c in zip(gram, rhs)])
    coeffs = [row[-1] for row in sol]
    proj = [sum(c * row[k] for c, row in zip(coeffs, B)) for k in range(D)]
    return [a - b for a, b in zip(g, proj)]


def gradient_rowspace_check(param: Parameter, Z: Sequence[Sequence], labels: Sequence):
    """Norm of the off-row-space part of the loss gradient (exactly 0 in rational mode)."""
    res = rowspace_residual_vector(param, Z, labels)
    sq = sum(v * v for v in res)
    if sq == 0:
        return Fraction(0)
    return math.sqrt(sq)
