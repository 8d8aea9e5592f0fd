"""Feedforward ReLU networks with exact-rational parameters.

Parameter vectors are unrolled layer by layer and, inside a layer, neuron by
neuron: the weight row of neuron ``j`` followed by its bias.  For the
architecture ``(1, 2, 1)`` this gives

    F(x) = t5*relu(t1*x + t2) + t6*relu(t3*x + t4) + t7.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .linalg import rank_rational
from .poly import as_fraction

__all__ = [
    "Architecture",
    "Parameter",
    "TernaryPattern",
    "LayerGenericity",
    "GenericityReport",
    "NonSmoothPointError",
    "forward",
    "ternary_label",
    "preactivations",
    "is_parametrically_smooth",
    "output_preactivation_zero",
    "exact_gradient",
    "layer_genericity_check",
    "activation_stable_radius",
    "sgn",
]

DEFAULT_GENERICITY_CAP = 12


class NonSmoothPointError(ValueError):
    """An input point lies on the fold set of a hidden neuron."""

    def __init__(self, index: int, pattern: "TernaryPattern | None" = None):
        self.index = index
        self.pattern = pattern
        super().__init__(f"point {index} is not parametrically smooth")


def sgn(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class Architecture:
    widths: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(n) for n in self.widths)
        object.__setattr__(self, "widths", w)
        if len(w) < 2:
            raise ValueError("an architecture needs an input and an output layer")
        if any(n < 1 for n in w):
            raise ValueError("all widths must be >= 1")
        if w[-1] != 1:
            raise ValueError("only networks with output dimension 1 are supported")

    @property
    def depth(self) -> int:
        return len(self.widths) - 1

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def n_params(self) -> int:
        w = self.widths
        return sum(w[l] * (w[l - 1] + 1) for l in range(1, len(w)))

    @property
    def n_hidden(self) -> int:
        return sum(self.widths[1:-1])

    def layer_offset(self, layer: int) -> int:
        """Index in theta of the first parameter of ``layer`` (1-based)."""
        w = self.widths
        return sum(w[l] * (w[l - 1] + 1) for l in range(1, layer))

    def weight_index(self, layer: int, j: int, i: int) -> int:
        """Position of W^layer[j, i] in theta (0-based j, i)."""
        return self.layer_offset(layer) + j * (self.widths[layer - 1] + 1) + i

    def bias_index(self, layer: int, j: int) -> int:
        return self.layer_offset(layer) + j * (self.widths[layer - 1] + 1) + self.widths[layer - 1]

    def __str__(self):
        w = self.widths
        return "(" + ",".join(map(str, w[:-1])) + "|" + str(w[-1]) + ")"


@dataclass(frozen=True)
class Parameter:
    arch: Architecture
    weights: tuple  # per layer: tuple of rows
    biases: tuple  # per layer: tuple
    number_mode: str = "rational"

    def __post_init__(self):
        if self.number_mode not in ("rational", "float64"):
            raise ValueError(f"unknown number mode {self.number_mode!r}")
        conv = as_fraction if self.number_mode == "rational" else float
        W = tuple(tuple(tuple(conv(v) for v in row) for row in layer) for layer in self.weights)
        b = tuple(tuple(conv(v) for v in layer) for layer in self.biases)
        widths = self.arch.widths
        if len(W) != self.arch.depth or len(b) != self.arch.depth:
            raise ValueError("number of layers does not match the architecture")
        for l in range(1, len(widths)):
            if len(W[l - 1]) != widths[l] or any(len(r) != widths[l - 1] for r in W[l - 1]):
                raise ValueError(f"weight matrix of layer {l} must be {widths[l]}x{widths[l - 1]}")
            if len(b[l - 1]) != widths[l]:
                raise ValueError(f"bias of layer {l} must have length {widths[l]}")
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "biases", b)

    @classmethod
    def from_theta(cls, arch: Architecture, theta: Sequence, number_mode: str = "rational") -> "Parameter":
        if len(theta) != arch.n_params:
            raise ValueError(f"theta has length {len(theta)}, architecture needs {arch.n_params}")
        W, b = [], []
        pos = 0
        w = arch.widths
        for l in range(1, len(w)):
            rows, bias = [], []
            for _ in range(w[l]):
                rows.append(tuple(theta[pos:pos + w[l - 1]]))
                bias.append(theta[pos + w[l - 1]])
                pos += w[l - 1] + 1
            W.append(tuple(rows))
            b.append(tuple(bias))
        return cls(arch, tuple(W), tuple(b), number_mode)

    @classmethod
    def zeros(cls, arch: Architecture) -> "Parameter":
        return cls.from_theta(arch, [0] * arch.n_params)

    @property
    def theta(self) -> tuple:
        out = []
        for Wl, bl in zip(self.weights, self.biases):
            for row, bj in zip(Wl, bl):
                out.extend(row)
                out.append(bj)
        return tuple(out)

    @property
    def D(self) -> int:
        return self.arch.n_params

    def with_theta(self, theta: Sequence) -> "Parameter":
        return Parameter.from_theta(self.arch, theta, self.number_mode)

    def as_rational(self) -> "Parameter":
        if self.number_mode == "rational":
            return self
        return Parameter(self.arch, self.weights, self.biases, "rational")


@dataclass(frozen=True)
class TernaryPattern:
    signs: tuple[tuple[int, ...], ...]

    @property
    def hidden(self) -> tuple[tuple[int, ...], ...]:
        return self.signs[:-1]

    def flat(self) -> tuple[int, ...]:
        return tuple(s for layer in self.signs for s in layer)

    def active_counts(self) -> list[int]:
        return [sum(1 for s in layer if s > 0) for layer in self.hidden]

    def __str__(self):
        sym = {1: "+", -1: "-", 0: "0"}
        return "|".join("".join(sym[s] for s in layer) for layer in self.signs)


def _check_input(param: Parameter, x: Sequence):
    if len(x) != param.arch.input_dim:
        raise ValueError(f"input has length {len(x)}, architecture expects {param.arch.input_dim}")


def _coerce_input(param: Parameter, x: Sequence):
    _check_input(param, x)
    if param.number_mode == "float64":
        return [float(v) for v in x]
    return [as_fraction(v) for v in x]


def preactivations(param: Parameter, x: Sequence) -> list[list]:
    """Pre-activation values of every layer (the last entry is the output)."""
    a = _coerce_input(param, x)
    out = []
    depth = param.arch.depth
    for l, (Wl, bl) in enumerate(zip(param.weights, param.biases), start=1):
        y = [sum((w * v for w, v in zip(row, a)), bj) for row, bj in zip(Wl, bl)]
        out.append(y)
        if l < depth:
            a = [v if v > 0 else v * 0 for v in y]
    return out


def forward(param: Parameter, x: Sequence):
    """Evaluate the network at ``x``; returns ``(output, ternary pattern)``."""
    ys = preactivations(param, x)
    pattern = TernaryPattern(tuple(tuple(sgn(v) for v in layer) for layer in ys))
    return ys[-1][0], pattern


def ternary_label(param: Parameter, x: Sequence) -> TernaryPattern:
    return forward(param, x)[1]


def is_parametrically_smooth(param: Parameter, x: Sequence) -> bool:
    # only hidden layers fold; the affine output layer never breaks smoothness
    pattern = ternary_label(param, x)
    return all(s != 0 for layer in pattern.hidden for s in layer)


def output_preactivation_zero(param: Parameter, x: Sequence) -> bool:
    return ternary_label(param, x).signs[-1][0] == 0


def exact_gradient(param: Parameter, x: Sequence) -> list:
    """Gradient of ``F_theta(x)`` with respect to theta, by backpropagation.

    At a smooth point this is the row of the batch Jacobian for ``x``.
    """
    arch = param.arch
    a = _coerce_input(param, x)
    acts = [a]
    masks = []
    depth = arch.depth
    for l, (Wl, bl) in enumerate(zip(param.weights, param.biases), start=1):
        y = [sum((w * v for w, v in zip(row, a)), bj) for row, bj in zip(Wl, bl)]
        if l < depth:
            mask = [1 if v > 0 else 0 for v in y]
            a = [v if m else v * 0 for v, m in zip(y, mask)]
            masks.append(mask)
            acts.append(a)
    zero = acts[0][0] * 0 if acts[0] else (Fraction(0) if param.number_mode == "rational" else 0.0)
    grad = [zero] * arch.n_params
    delta = [zero + 1]  # d output / d pre-activation of layer `depth`
    for l in range(depth, 0, -1):
        prev = acts[l - 1]
        for j, dj in enumerate(delta):
            if not dj:
                continue
            for i, v in enumerate(prev):
                grad[arch.weight_index(l, j, i)] = dj * v
            grad[arch.bias_index(l, j)] = dj
        if l > 1:
            Wl = param.weights[l - 1]
            mask = masks[l - 2]
            delta = [
                sum((Wl[j][i] * delta[j] for j in range(len(delta))), zero) if mask[i] else zero
                for i in range(len(prev))
            ]
    return grad


# ----------------------------------------------------------------------
# genericity of layer hyperplane arrangements


@dataclass(frozen=True)
class LayerGenericity:
    layer: int
    generic: bool
    violations: tuple[tuple[int, ...], ...] = ()
    skipped: bool = False


@dataclass(frozen=True)
class GenericityReport:
    layers: tuple[LayerGenericity, ...] = field(default_factory=tuple)

    @property
    def generic(self) -> bool:
        return all(l.generic for l in self.layers)

    @property
    def skipped(self) -> bool:
        return any(l.skipped for l in self.layers)

    def to_json(self) -> dict:
        return {
            "generic": self.generic,
            "layers": [
                {
                    "layer": l.layer,
                    "generic": l.generic,
                    "skipped": l.skipped,
                    "violations": [list(v) for v in l.violations],
                }
                for l in self.layers
            ],
        }


def layer_genericity_check(param: Parameter, cap: int = DEFAULT_GENERICITY_CAP) -> GenericityReport:
    """Check that every k-fold intersection of a layer's hyperplanes has codimension k.

    Subsets larger than the ambient dimension must have empty intersection.
    Layers wider than ``cap`` are reported as skipped.
    """
    p = param.as_rational()
    reports = []
    for l, (Wl, bl) in enumerate(zip(p.weights, p.biases), start=1):
        n_in, n_out = len(Wl[0]), len(Wl)
        if n_out > cap:
            reports.append(LayerGenericity(l, False, (), True))
            continue
        bad = []
        for k in range(1, n_out + 1):
            for S in combinations(range(n_out), k):
                normals = [list(Wl[i]) for i in S]
                rank_w = rank_rational(normals)
                if k <= n_in:
                    ok = rank_w == k
                else:
                    augmented = [list(Wl[i]) + [bl[i]] for i in S]
                    ok = rank_rational(augmented) > rank_w
                if not ok:
                    bad.append(S)
        reports.append(LayerGenericity(l, not bad, tuple(bad), False))
    return GenericityReport(tuple(reports))


def activation_stable_radius(param: Parameter, points: Sequence[Sequence], upper: float = 1.0,
                             iterations: int = 40) -> float:
    """Largest radius (found by bisection) on which no hidden sign changes.

    Uses interval arithmetic over the box ``theta ± r``, which contains the
    ball of radius ``r``; float64 with a small safety margin.  Returns 0.0 if
    some point is not smooth.
    """
    import numpy as np

    theta = np.array([float(v) for v in param.theta])
    arch = param.arch
    pts = [np.array([float(v) for v in z]) for z in points]

    def stable(r: float) -> bool:
        lo_t, hi_t = theta - r, theta + r
        for z in pts:
            lo_a, hi_a = z.copy(), z.copy()
            for l in range(1, arch.depth):
                n_in, n_out = arch.widths[l - 1], arch.widths[l]
                new_lo, new_hi = np.empty(n_out), np.empty(n_out)
                for j in range(n_out):
                    s_lo = s_hi = 0.0
                    for i in range(n_in):
                        k = arch.weight_index(l, j, i)
                        cands = (lo_t[k] * lo_a[i], lo_t[k] * hi_a[i], hi_t[k] * lo_a[i], hi_t[k] * hi_a[i])
                        s_lo += min(cands)
                        s_hi += max(cands)
                    k = arch.bias_index(l, j)
                    s_lo += lo_t[k]
                    s_hi += hi_t[k]
                    slack = 1e-9 * (abs(s_lo) + abs(s_hi) + 1.0)
                    if s_lo - slack <= 0.0 <= s_hi + slack:
                        return False
                    new_lo[j], new_hi[j] = max(s_lo, 0.0), max(s_hi, 0.0)
                lo_a, hi_a = new_lo, new_hi
        return True

    if not all(is_parametrically_smooth(param, z) for z in points):
        return 0.0
    if arch.depth == 1 or stable(upper):
        return upper
    lo, hi = 0.0, upper
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo
