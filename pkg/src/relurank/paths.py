"""Complete paths of the augmented computational graph and what they compute.

Each non-output layer ``l`` gets one extra *bias vertex* whose outgoing edges
carry the biases of layer ``l+1``.  A complete path ends at the output and
starts at an input vertex or a bias vertex; its monomial is the product of
the parameters on its edges.  At a parametrically smooth point the network
is the sum of the monomials of its open paths (all hidden neurons active),
with input-started paths weighted by the matching input coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod
from typing import Sequence

from .linalg import rank_rational
from .network import (
    Architecture,
    NonSmoothPointError,
    Parameter,
    is_parametrically_smooth,
    ternary_label,
)
from .poly import PolyMatrix, SparsePoly, as_fraction

__all__ = [
    "AugmentedGraph",
    "CompletePath",
    "PathTable",
    "ActivationMatrixPair",
    "PathBudgetError",
    "augmented_graph",
    "enumerate_complete_paths",
    "path_count",
    "open_paths",
    "open_path_count",
    "algebraic_representation",
    "composed_representation",
    "algebraic_evaluation",
    "algebraic_jacobian",
    "activation_matrix",
    "verify_path_factorization",
]

DEFAULT_PATH_CAP = 10**6


class PathBudgetError(RuntimeError):
    """The architecture has more complete paths than the configured cap."""


@dataclass(frozen=True)
class AugmentedGraph:
    arch: Architecture

    @property
    def vertex_counts(self) -> tuple[int, ...]:
        return self.arch.widths

    @property
    def bias_layers(self) -> range:
        return range(self.arch.depth)

    def edge_param(self, layer: int, src: int | None, dst: int) -> int:
        """Parameter index on the edge into ``(layer, dst)``; ``src=None`` is the bias vertex of ``layer-1``."""
        if src is None:
            return self.arch.bias_index(layer, dst)
        return self.arch.weight_index(layer, dst, src)


def augmented_graph(arch: Architecture) -> AugmentedGraph:
    return AugmentedGraph(arch)


@dataclass(frozen=True)
class CompletePath:
    start_layer: int  # layer of the first vertex
    input_index: int | None  # input coordinate, or None for a bias-started path
    vertices: tuple[int, ...]  # ordinary vertex indices in layers start_layer+1 .. d
    edges: tuple[int, ...]  # parameter indices along the path
    monomial: SparsePoly

    @property
    def bias_started(self) -> bool:
        return self.input_index is None

    def hidden_neurons(self) -> list[tuple[int, int]]:
        """(layer, index) of the hidden neurons on the path, layers 1-based."""
        d = len(self.vertices) + self.start_layer
        return [(self.start_layer + 1 + k, v) for k, v in enumerate(self.vertices) if self.start_layer + 1 + k < d]

    def label(self) -> str:
        src = f"x{self.input_index + 1}" if self.input_index is not None else f"b@{self.start_layer}"
        return src + "->" + "->".join(map(str, self.vertices))


@dataclass(frozen=True)
class PathTable:
    arch: Architecture
    paths: tuple[CompletePath, ...]

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    @property
    def monomials(self) -> list[SparsePoly]:
        return [p.monomial for p in self.paths]

    def to_json(self) -> list[dict]:
        return [
            {
                "start": "input" if p.input_index is not None else "bias",
                "start_layer": p.start_layer,
                "input_index": p.input_index,
                "vertices": list(p.vertices),
                "edges": [e + 1 for e in p.edges],
                "monomial": p.monomial.to_text(),
            }
            for p in self.paths
        ]


def path_count(arch: Architecture) -> int:
    w = arch.widths
    d = arch.depth
    return prod(w) + sum(prod(w[j + 1:]) for j in range(d))


def enumerate_complete_paths(arch: Architecture, cap: int = DEFAULT_PATH_CAP) -> PathTable:
    """All complete paths, ordered by start (inputs, then bias vertices by layer) and vertex sequence."""
    total = path_count(arch)
    if total > cap:
        raise PathBudgetError(f"{total} complete paths exceed the cap of {cap}")
    w = arch.widths
    d = arch.depth
    D = arch.n_params
    g = AugmentedGraph(arch)
    paths = []

    def build(start_layer, input_index, verts):
        edges = []
        prev = input_index
        for k, v in enumerate(verts):
            layer = start_layer + 1 + k
            edges.append(g.edge_param(layer, prev, v))
            prev = v
        exps = [0] * D
        for e in edges:
            exps[e] += 1
        mono = SparsePoly.monomial(exps)
        return CompletePath(start_layer, input_index, tuple(verts), tuple(edges), mono)

    for i in range(w[0]):
        for verts in product(*(range(n) for n in w[1:])):
            paths.append(build(0, i, verts))
    for j in range(d):
        for verts in product(*(range(n) for n in w[j + 1:])):
            paths.append(build(j, None, verts))
    return PathTable(arch, tuple(paths))


def _table(param_or_arch, table):
    if table is not None:
        return table
    arch = param_or_arch.arch if isinstance(param_or_arch, Parameter) else param_or_arch
    return enumerate_complete_paths(arch)


def open_paths(param: Parameter, x: Sequence, table: PathTable | None = None) -> list[bool]:
    """Mask over the path table: open iff every hidden neuron on it has positive pre-activation."""
    table = _table(param, table)
    signs = ternary_label(param, x).signs
    return [all(signs[l - 1][v] > 0 for l, v in p.hidden_neurons()) for p in table.paths]


def open_path_count(arch: Architecture, active: Sequence[int]) -> int:
    """Number of open complete paths from per-hidden-layer active counts."""
    w = arch.widths
    d = arch.depth
    layer_sizes = list(active) + [w[d]]  # layers 1..d
    total = w[0] * prod(layer_sizes)
    for j in range(d):
        total += prod(layer_sizes[j:])
    return total


def _require_smooth(param: Parameter, Z: Sequence[Sequence]):
    for i, z in enumerate(Z):
        if not is_parametrically_smooth(param, z):
            raise NonSmoothPointError(i, ternary_label(param, z))


def algebraic_representation(param: Parameter, x: Sequence, table: PathTable | None = None) -> SparsePoly:
    """The polynomial in (theta, x) representing the network near (theta, x).

    Variables are ``t1..tD`` followed by ``x1..x_{n0}``.
    """
    param = param.as_rational()
    _require_smooth(param, [x])
    table = _table(param, table)
    D, n0 = param.D, param.arch.input_dim
    N = D + n0
    mask = open_paths(param, x, table)
    total = SparsePoly.zero(N)
    for p, is_open in zip(table.paths, mask):
        if not is_open:
            continue
        m = p.monomial.extend(N)
        if p.input_index is not None:
            m = m * SparsePoly.variable(D + p.input_index, N)
        total = total + m
    return total


def composed_representation(param: Parameter, x: Sequence) -> SparsePoly:
    """Same polynomial as :func:`algebraic_representation`, built by composing layers.

    The active mask at ``x`` picks which neurons pass their affine polynomial
    through; no path enumeration is needed, so this also serves large nets.
    """
    param = param.as_rational()
    _require_smooth(param, [x])
    arch = param.arch
    D, n0 = arch.n_params, arch.input_dim
    N = D + n0
    signs = ternary_label(param, x).signs
    a = [SparsePoly.variable(D + i, N) for i in range(n0)]
    for l in range(1, arch.depth + 1):
        y = []
        for j in range(arch.widths[l]):
            acc = SparsePoly.variable(arch.bias_index(l, j), N)
            for i, ai in enumerate(a):
                if ai:
                    acc = acc + SparsePoly.variable(arch.weight_index(l, j, i), N) * ai
            y.append(acc)
        if l < arch.depth:
            a = [yj if signs[l - 1][j] > 0 else SparsePoly.zero(N) for j, yj in enumerate(y)]
        else:
            a = y
    return a[0]


def algebraic_evaluation(param: Parameter, Z: Sequence[Sequence], table: PathTable | None = None,
                         composed: bool = False) -> list[SparsePoly]:
    """``E^R_{z_i}(theta)`` for every point: the representation with x set to ``z_i``."""
    param = param.as_rational()
    _require_smooth(param, Z)
    if composed:
        return [composed_representation(param, z).substitute_tail(z) for z in Z]
    table = _table(param, table) if Z else table
    return [algebraic_representation(param, z, table).substitute_tail(z) for z in Z]


def algebraic_jacobian(param: Parameter, Z: Sequence[Sequence], table: PathTable | None = None,
                       composed: bool = False) -> PolyMatrix:
    """Formal ``|Z| x D`` Jacobian of the algebraic evaluation map."""
    evals = algebraic_evaluation(param, Z, table, composed)
    return PolyMatrix([p.gradient() for p in evals], param.D)


@dataclass(frozen=True)
class ActivationMatrixPair:
    algebraic: PolyMatrix  # entries 0, 1 or x_j, in Q[x_1..x_{n0}]
    real: list  # rows substituted at their points

    @property
    def rank(self) -> int:
        return rank_rational(self.real) if self.real else 0


def activation_matrix(param: Parameter, Z: Sequence[Sequence], table: PathTable | None = None) -> ActivationMatrixPair:
    param = param.as_rational()
    _require_smooth(param, Z)
    table = _table(param, table)
    n0 = param.arch.input_dim
    one = SparsePoly.constant(1, n0)
    zero = SparsePoly.zero(n0)
    xs = [SparsePoly.variable(j, n0) for j in range(n0)]
    alg_rows, real_rows = [], []
    for z in Z:
        mask = open_paths(param, z, table)
        alg, real = [], []
        for p, is_open in zip(table.paths, mask):
            if not is_open:
                alg.append(zero)
                real.append(Fraction(0))
            elif p.input_index is None:
                alg.append(one)
                real.append(Fraction(1))
            else:
                alg.append(xs[p.input_index])
                real.append(as_fraction(z[p.input_index]))
        alg_rows.append(alg)
        real_rows.append(real)
    return ActivationMatrixPair(PolyMatrix(alg_rows, n0) if alg_rows else PolyMatrix([], n0), real_rows)


def verify_path_factorization(param: Parameter, Z: Sequence[Sequence], table: PathTable | None = None) -> bool:
    """Check ``alpha^R(theta, Z) * Gamma``, evaluated row-wise at Z, against the composed E^R_Z."""
    param = param.as_rational()
    table = _table(param, table)
    D, n0 = param.D, param.arch.input_dim
    N = D + n0
    pair = activation_matrix(param, Z, table)
    gamma = [m.extend(N) for m in table.monomials]
    expected = algebraic_evaluation(param, Z, composed=True)
    for i, z in enumerate(Z):
        row = SparsePoly.zero(N)
        for a, g in zip(pair.algebraic.entries[i], gamma):
            if a:
                row = row + a.extend(N, offset=D) * g
        if row.substitute_tail(z) != expected[i]:
            return False
    return True
