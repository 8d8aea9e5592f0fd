"""JSON formats for networks and batches.

Network::

    {"architecture": [1, 2, 1],
     "weights": [[["1"], ["1"]], [["1", "1"]]],
     "biases": [["0", "-1"], ["0"]],
     "number_mode": "rational"}

Batch::

    {"points": [["-1"], ["1/2"], ["3/2"]]}

Rationals are written as ``"p/q"`` strings; ints are accepted on input.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .network import Architecture, Parameter
from .poly import as_fraction

__all__ = [
    "InputError",
    "parse_rational",
    "parse_float",
    "format_rational",
    "network_from_json",
    "network_to_json",
    "load_network",
    "save_network",
    "batch_from_json",
    "load_batch",
    "batch_to_json",
]


class InputError(ValueError):
    """Malformed or unsupported input file."""


def parse_rational(value) -> Fraction:
    if isinstance(value, bool):
        raise InputError(f"not a number: {value!r}")
    if isinstance(value, float):
        raise InputError(f"floats are not exact; write {value!r} as a 'p/q' string")
    try:
        return as_fraction(value)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def parse_float(value) -> float:
    """float64 mode: JSON floats pass through, anything else goes via an exact rational."""
    if isinstance(value, float):
        return value
    return float(parse_rational(value))


def format_rational(v) -> str:
    if isinstance(v, float):
        return repr(v)
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def network_from_json(data: dict) -> Parameter:
    try:
        widths = [int(n) for n in data["architecture"]]
        mode = data.get("number_mode", "rational")
        raw_w, raw_b = data["weights"], data["biases"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"network file is missing or has a malformed field: {exc}") from exc
    if not widths or widths[-1] != 1:
        raise InputError("only networks with output dimension 1 are supported (n_d must equal 1)")
    if mode not in ("rational", "float64"):
        raise InputError(f"unknown number_mode {mode!r}")
    conv = parse_rational if mode == "rational" else parse_float
    try:
        W = [[[conv(v) for v in row] for row in layer] for layer in raw_w]
        b = [[conv(v) for v in layer] for layer in raw_b]
        return Parameter(Architecture(tuple(widths)), W, b, mode)
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def network_to_json(param: Parameter) -> dict:
    return {
        "architecture": list(param.arch.widths),
        "weights": [[[format_rational(v) for v in row] for row in layer] for layer in param.weights],
        "biases": [[format_rational(v) for v in layer] for layer in param.biases],
        "number_mode": param.number_mode,
    }


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def load_network(path) -> Parameter:
    return network_from_json(_read_json(path))


def save_network(param: Parameter, path) -> None:
    Path(path).write_text(json.dumps(network_to_json(param), indent=2) + "\n")


def batch_from_json(data: dict, input_dim: int | None = None, number_mode: str = "rational") -> list[tuple]:
    try:
        pts = data["points"]
    except (KeyError, TypeError) as exc:
        raise InputError("batch file needs a 'points' list") from exc
    conv = parse_rational if number_mode == "rational" else parse_float
    out = []
    for i, p in enumerate(pts):
        if not isinstance(p, (list, tuple)):
            p = [p]
        if input_dim is not None and len(p) != input_dim:
            raise InputError(f"point {i} has length {len(p)}, expected {input_dim}")
        out.append(tuple(conv(v) for v in p))
    return out


def batch_to_json(points) -> dict:
    return {"points": [[format_rational(v) for v in p] for p in points]}


def load_batch(path, input_dim: int | None = None, number_mode: str = "rational") -> list[tuple]:
    return batch_from_json(_read_json(path), input_dim, number_mode)
