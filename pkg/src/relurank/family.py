"""Globally polynomial parameterized families given slot by slot.

A :class:`PolyFamily` lists, for each batch point, the polynomial in theta
that the family outputs there.  This lets families that are not ReLU
networks go through the same rank and shattering code.

JSON form::

    {"D": 3, "slots": ["t1", "t2", "t3", "t3-t1^2+t2^2"]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .paths import algebraic_evaluation
from .poly import PolyMatrix, SparsePoly, as_fraction, parse_poly

__all__ = [
    "PolyFamily",
    "family_jacobian",
    "family_difference_eval",
    "rank_gap_example",
    "load_family",
]


@dataclass(frozen=True)
class PolyFamily:
    D: int
    slots: tuple[SparsePoly, ...]
    name: str = ""

    def __post_init__(self):
        slots = tuple(self.slots)
        for p in slots:
            if p.nvars != self.D:
                raise ValueError(f"slot polynomial has arity {p.nvars}, family has D={self.D}")
        object.__setattr__(self, "slots", slots)

    @property
    def m(self) -> int:
        return len(self.slots)

    def evaluate(self, theta: Sequence) -> list:
        return [p.evaluate(theta) for p in self.slots]

    @classmethod
    def from_strings(cls, D: int, slots: Sequence[str], name: str = "") -> "PolyFamily":
        return cls(D, tuple(parse_poly(s, D) for s in slots), name)

    @classmethod
    def from_json(cls, data: dict) -> "PolyFamily":
        return cls.from_strings(int(data["D"]), data["slots"], data.get("name", ""))

    def to_json(self) -> dict:
        out = {"D": self.D, "slots": [p.to_text() for p in self.slots]}
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_network(cls, param, Z: Sequence[Sequence]) -> "PolyFamily":
        """Freeze a network's activation regions at Z into a one-piece family."""
        return cls(param.D, tuple(algebraic_evaluation(param, Z)), "network-region")


def family_jacobian(fam: PolyFamily) -> PolyMatrix:
    if not fam.slots:
        return PolyMatrix([], fam.D)
    return PolyMatrix([p.gradient() for p in fam.slots], fam.D)


def family_difference_eval(fam: PolyFamily, theta0: Sequence, theta: Sequence) -> list:
    if len(theta0) != fam.D or len(theta) != fam.D:
        raise ValueError(f"parameter arity must be {fam.D}")
    t0 = [as_fraction(v) for v in theta0]
    t = [as_fraction(v) for v in theta]
    return [p.evaluate(t) - p.evaluate(t0) for p in fam.slots]


def rank_gap_example() -> PolyFamily:
    """Four slots over three parameters whose ring rank (3) is below the real row rank (4)."""
    return PolyFamily.from_strings(3, ["t1", "t2", "t3", "t3 - (t1^2 - t2^2)"], "rank-gap")


def load_family(path) -> PolyFamily:
    return PolyFamily.from_json(json.loads(Path(path).read_text()))
