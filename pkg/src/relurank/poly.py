"""Sparse multivariate polynomials over the rationals, and matrices of them.

A :class:`SparsePoly` stores a map from exponent tuples to nonzero
``Fraction`` coefficients.  Instances are immutable and canonical, so two
equal polynomials always compare (and hash) equal.

Text format used for debugging and JSON round trips::

    3/2*t1^2*t3 - t2 + 7

Variables are ``t1 .. tN`` (1-based).  The parser also accepts ``θ``/``theta``
prefixes and parentheses.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

__all__ = [
    "SparsePoly",
    "PolyMatrix",
    "as_fraction",
    "parse_poly",
    "poly_partial",
    "poly_eval",
    "grlex_key",
]


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, floats (exactly) and ``"p/q"`` strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        s = value.strip()
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed rational {value!r}") from exc
    raise TypeError(f"cannot interpret {value!r} as a rational")


def grlex_key(exponents: tuple[int, ...]):
    # graded lexicographic: total degree first, then x1 > x2 > ...
    return (sum(exponents), exponents)


class SparsePoly:
    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], object] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != nvars:
                    raise ValueError(f"exponent {exps} does not have arity {nvars}")
                c = as_fraction(c)
                if c:
                    clean[exps] = clean.get(exps, Fraction(0)) + c
                    if not clean[exps]:
                        del clean[exps]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "SparsePoly":
        # terms must already be canonical (no zeros, Fraction coefficients)
        p = object.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "SparsePoly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, value, nvars: int) -> "SparsePoly":
        c = as_fraction(value)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def variable(cls, index: int, nvars: int) -> "SparsePoly":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for arity {nvars}")
        e = [0] * nvars
        e[index] = 1
        return cls._raw(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exponents: Sequence[int], coef=1) -> "SparsePoly":
        c = as_fraction(coef)
        return cls._raw(len(exponents), {tuple(exponents): c} if c else {})

    # -- basic protocol -----------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePoly):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == SparsePoly.constant(other, self.nvars)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"SparsePoly({self.nvars}, {self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.nvars != self.nvars:
                raise ValueError(f"arity mismatch: {self.nvars} vs {other.nvars}")
            return other
        return SparsePoly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v += c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return SparsePoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SparsePoly):
            c = as_fraction(other)
            if not c:
                return SparsePoly.zero(self.nvars)
            return SparsePoly._raw(self.nvars, {e: v * c for e, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return SparsePoly._raw(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = SparsePoly.constant(1, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- calculus and substitution ----------------------------------
    def partial(self, index: int) -> "SparsePoly":
        if not 0 <= index < self.nvars:
            raise IndexError(f"variable index {index} out of range for arity {self.nvars}")
        out = {}
        for e, c in self._terms.items():
            k = e[index]
            if k:
                e2 = e[:index] + (k - 1,) + e[index + 1:]
                out[e2] = c * k
        return SparsePoly._raw(self.nvars, out)

    def gradient(self) -> list["SparsePoly"]:
        return [self.partial(i) for i in range(self.nvars)]

    def __call__(self, point: Sequence) -> Fraction:
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        """Evaluate at ``point``; exact for rational input."""
        if len(point) != self.nvars:
            raise ValueError(f"point has length {len(point)}, polynomial arity is {self.nvars}")
        exact = not any(isinstance(v, float) for v in point)
        vals = [as_fraction(v) for v in point] if exact else [float(v) for v in point]
        total = Fraction(0) if exact else 0.0
        for e, c in self._terms.items():
            t = c if exact else float(c)
            for v, k in zip(vals, e):
                if k:
                    t *= v ** k
            total += t
        return total

    def substitute_tail(self, values: Sequence) -> "SparsePoly":
        """Substitute the last ``len(values)`` variables and drop them.

        Used for ``P(θ, x) / (x → z)``: the result lives in the leading
        ``nvars - len(values)`` variables.
        """
        k = len(values)
        if k > self.nvars:
            raise ValueError("too many substitution values")
        vals = [as_fraction(v) for v in values]
        keep = self.nvars - k
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self._terms.items():
            t = c
            for v, p in zip(vals, e[keep:]):
                if p:
                    t *= v ** p
            if t:
                head = e[:keep]
                v = out.get(head, 0) + t
                if v:
                    out[head] = v
                else:
                    out.pop(head, None)
        return SparsePoly._raw(keep, out)

    def extend(self, nvars: int, offset: int = 0) -> "SparsePoly":
        """Embed into a ring with ``nvars`` variables, shifting indices by ``offset``."""
        if offset + self.nvars > nvars:
            raise ValueError("embedding does not fit")
        pad_l = (0,) * offset
        pad_r = (0,) * (nvars - offset - self.nvars)
        return SparsePoly._raw(nvars, {pad_l + e + pad_r: c for e, c in self._terms.items()})

    def monomials(self) -> list[tuple[int, ...]]:
        return sorted(self._terms, key=grlex_key)

    def coefficient(self, exponents: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exponents), Fraction(0))

    # -- text ---------------------------------------------------------
    def to_text(self, names: Sequence[str] | None = None) -> str:
        if not self._terms:
            return "0"
        if names is None:
            names = [f"t{i + 1}" for i in range(self.nvars)]
        parts = []
        for e in sorted(self._terms, key=grlex_key, reverse=True):
            c = self._terms[e]
            factors = []
            for name, k in zip(names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = f"{mag}*" + "*".join(factors)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    @classmethod
    def from_text(cls, text: str, nvars: int) -> "SparsePoly":
        return parse_poly(text, nvars)


def poly_partial(p: SparsePoly, var_index: int) -> SparsePoly:
    return p.partial(var_index)


def poly_eval(p: SparsePoly, point: Sequence) -> Fraction:
    return p.evaluate(point)


# ----------------------------------------------------------------------
# expression parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<var>(?:theta|θ|t|x)\d+)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    text = text.replace("−", "-").replace("·", "*")
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected input at {text[pos:]!r}")
        pos = m.end()
        if m.group("num"):
            out.append(("num", Fraction(m.group("num"))))
        elif m.group("var"):
            out.append(("var", m.group("var")))
        else:
            out.append(("op", m.group("op")))
    return out


class _Parser:
    def __init__(self, text: str, nvars: int, x_offset: int | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.nvars = nvars
        self.x_offset = x_offset

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ValueError(f"expected {op!r}")

    def parse(self) -> SparsePoly:
        p = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"trailing tokens in polynomial: {self.toks[self.i:]}")
        return p

    def expr(self) -> SparsePoly:
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            p = self.term()
            if val == "-":
                p = -p
        else:
            p = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                q = self.term()
                p = p + q if val == "+" else p - q
            else:
                return p

    def term(self) -> SparsePoly:
        p = self.factor()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                p = p * self.factor()
            elif kind == "op" and val == "/":
                self.take()
                d = self.factor()
                if not d.is_constant() or d.is_zero():
                    raise ValueError("division only by nonzero constants")
                p = p * (1 / d.coefficient((0,) * self.nvars))
            else:
                return p

    def factor(self) -> SparsePoly:
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, n = self.take()
            if kind != "num" or n.denominator != 1:
                raise ValueError("exponent must be a non-negative integer")
            return base ** int(n)
        return base

    def atom(self) -> SparsePoly:
        kind, val = self.take()
        if kind == "num":
            return SparsePoly.constant(val, self.nvars)
        if kind == "var":
            m = re.match(r"(theta|θ|t|x)(\d+)", val)
            prefix, idx = m.group(1), int(m.group(2))
            if idx < 1:
                raise ValueError("variables are 1-based")
            if prefix == "x":
                if self.x_offset is None:
                    raise ValueError("x variables not allowed here")
                idx += self.x_offset
            if idx > self.nvars:
                raise ValueError(f"variable {val} exceeds arity {self.nvars}")
            return SparsePoly.variable(idx - 1, self.nvars)
        if kind == "op" and val == "(":
            p = self.expr()
            self.expect(")")
            return p
        if kind == "op" and val == "-":
            return -self.factor()
        raise ValueError(f"unexpected token {val!r}")


def parse_poly(text: str, nvars: int, x_offset: int | None = None) -> SparsePoly:
    """Parse the tiny polynomial grammar (``t1..tN``, ``+ - * / ^``, parentheses).

    ``x_offset`` lets ``x1, x2, ...`` name variables ``x_offset+1, ...``.
    """
    return _Parser(text, nvars, x_offset).parse()


class PolyMatrix:
    """Dense ``rows x cols`` matrix of :class:`SparsePoly` with a shared arity."""

    __slots__ = ("nvars", "entries")

    def __init__(self, entries: Sequence[Sequence[SparsePoly]], nvars: int | None = None):
        rows = [tuple(r) for r in entries]
        if rows and len({len(r) for r in rows}) != 1:
            raise ValueError("ragged matrix")
        arities = {p.nvars for r in rows for p in r}
        if nvars is None:
            if len(arities) != 1:
                raise ValueError("cannot infer arity of an empty or mixed matrix")
            nvars = arities.pop()
        elif arities and arities != {nvars}:
            raise ValueError("all entries must share the variable arity")
        self.nvars = nvars
        self.entries = tuple(rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.entries), len(self.entries[0]) if self.entries else 0)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return self.shape[1]

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.nvars == other.nvars and self.entries == other.entries

    def __repr__(self):
        return f"PolyMatrix({self.shape[0]}x{self.shape[1]}, nvars={self.nvars})"

    def evaluate(self, point: Sequence) -> list[list]:
        return [[p.evaluate(point) for p in row] for row in self.entries]

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "PolyMatrix":
        cols = list(cols)
        return PolyMatrix([[self.entries[i][j] for j in cols] for i in rows], self.nvars)

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "rows": [[p.to_text() for p in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PolyMatrix":
        n = int(data["nvars"])
        return cls([[parse_poly(s, n) for s in row] for row in data["rows"]], n)

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]], nvars: int) -> "PolyMatrix":
        return cls([[parse_poly(s, nvars) for s in row] for row in rows], nvars)
