"""Sparse real bivariate Laurent polynomials.

A polynomial is a finite set of terms ``c * x^i * y^j`` with integer (possibly
negative) exponents and nonzero real coefficients.  Values are immutable and
safe to share between workers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class PolyError(ValueError):
    """Base class for polynomial construction errors."""


class ParseError(PolyError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EmptySupportError(PolyError):
    pass


class DegenerateSupportError(PolyError):
    pass


class DomainError(ValueError):
    pass


def _collinear(points: Sequence[tuple[int, int]]) -> bool:
    if len(points) < 3:
        return True
    (a0, b0) = points[0]
    for k in range(1, len(points)):
        if points[k] != points[0]:
            a1, b1 = points[k]
            break
    else:
        return True
    dx, dy = a1 - a0, b1 - b0
    return all(dx * (b - b0) - dy * (a - a0) == 0 for a, b in points)


@dataclass(frozen=True)
class LaurentPoly:
    """Normalized sparse Laurent polynomial in ``x`` and ``y``.

    ``terms`` is a tuple of ``(i, j, c)`` sorted by exponent with no duplicate
    exponents and no zero coefficients.  Use :meth:`from_terms` to build one
    from arbitrary input.
    """

    terms: tuple[tuple[int, int, float], ...]
    _i: np.ndarray = field(init=False, repr=False, compare=False)
    _j: np.ndarray = field(init=False, repr=False, compare=False)
    _c: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_i", np.array([t[0] for t in self.terms], dtype=int))
        object.__setattr__(self, "_j", np.array([t[1] for t in self.terms], dtype=int))
        object.__setattr__(self, "_c", np.array([t[2] for t in self.terms], dtype=float))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[int, int, float]], *, check: bool = True) -> "LaurentPoly":
        merged: dict[tuple[int, int], float] = {}
        for i, j, c in terms:
            key = (int(i), int(j))
            merged[key] = merged.get(key, 0.0) + float(c)
        clean = tuple(sorted((i, j, c) for (i, j), c in merged.items() if c != 0.0))
        if check:
            if not clean:
                raise EmptySupportError("polynomial has empty support")
            if _collinear([(i, j) for i, j, _ in clean]):
                raise DegenerateSupportError(
                    "support is contained in a line; the Newton polygon is degenerate"
                )
        return cls(clean)

    # -- accessors -------------------------------------------------------
    @property
    def exponents(self) -> np.ndarray:
        return np.stack([self._i, self._j], axis=1)

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    @property
    def support(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j, _ in self.terms]

    def coefficient(self, i: int, j: int) -> float:
        for a, b, c in self.terms:
            if (a, b) == (i, j):
                return c
        return 0.0

    def degree_range(self, var: str) -> tuple[int, int]:
        e = self._i if var == "x" else self._j
        return int(e.min()), int(e.max())

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        return format_poly(self)

    # -- evaluation ------------------------------------------------------
    def __call__(self, z1, z2):
        return evaluate(self, z1, z2)

    def magnitude(self, z1, z2):
        """Sum of absolute term values; the natural scale for residuals."""
        z1 = np.asarray(z1)
        z2 = np.asarray(z2)
        a1 = np.abs(z1)[..., None]
        a2 = np.abs(z2)[..., None]
        return np.sum(np.abs(self._c) * a1 ** self._i * a2 ** self._j, axis=-1)

    def log_terms(self, u: float, v: float, s1: float, s2: float):
        """Evaluate in log coordinates on the real quadrant with signs (s1, s2).

        Returns ``(f, xfx, yfy, mag)`` all divided by the largest term modulus,
        so the values stay O(1) anywhere in a log window.
        """
        e = self._i * u + self._j * v
        w = np.exp(e - e.max())
        sgn = np.where(self._i % 2 == 0, 1.0, s1) * np.where(self._j % 2 == 0, 1.0, s2)
        m = self._c * sgn * w
        return m.sum(), (self._i * m).sum(), (self._j * m).sum(), np.abs(m).sum()

    # -- algebra ---------------------------------------------------------
    def scale_terms(self, wi: float, wj: float) -> "LaurentPoly":
        """Term-wise ``(wi*i + wj*j) * c``; zero terms are dropped."""
        return LaurentPoly.from_terms(
            ((i, j, (wi * i + wj * j) * c) for i, j, c in self.terms), check=False
        )

    def to_json(self) -> dict:
        return {"terms": [{"i": i, "j": j, "c": c} for i, j, c in self.terms]}

    @classmethod
    def from_json(cls, data: Mapping) -> "LaurentPoly":
        try:
            raw = data["terms"]
            return cls.from_terms((int(t["i"]), int(t["j"]), float(t["c"])) for t in raw)
        except (KeyError, TypeError) as exc:
            raise PolyError(f"malformed polynomial JSON: {exc}") from exc


def evaluate(p: LaurentPoly, z1, z2):
    """Evaluate ``p`` at points of ``(C*)^2``; broadcasts over arrays."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    if np.any(z1 == 0) or np.any(z2 == 0):
        raise DomainError("evaluation point must lie in (C*)^2")
    out = np.sum(p._c * z1[..., None] ** p._i * z2[..., None] ** p._j, axis=-1)
    return out[()] if out.ndim == 0 else out


eval_poly = evaluate


def log_gauss_pair(p: LaurentPoly) -> tuple[LaurentPoly, LaurentPoly]:
    """Return ``(x df/dx, y df/dy)``: the two logarithmic derivatives."""
    return p.scale_terms(1.0, 0.0), p.scale_terms(0.0, 1.0)


# -- univariate slices ----------------------------------------------------


@dataclass(frozen=True)
class UnivariateSlice:
    """``p`` with one variable fixed, as a dense polynomial in the other.

    ``coefficients`` are ascending powers of the free variable after dividing
    by ``t**shift``; i.e. ``p = t**shift * sum(coefficients[k] * t**k)``.
    """

    coefficients: np.ndarray
    fixed: str
    value: complex
    shift: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coefficients)

    def eval_full(self, t):
        t = np.asarray(t, dtype=complex)
        return t ** self.shift * self(t)

    def roots(self, rtol: float = 0.0) -> np.ndarray:
        """Roots in C* (roots at zero are dropped)."""
        c = np.asarray(self.coefficients, dtype=complex)
        scale = np.max(np.abs(c)) if c.size else 0.0
        if scale == 0.0:
            return np.empty(0, dtype=complex)
        nz = np.nonzero(np.abs(c) > rtol * scale)[0]
        c = c[nz[0] : nz[-1] + 1]
        if c.size < 2:
            return np.empty(0, dtype=complex)
        return np.roots(c[::-1])


def slice_poly(p: LaurentPoly, fixed: str, value: complex) -> UnivariateSlice:
    if fixed not in ("x", "y"):
        raise ValueError(f"unknown variable {fixed!r}")
    if value == 0:
        raise DomainError("slice value must be nonzero")
    fixed_e, free_e = (p._i, p._j) if fixed == "x" else (p._j, p._i)
    lo, hi = int(free_e.min()), int(free_e.max())
    coeffs = np.zeros(hi - lo + 1, dtype=complex)
    np.add.at(coeffs, free_e - lo, p._c * complex(value) ** fixed_e)
    # trim exactly-zero leading coefficients (the x:=i example of x^2+y^2+1)
    top = len(coeffs)
    while top > 1 and coeffs[top - 1] == 0:
        top -= 1
    return UnivariateSlice(coeffs[:top], fixed, complex(value), lo)


def dense_matrix(p: LaurentPoly) -> tuple[np.ndarray, int, int]:
    """Dense coefficient matrix ``C[i - imin, j - jmin]`` and the offsets."""
    imin, jmin = int(p._i.min()), int(p._j.min())
    C = np.zeros((int(p._i.max()) - imin + 1, int(p._j.max()) - jmin + 1))
    C[p._i - imin, p._j - jmin] = p._c
    return C, imin, jmin


# -- text form --------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<var>[xy])|(?P<pow>\*\*|\^)"
    r"|(?P<op>[-+*()]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def integer(self) -> int:
        sign = 1
        paren = False
        tok = self.peek()
        if tok[:2] == ("op", "("):
            self.take()
            paren = True
            tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
            tok = self.peek()
        if tok[0] != "num" or not tok[1].isdigit():
            raise ParseError(f"expected integer exponent, found {tok[1] or 'end of input'!r}", tok[2])
        self.take()
        if paren:
            self.expect("op", ")")
        return sign * int(tok[1])

    def factor(self, acc):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            acc[2] *= float(val)
        elif kind == "var":
            self.take()
            exp = 1
            if self.peek()[0] == "pow":
                self.take()
                exp = self.integer()
            acc[0 if val == "x" else 1] += exp
        else:
            raise ParseError(f"expected a number or variable, found {val or 'end of input'!r}", pos)

    def term(self, sign: float):
        acc = [0, 0, sign]
        self.factor(acc)
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                self.factor(acc)
            elif kind in ("var", "num"):
                # implicit product, e.g. "3x" or "2.5 x y"
                self.factor(acc)
            else:
                return tuple(acc)

    def parse(self):
        terms = []
        sign = 1.0
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1.0 if val == "-" else 1.0
        terms.append(self.term(sign))
        while True:
            kind, val, pos = self.peek()
            if kind == "end":
                return terms
            if kind == "op" and val in "+-":
                self.take()
                terms.append(self.term(-1.0 if val == "-" else 1.0))
            else:
                raise ParseError(f"unexpected token {val!r}", pos)


def parse(text: str) -> LaurentPoly:
    """Parse ``"c*x^i*y^j + ..."``; exponents may be negative (``x^-1`` or ``x^(-1)``)."""
    if not text.strip():
        raise ParseError("empty expression", 0)
    return LaurentPoly.from_terms(_Parser(text).parse())


def _fmt_coeff(c: float) -> str:
    r = repr(float(c))
    return r[:-2] if r.endswith(".0") else r


def format_poly(p: LaurentPoly) -> str:
    parts = []
    for i, j, c in sorted(p.terms, key=lambda t: (t[0] + t[1], t[0], t[1])):
        mono = []
        if i:
            mono.append("x" if i == 1 else f"x^{i}")
        if j:
            mono.append("y" if j == 1 else f"y^{j}")
        mag = abs(c)
        if not mono:
            body = _fmt_coeff(mag)
        elif mag == 1.0:
            body = "*".join(mono)
        else:
            body = "*".join([_fmt_coeff(mag)] + mono)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def load_poly(text: str) -> LaurentPoly:
    """Text expression, or ``@path`` to a JSON file holding ``{"terms": [...]}``."""
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return LaurentPoly.from_json(json.load(fh))
    return parse(text)

