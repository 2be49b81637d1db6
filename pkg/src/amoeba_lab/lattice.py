"""Newton polygons and their lattice invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .laurent import DegenerateSupportError, DomainError, LaurentPoly

Point = tuple[int, int]


@dataclass(frozen=True)
class Edge:
    start: Point
    end: Point
    normal: Point  # primitive outward normal
    length: int  # integer length d_i

    @property
    def direction(self) -> Point:
        """Primitive vector from ``start`` to ``end``."""
        return ((self.end[0] - self.start[0]) // self.length, (self.end[1] - self.start[1]) // self.length)


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple[Point, ...]  # counterclockwise
    edges: tuple[Edge, ...]
    vol: Fraction
    g: int
    s: int

    @property
    def pick_ok(self) -> bool:
        return self.vol == self.g + Fraction(self.s, 2) - 1

    @property
    def n_sides(self) -> int:
        return len(self.edges)

    def lattice_points(self) -> list[Point]:
        """All integer points of the closed polygon, row-major."""
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return [
            (a, b)
            for b in range(min(ys), max(ys) + 1)
            for a in range(min(xs), max(xs) + 1)
            if _locate(self.vertices, (a, b)) >= 0
        ]

    def to_json(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "edges": [
                {"start": list(e.start), "end": list(e.end), "normal": list(e.normal), "d": e.length}
                for e in self.edges
            ],
            "vol": {"num": self.vol.numerator, "den": self.vol.denominator},
            "g": self.g,
            "s": self.s,
            "pick_ok": self.pick_ok,
        }


@dataclass(frozen=True)
class MomentImage:
    point: tuple[float, float]


def _cross(o: Point, a: Point, b: Point) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Iterable[Point]) -> list[Point]:
    """Andrew's monotone chain; counterclockwise, collinear points removed."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def shoelace(vertices: Sequence[Point]) -> Fraction:
    twice = 0
    n = len(vertices)
    for k in range(n):
        x0, y0 = vertices[k]
        x1, y1 = vertices[(k + 1) % n]
        twice += x0 * y1 - x1 * y0
    return Fraction(abs(twice), 2)


def _locate(vertices: Sequence[Point], q: Point) -> int:
    """1 interior, 0 on boundary, -1 outside (vertices counterclockwise)."""
    on_edge = False
    n = len(vertices)
    for k in range(n):
        c = _cross(vertices[k], vertices[(k + 1) % n], q)
        if c < 0:
            return -1
        if c == 0:
            on_edge = True
    return 0 if on_edge else 1


def lattice_counts(poly: NewtonPolygon | Sequence[Point]) -> tuple[int, int]:
    """(interior, boundary) lattice point counts by scanning the bounding box."""
    verts = poly.vertices if isinstance(poly, NewtonPolygon) else list(poly)
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    g = s = 0
    for a in range(min(xs), max(xs) + 1):
        for b in range(min(ys), max(ys) + 1):
            loc = _locate(verts, (a, b))
            if loc > 0:
                g += 1
            elif loc == 0:
                s += 1
    return g, s


def polygon_from_points(points: Iterable[Point]) -> NewtonPolygon:
    hull = convex_hull(points)
    if len(hull) < 3:
        raise DegenerateSupportError("support is contained in a line; the Newton polygon is degenerate")
    edges = []
    for k, a in enumerate(hull):
        b = hull[(k + 1) % len(hull)]
        dx, dy = b[0] - a[0], b[1] - a[1]
        d = math.gcd(abs(dx), abs(dy))
        edges.append(Edge(a, b, (dy // d, -dx // d), d))
    g, s = lattice_counts(hull)
    return NewtonPolygon(tuple(hull), tuple(edges), shoelace(hull), g, s)


def newton_polygon(p: LaurentPoly) -> NewtonPolygon:
    return polygon_from_points(p.support)


def curvature_bound(poly: NewtonPolygon) -> float:
    """2*pi*vol: the largest possible total curvature of the real amoeba."""
    return 2.0 * math.pi * float(poly.vol)


def edge_polynomial(p: LaurentPoly, edge: Edge) -> np.ndarray:
    """Ascending coefficients of the truncation of ``p`` to ``edge``.

    The variable is the monomial ``t = x^e1 * y^e2`` with ``e`` the edge's
    primitive direction, so the polynomial has degree ``edge.length``.
    """
    e1, e2 = edge.direction
    coeffs = np.zeros(edge.length + 1)
    for k in range(edge.length + 1):
        coeffs[k] = p.coefficient(edge.start[0] + k * e1, edge.start[1] + k * e2)
    return coeffs


def exterior_angles(poly: NewtonPolygon) -> list[float]:
    """Turning angle at each vertex; these sum to 2*pi."""
    out = []
    n = len(poly.edges)
    for k in range(n):
        a = poly.edges[k - 1].normal
        b = poly.edges[k].normal
        out.append(math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]))
    return out


def moment_map(poly: NewtonPolygon, x: float, y: float) -> MomentImage:
    """Weighted average of the lattice points of the polygon.

    Each lattice point ``a`` is weighted by ``|x^a1 y^a2|``; the weights are
    computed in log space so extreme inputs do not overflow.
    """
    if x == 0 or y == 0:
        raise DomainError("moment map is defined on (R*)^2")
    pts = np.array(poly.lattice_points(), dtype=float)
    logw = pts @ np.array([math.log(abs(x)), math.log(abs(y))])
    w = np.exp(logw - logw.max())
    w /= w.sum()
    mu = w @ pts
    return MomentImage((float(mu[0]), float(mu[1])))
