"""Tentacles of the real amoeba and their gluing across the toric boundary.

An unbounded real branch heading to the boundary divisor of side ``i`` of the
Newton polygon runs asymptotically along the side's outward normal, and the
edge monomial ``t = x^e1 y^e2`` (``e`` the primitive edge direction) tends to
a real root of the edge polynomial.  Each such root is one real intersection
point with the divisor; the curve crosses the divisor there, so two traced
open ends (in different quadrants) belong to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import NewtonPolygon, edge_polynomial, newton_polygon
from .tracer import ArcSet


class UnassignableEndError(RuntimeError):
    pass


@dataclass
class TentacleData:
    arc: int
    end: int  # 0 = first point of the arc, 1 = last
    side: int | None
    normal: tuple[int, int] | None
    intercept: float  # <(u, v), edge direction> at the end
    sign: int  # sign of the edge monomial on the arc's quadrant
    direction_error: float  # angle to the side's outward normal
    drift: float  # direction change over the last 10 steps
    root: int | None = None  # index into the side's real edge roots

    def to_json(self) -> dict:
        return {
            "arc": self.arc,
            "end": self.end,
            "side": self.side,
            "normal": list(self.normal) if self.normal else None,
            "intercept": self.intercept,
            "sign": self.sign,
            "direction_error": self.direction_error,
            "drift": self.drift,
            "root": self.root,
        }


@dataclass
class DivisorPoint:
    side: int
    root: float  # signed real root of the edge polynomial
    ends: list[tuple[int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"side": self.side, "root": self.root, "ends": [list(e) for e in self.ends]}


def real_edge_roots(p, poly: NewtonPolygon) -> list[list[float]]:
    """Sorted real nonzero roots of each edge polynomial."""
    out = []
    for edge in poly.edges:
        c = edge_polynomial(p, edge)
        roots = np.roots(c[::-1])
        real = sorted(float(r.real) for r in roots if r != 0 and abs(r.imag) <= 1e-9 * abs(r))
        out.append(real)
    return out


def _end_geometry(pts: np.ndarray, end: int, n_back: int = 10):
    tail = pts[::-1] if end == 1 else pts
    tail = tail[: n_back + 1]
    seg = tail[:-1] - tail[1:]  # pointing outward
    ang = np.arctan2(seg[:, 1], seg[:, 0])
    ang = np.unwrap(ang)
    direction = seg[0] / np.linalg.norm(seg[0])
    drift = float(ang.max() - ang.min()) if len(ang) > 1 else 0.0
    return tail[0], direction, drift


def tentacle_analysis(
    arcs: ArcSet,
    poly: NewtonPolygon | None = None,
    *,
    angle_tol: float = 0.05,
    strict: bool = True,
) -> list[TentacleData]:
    """Assign every open arc end to a side of the Newton polygon."""
    poly = poly or newton_polygon(arcs.poly)
    normals = []
    for e in poly.edges:
        n = np.array(e.normal, dtype=float)
        normals.append(n / np.linalg.norm(n))
    roots = real_edge_roots(arcs.poly, poly)
    out = []
    for k, arc in enumerate(arcs.arcs):
        if arc.closed:
            continue
        for end in (0, 1):
            point, direction, drift = _end_geometry(arc.log_points, end)
            errs = [math.acos(min(1.0, max(-1.0, float(direction @ n)))) for n in normals]
            side = int(np.argmin(errs))
            if errs[side] > angle_tol:
                if strict:
                    raise UnassignableEndError(
                        f"arc {k} end {end} direction matches no side (best error {errs[side]:.3g} rad); "
                        "enlarge the window"
                    )
                out.append(TentacleData(k, end, None, None, float("nan"), 0, errs[side], drift))
                continue
            edge = poly.edges[side]
            e1, e2 = edge.direction
            w = float(point[0] * e1 + point[1] * e2)
            s1, s2 = arc.quadrant
            sign = (s1 if e1 % 2 else 1) * (s2 if e2 % 2 else 1)
            td = TentacleData(k, end, side, edge.normal, w, sign, errs[side], drift)
            best = None
            for r_idx, r in enumerate(roots[side]):
                if (r > 0) != (sign > 0):
                    continue
                gap = abs(w - math.log(abs(r)))
                if best is None or gap < best[0]:
                    best = (gap, r_idx)
            if best is not None and best[0] < angle_tol:
                td.root = best[1]
            out.append(td)
    return out


def glue_arcset(arcs: ArcSet, *, angle_tol: float = 0.05, gluing_tol: float = 1e-3) -> None:
    """Fill tentacles, divisor points and glued components of ``arcs`` in place."""
    poly = newton_polygon(arcs.poly)
    tentacles = tentacle_analysis(arcs, poly, angle_tol=angle_tol, strict=False)
    arcs.tentacles = tentacles
    flags = arcs.flags
    if any(t.side is None for t in tentacles):
        flags.append("unassignable-end: an open end matches no side (window too small?)")
    if any(t.side is not None and t.root is None for t in tentacles):
        flags.append("unmatched-end: an open end matches no real edge root")
    if any(t.drift > 0.01 for t in tentacles):
        flags.append("unstabilized-end: end direction drifts more than 0.01 rad over 10 steps")
    roots = real_edge_roots(arcs.poly, poly)
    for side, rs in enumerate(roots):
        for a, b in zip(rs, rs[1:]):
            if (a > 0) == (b > 0) and abs(math.log(abs(a)) - math.log(abs(b))) < gluing_tol:
                flags.append(f"gluing-ambiguity: side {side} has edge roots within {gluing_tol}")
    groups: dict[tuple[int, int], DivisorPoint] = {}
    for t in tentacles:
        if t.side is None or t.root is None:
            continue
        key = (t.side, t.root)
        if key not in groups:
            groups[key] = DivisorPoint(t.side, roots[t.side][t.root])
        groups[key].ends.append((t.arc, t.end))
    points = [groups[k] for k in sorted(groups)]
    if any(len(d.ends) != 2 for d in points):
        flags.append("unpaired-divisor-point: a boundary point does not join exactly two ends")
    arcs.divisor_points = points

    parent = list(range(len(arcs.arcs)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for d in points:
        base = find(d.ends[0][0])
        for arc, _ in d.ends[1:]:
            parent[find(arc)] = base
    comps: dict[int, list[int]] = {}
    for k in range(len(arcs.arcs)):
        comps.setdefault(find(k), []).append(k)
    arcs.components = sorted(comps.values())
