"""Total absolute curvature of the real amoeba, computed two ways.

Direct route: along each traced arc the curvature integral is the total
variation of the normal direction ``[x f_x : y f_y]``.  Integral-geometric
route: the same quantity is the length of the Gauss image counted with
multiplicity, i.e. the integral over directions of the number of real fiber
points (see :mod:`amoeba_lab.gauss`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import shapely
from shapely import STRtree
from shapely.ops import nearest_points

from .gauss import ScanReport, crofton_from_scan, totally_real_scan
from .lattice import curvature_bound, newton_polygon
from .laurent import LaurentPoly
from .tracer import Arc, ArcSet


class LiftAmbiguityError(RuntimeError):
    pass


def normal_angles(p: LaurentPoly, arc: Arc) -> np.ndarray:
    """Gauss angle in [0, pi) at every arc point, from the analytic log-gradient."""
    u = arc.log_points[:, 0:1]
    v = arc.log_points[:, 1:2]
    i = p.exponents[:, 0]
    j = p.exponents[:, 1]
    e = u * i + v * j
    w = np.exp(e - e.max(axis=1, keepdims=True))
    s1, s2 = arc.quadrant
    sgn = np.where(i % 2 == 0, 1.0, s1) * np.where(j % 2 == 0, 1.0, s2)
    m = p.coefficients * sgn * w
    return np.arctan2(m @ j, m @ i) % math.pi


def lifted_steps(angles: np.ndarray, max_gap: float = math.pi / 4) -> np.ndarray:
    """Consecutive differences of projective angles, each reduced to (-pi/2, pi/2]."""
    d = np.diff(angles)
    # odd in d, so reversing an arc negates every step exactly
    d = d - math.pi * np.round(d / math.pi)
    if d.size and np.max(np.abs(d)) > max_gap:
        raise LiftAmbiguityError(
            f"Gauss angle jumps by {np.max(np.abs(d)):.3g} rad between samples; retrace with a smaller step"
        )
    return d


def inflection_indices(steps: np.ndarray, noise: float = 1e-10) -> list[int]:
    """Point indices where the lifted angle changes monotonicity."""
    out = []
    last_sign = 0
    for k, d in enumerate(steps):
        if abs(d) <= noise:
            continue
        sgn = 1 if d > 0 else -1
        if last_sign and sgn != last_sign:
            out.append(k)
        last_sign = sgn
    return out


def arc_total_curvature(arc: Arc, p: LaurentPoly) -> tuple[float, list[int]]:
    """(total |k| along the arc in radians, inflection point indices)."""
    if len(arc) < 2:
        return 0.0, []
    steps = lifted_steps(normal_angles(p, arc))
    # fsum is correctly rounded, so the value is independent of orientation
    return math.fsum(np.abs(steps)), inflection_indices(steps)


def tangent_defect(arc: Arc, p: LaurentPoly) -> float:
    """Largest |cos| between a polyline chord and the analytic normal."""
    if len(arc) < 2:
        return 0.0
    chords = np.diff(arc.log_points, axis=0)
    lens = np.linalg.norm(chords, axis=1)
    ok = lens > 0
    chords = chords[ok] / lens[ok, None]
    th = normal_angles(p, arc)
    mid = np.arctan2(
        np.sin(2 * th[:-1]) + np.sin(2 * th[1:]), np.cos(2 * th[:-1]) + np.cos(2 * th[1:])
    )[ok] / 2
    normals = np.stack([np.cos(mid), np.sin(mid)], axis=1)
    return float(np.max(np.abs(np.einsum("ij,ij->i", chords, normals)), initial=0.0))


@dataclass
class PinchPoint:
    location: tuple[float, float]
    arcs: tuple[int, int]
    alpha: float  # crossing angle in [0, pi/2]
    segments: tuple[int, int] = (0, 0)
    crossing: bool = True

    def to_json(self) -> dict:
        return {
            "location": list(self.location),
            "arcs": list(self.arcs),
            "alpha": self.alpha,
            "crossing": self.crossing,
        }


def _line_angle(d1: np.ndarray, d2: np.ndarray) -> float:
    c = abs(float(d1 @ d2)) / (np.linalg.norm(d1) * np.linalg.norm(d2))
    return math.acos(min(1.0, c))


def _segment_intersection(a0, a1, b0, b1):
    r = a1 - a0
    s = b1 - b0
    den = r[0] * s[1] - r[1] * s[0]
    if den == 0:
        return None
    q = b0 - a0
    t = (q[0] * s[1] - q[1] * s[0]) / den
    w = (q[0] * r[1] - q[1] * r[0]) / den
    if 0 <= t <= 1 and 0 <= w <= 1:
        return a0 + t * r
    return None


def pinch_detect(arcs: ArcSet | list[Arc], tol: float = 1e-4, transverse: float = 0.1) -> list[PinchPoint]:
    """Crossings between log polylines of different arcs, or distant parts of one arc.

    Proper crossings are always reported.  Near misses closer than ``tol``
    are reported only when the branches meet at an angle above ``transverse``
    so that two tentacles converging on the same asymptote do not count.
    """
    arc_list = arcs.arcs if isinstance(arcs, ArcSet) else list(arcs)
    segs = []
    owner = []
    for k, a in enumerate(arc_list):
        lp = a.log_points
        for s in range(len(lp) - 1):
            segs.append((lp[s], lp[s + 1]))
            owner.append((k, s))
    if not segs:
        return []
    seg_arr = np.array(segs)
    geoms = shapely.linestrings(seg_arr)
    tree = STRtree(geoms)
    left, right = tree.query(geoms, predicate="dwithin", distance=tol)
    events: list[PinchPoint] = []
    seen: set = set()
    for a, b in zip(left, right):
        if a >= b:
            continue
        (ka, sa), (kb, sb) = owner[a], owner[b]
        if ka == kb:
            n = len(arc_list[ka]) - 1
            gap = abs(sa - sb)
            if arc_list[ka].closed:
                gap = min(gap, n - gap)
            if gap <= 2:
                continue
        a0, a1 = seg_arr[a]
        b0, b1 = seg_arr[b]
        alpha = _line_angle(a1 - a0, b1 - b0)
        hit = _segment_intersection(a0, a1, b0, b1)
        crossing = hit is not None
        if not crossing:
            if alpha <= transverse:
                continue
            pa, pb = nearest_points(geoms[a], geoms[b])
            hit = np.array([(pa.x + pb.x) / 2, (pa.y + pb.y) / 2])
        key = (ka, kb, round(float(hit[0]), 6), round(float(hit[1]), 6))
        if key in seen:
            continue
        seen.add(key)
        events.append(PinchPoint((float(hit[0]), float(hit[1])), (ka, kb), alpha, (sa, sb), crossing))
    events.sort(key=lambda e: (e.arcs, e.location))
    return events


@dataclass
class ArcCurvature:
    arc: int
    total: float
    inflections: int
    pinch_inflections: int
    tangent_defect: float

    def to_json(self) -> dict:
        return {
            "arc": self.arc,
            "total": self.total,
            "inflections": self.inflections,
            "pinch_associated_inflections": self.pinch_inflections,
            "tangent_defect": self.tangent_defect,
        }


@dataclass
class CurvatureReport:
    per_arc: list[ArcCurvature]
    total: float
    bound: float
    crofton_total: float | None
    p: int
    t: int
    component_bound: float
    truncation_uncertainty: float
    pinches: list[PinchPoint] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def inflection_free(self) -> bool:
        return all(a.inflections - a.pinch_inflections == 0 for a in self.per_arc)

    @property
    def smooth(self) -> bool:
        return not self.pinches

    @property
    def gap(self) -> float:
        return self.bound - self.total

    def to_json(self) -> dict:
        return {
            "per_arc": [a.to_json() for a in self.per_arc],
            "total": self.total,
            "bound": self.bound,
            "gap": self.gap,
            "crofton_total": self.crofton_total,
            "p": self.p,
            "t": self.t,
            "component_bound": self.component_bound,
            "truncation_uncertainty": self.truncation_uncertainty,
            "pinches": [pp.to_json() for pp in self.pinches],
            "flags": self.flags,
        }


def crofton_total_curvature(
    p: LaurentPoly,
    n_samples: int = 64,
    *,
    seed: int = 0,
    mapper: Callable = map,
    scan: ScanReport | None = None,
) -> float:
    """(pi/n) * sum of real fiber counts over evenly spaced directions."""
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    if scan is None:
        scan = totally_real_scan(p, n_samples, seed=seed, mapper=mapper)
    return crofton_from_scan(scan, n_samples)


def _truncation_uncertainty(arcs: ArcSet) -> float:
    """Angle between each open end's normal and its side's limiting normal."""
    if not arcs.tentacles:
        return 0.0
    poly = newton_polygon(arcs.poly)
    total = 0.0
    for t in arcs.tentacles:
        if t.side is None:
            continue
        arc = arcs.arcs[t.arc]
        th = normal_angles(arcs.poly, arc)
        end_angle = th[-1] if t.end == 1 else th[0]
        e = poly.edges[t.side].direction
        limit = math.atan2(e[1], e[0]) % math.pi
        d = (end_angle - limit) % math.pi
        total += min(d, math.pi - d)
    return total


def total_curvature(
    arcs: ArcSet,
    p: LaurentPoly | None = None,
    *,
    n_samples: int = 64,
    seed: int = 0,
    scan: ScanReport | None = None,
    crofton: bool = True,
    pinch_tol: float = 1e-4,
    mapper: Callable = map,
) -> CurvatureReport:
    p = p or arcs.poly
    bound = curvature_bound(newton_polygon(p))
    pinches = pinch_detect(arcs, tol=pinch_tol)
    per_arc = []
    flags = []
    for k, arc in enumerate(arcs.arcs):
        tv, infl = arc_total_curvature(arc, p)
        near = [pp.segments[0] if pp.arcs[0] == k else pp.segments[1] for pp in pinches if k in pp.arcs]
        pinch_infl = sum(1 for i in infl if any(abs(i - s) <= 3 for s in near))
        defect = tangent_defect(arc, p)
        if defect >= 0.05:
            flags.append(f"tangent-check: arc {k} chord/normal defect {defect:.3g}")
        per_arc.append(ArcCurvature(k, tv, len(infl), pinch_infl, defect))
    total = math.fsum(a.total for a in per_arc)
    crofton_total = None
    if crofton:
        crofton_total = crofton_total_curvature(p, n_samples, seed=seed, mapper=mapper, scan=scan)
    return CurvatureReport(
        per_arc=per_arc,
        total=total,
        bound=bound,
        crofton_total=crofton_total,
        p=arcs.p,
        t=arcs.t,
        component_bound=2 * math.pi * arcs.p + math.pi * arcs.t,
        truncation_uncertainty=_truncation_uncertainty(arcs),
        pinches=pinches,
        flags=flags,
    )
