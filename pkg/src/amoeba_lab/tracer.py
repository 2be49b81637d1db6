"""Tracing the real curve quadrant by quadrant in logarithmic coordinates.

On each open quadrant of (R*)^2 the map ``(x, y) -> (log|x|, log|y|)`` is a
diffeomorphism, so the real curve is traced directly in log coordinates
``(u, v)`` as the zero set of ``F(u, v) = f(s1 e^u, s2 e^v)``.  The gradient of
``F`` is ``(x f_x, y f_y)``: the logarithmic Gauss map is the normal of the
traced polyline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .laurent import LaurentPoly, log_gauss_pair, slice_poly
from .resultant import DegenerateResultantError, solve_system

log = logging.getLogger(__name__)

QUADRANTS = ((1, 1), (-1, 1), (-1, -1), (1, -1))


class SingularityError(RuntimeError):
    def __init__(self, message: str, location: tuple[float, float] | None = None):
        super().__init__(message if location is None else f"{message} near log point {location}")
        self.location = location


@dataclass(frozen=True)
class TraceParams:
    theta_max: float = 0.02  # max Gauss-angle change per step (rad)
    h_max: float = 0.1  # max step in log units
    h_min: float = 1e-9
    corrector_tol: float = 1e-12  # scaled residual
    corrector_iter: int = 20
    singular_tol: float = 1e-10  # scaled log-gradient norm
    seed_dedup: float = 2e-3
    max_steps: int = 200_000


def quadrant_label(q: tuple[int, int]) -> str:
    return "(" + ",".join("+" if s > 0 else "-" for s in q) + ")"


@dataclass
class Arc:
    quadrant: tuple[int, int]
    log_points: np.ndarray  # (n, 2)
    closed: bool
    left_exit: str | None = None
    right_exit: str | None = None

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.quadrant, dtype=float) * np.exp(self.log_points)

    def __len__(self) -> int:
        return len(self.log_points)

    def reversed(self) -> "Arc":
        return replace(
            self,
            log_points=self.log_points[::-1].copy(),
            left_exit=self.right_exit,
            right_exit=self.left_exit,
        )

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.log_points, axis=0), axis=1)))


@dataclass
class ArcSet:
    poly: LaurentPoly
    arcs: list[Arc]
    window: float
    components: list[list[int]] = field(default_factory=list)
    tentacles: list = field(default_factory=list)  # TentacleData, see tentacles.py
    open_ends: list[tuple[int, int]] = field(default_factory=list)
    divisor_points: list = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        """Number of compact components of the real amoeba."""
        return sum(1 for a in self.arcs if a.closed)

    @property
    def t(self) -> int:
        """Boundary intersections witnessed by glued tentacle pairs."""
        return len(self.divisor_points)

    @property
    def tentacle_count(self) -> int:
        return self.t

    def to_json(self) -> dict:
        return {
            "arcs": [
                {
                    "id": k,
                    "quadrant": quadrant_label(a.quadrant),
                    "closed": a.closed,
                    "n_points": len(a),
                    "left_exit": a.left_exit,
                    "right_exit": a.right_exit,
                    "length": a.length(),
                }
                for k, a in enumerate(self.arcs)
            ],
            "window": self.window,
            "components": self.components,
            "p": self.p,
            "tentacle_count": self.tentacle_count,
            "open_ends": len(self.open_ends),
            "tentacles": [t.to_json() for t in self.tentacles],
            "divisor_points": [d.to_json() for d in self.divisor_points],
            "flags": self.flags,
        }


# -- local geometry -------------------------------------------------------


class _Curve:
    """``F`` on one quadrant, with the normalizations used throughout."""

    def __init__(self, p: LaurentPoly, quadrant: tuple[int, int], params: TraceParams):
        self.p = p
        self.s1, self.s2 = quadrant
        self.params = params

    def eval(self, u: float, v: float):
        F, gu, gv, mag = self.p.log_terms(u, v, self.s1, self.s2)
        return F / mag, gu / mag, gv / mag

    def correct(self, u: float, v: float):
        prm = self.params
        for _ in range(prm.corrector_iter):
            F, gu, gv = self.eval(u, v)
            g2 = gu * gu + gv * gv
            if abs(F) < prm.corrector_tol:
                if g2 < prm.singular_tol**2:
                    raise SingularityError("log-gradient vanishes on the curve", (u, v))
                return u, v
            if g2 < prm.singular_tol**2:
                # critical point of F off the curve, e.g. inside an oval
                return None
            u -= F * gu / g2
            v -= F * gv / g2
            if not (math.isfinite(u) and math.isfinite(v)):
                return None
        F, _, _ = self.eval(u, v)
        return (u, v) if abs(F) < prm.corrector_tol * 100 else None

    def frame(self, u: float, v: float):
        """(normal angle mod pi, unit tangent) at a curve point."""
        _, gu, gv = self.eval(u, v)
        n = math.hypot(gu, gv)
        if n < self.params.singular_tol:
            raise SingularityError("log-gradient vanishes on the curve", (u, v))
        return math.atan2(gv, gu) % math.pi, (-gv / n, gu / n)


def _angle_gap(a: float, b: float) -> float:
    """Signed difference ``b - a`` of projective angles, in (-pi/2, pi/2]."""
    d = (b - a) % math.pi
    return d - math.pi if d > math.pi / 2 else d


def _exit_tag(u: float, v: float, W: float) -> str | None:
    over = {"u-": -u - W, "u+": u - W, "v-": -v - W, "v+": v - W}
    tag, amount = max(over.items(), key=lambda kv: kv[1])
    return tag if amount >= 0 else None


def _land_on_boundary(curve: _Curve, u: float, v: float, tag: str, W: float):
    """Move an outside point back onto the window edge along the curve."""
    fixed_u = tag[0] == "u"
    target = W if tag[1] == "+" else -W
    a, b = (target, v) if fixed_u else (u, target)
    for _ in range(30):
        F, gu, gv = curve.eval(a, b)
        d = gv if fixed_u else gu
        if abs(F) < curve.params.corrector_tol or d == 0:
            break
        if fixed_u:
            b -= F / d
        else:
            a -= F / d
    F, _, _ = curve.eval(a, b)
    if abs(F) < 1e-9 and math.isfinite(a) and math.isfinite(b):
        return a, b
    return u, v


def _point_segment_distance(q, a, b) -> tuple[float, float]:
    ab = (b[0] - a[0], b[1] - a[1])
    L2 = ab[0] ** 2 + ab[1] ** 2
    if L2 == 0:
        return math.dist(q, a), 0.0
    t = ((q[0] - a[0]) * ab[0] + (q[1] - a[1]) * ab[1]) / L2
    tc = min(1.0, max(0.0, t))
    return math.dist(q, (a[0] + tc * ab[0], a[1] + tc * ab[1])), t


def _march(curve: _Curve, start, direction: int, W: float):
    """March from ``start`` in one tangent direction; returns (points, closed, exit tag)."""
    prm = curve.params
    u, v = start
    theta, tan = curve.frame(u, v)
    tan = (direction * tan[0], direction * tan[1])
    tan0 = tan
    pts = [(u, v)]
    h = prm.h_max / 4
    travelled = 0.0
    while True:
        if len(pts) > prm.max_steps:
            raise SingularityError("step budget exhausted while tracing", (u, v))
        up, vp = u + h * tan[0], v + h * tan[1]
        ok = False
        c = curve.correct(up, vp)
        if c is not None:
            un, vn = c
            chord = (un - u, vn - v)
            clen = math.hypot(*chord)
            if 0.3 * h < clen < 2.0 * h and (chord[0] * tan[0] + chord[1] * tan[1]) > 0.9 * clen:
                theta_n, tan_n = curve.frame(un, vn)
                dtheta = abs(_angle_gap(theta, theta_n))
                if dtheta <= prm.theta_max:
                    ok = True
        if not ok:
            h *= 0.5
            if h < prm.h_min:
                raise SingularityError("step size underflow (near-singular curve point)", (u, v))
            continue
        if tan_n[0] * tan[0] + tan_n[1] * tan[1] < 0:
            tan_n = (-tan_n[0], -tan_n[1])
        travelled += clen
        # closure: the start lies on the newly accepted chord
        if travelled > 2.5 * clen and len(pts) > 3:
            dist, tpar = _point_segment_distance(start, (u, v), (un, vn))
            if dist < 0.01 * clen + 1e-10 and 0.0 <= tpar <= 1.0 and (
                tan0[0] * tan_n[0] + tan0[1] * tan_n[1] > 0
            ):
                pts.append(tuple(start))
                return pts, True, None
        tag = _exit_tag(un, vn, W)
        if tag is not None:
            pts.append(_land_on_boundary(curve, un, vn, tag, W))
            return pts, False, tag
        pts.append((un, vn))
        u, v, theta, tan = un, vn, theta_n, tan_n
        if dtheta < prm.theta_max / 4:
            h = min(h * 1.5, prm.h_max)


def trace_branch(
    p: LaurentPoly,
    seed: tuple[float, float],
    window: float = 12.0,
    params: TraceParams | None = None,
) -> Arc:
    """Trace the branch of the real curve through the real point ``seed = (x, y)``."""
    params = params or TraceParams()
    x, y = seed
    if x == 0 or y == 0:
        raise ValueError("seed must lie in (R*)^2")
    quadrant = (1 if x > 0 else -1, 1 if y > 0 else -1)
    curve = _Curve(p, quadrant, params)
    start = curve.correct(math.log(abs(x)), math.log(abs(y)))
    if start is None:
        raise SingularityError("corrector failed at the seed", (math.log(abs(x)), math.log(abs(y))))
    fwd, closed, tag_f = _march(curve, start, +1, window)
    if closed:
        return Arc(quadrant, np.array(fwd), True)
    bwd, closed_b, tag_b = _march(curve, start, -1, window)
    pts = bwd[::-1] + fwd[1:]
    return Arc(quadrant, np.array(pts), False, left_exit=tag_b, right_exit=tag_f)


# -- seeding ----------------------------------------------------------------


def _real_roots(roots: np.ndarray, rtol: float = 1e-8) -> list[float]:
    return [float(r.real) for r in roots if r != 0 and abs(r.imag) <= rtol * abs(r)]


def seed_points(
    p: LaurentPoly,
    window: float = 12.0,
    grid_n: int = 32,
    *,
    critical: bool = True,
    params: TraceParams | None = None,
) -> list[tuple[float, float]]:
    """Real curve points inside the log window.

    Points come from slicing along ``grid_n`` lines ``u = const`` and
    ``v = const`` per sign, plus (with ``critical``) the real points where the
    curve's log-normal is horizontal or vertical, which catches every compact
    oval regardless of the grid spacing.
    """
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    params = params or TraceParams()
    raw: list[tuple[float, float]] = []
    if critical:
        for h in log_gauss_pair(p):
            if not h.terms:
                continue
            try:
                sol = solve_system(p, h)
            except DegenerateResultantError:
                continue
            for z in sol.points:
                if np.all(np.abs(z.imag) <= 1e-8 * np.maximum(1.0, np.abs(z))):
                    raw.append((float(z[0].real), float(z[1].real)))
    lines = -window + (np.arange(grid_n) + 0.5) * (2 * window / grid_n)
    for fixed in ("x", "y"):
        for c in lines:
            for sgn in (1.0, -1.0):
                val = sgn * math.exp(c)
                for r in _real_roots(slice_poly(p, fixed, val).roots()):
                    raw.append((val, r) if fixed == "x" else (r, val))
    seeds = []
    for x, y in raw:
        if x == 0 or y == 0:
            continue
        u, v = math.log(abs(x)), math.log(abs(y))
        if abs(u) > window or abs(v) > window:
            continue
        curve = _Curve(p, (1 if x > 0 else -1, 1 if y > 0 else -1), params)
        try:
            c = curve.correct(u, v)
        except SingularityError:
            continue
        if c is None or abs(c[0]) > window or abs(c[1]) > window:
            continue
        if abs(curve.eval(*c)[0]) >= 1e-9:
            continue
        seeds.append((curve.s1 * math.exp(c[0]), curve.s2 * math.exp(c[1])))
    return seeds


def _polyline_distance(q: np.ndarray, poly: np.ndarray) -> float:
    if len(poly) == 1:
        return float(np.linalg.norm(q - poly[0]))
    a = poly[:-1]
    ab = poly[1:] - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    L2[L2 == 0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", q - a, ab) / L2, 0.0, 1.0)
    d = a + t[:, None] * ab - q
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", d, d))))


def _canonical(arc: Arc) -> Arc:
    pts = arc.log_points
    if arc.closed:
        body = pts[:-1]
        k = min(range(len(body)), key=lambda i: (body[i, 0], body[i, 1]))
        body = np.roll(body, -k, axis=0)
        return replace(arc, log_points=np.vstack([body, body[:1]]))
    if (pts[-1, 0], pts[-1, 1]) < (pts[0, 0], pts[0, 1]):
        return arc.reversed()
    return arc


_WINDOW_FLAGS = ("unassignable-end", "unmatched-end", "unstabilized-end")


def _trace_once(p: LaurentPoly, window: float, grid_n: int, params: TraceParams, glue: bool) -> ArcSet:
    arcs: list[Arc] = []
    for seed in seed_points(p, window, grid_n, params=params):
        quadrant = (1 if seed[0] > 0 else -1, 1 if seed[1] > 0 else -1)
        q = np.array([math.log(abs(seed[0])), math.log(abs(seed[1]))])
        if any(
            a.quadrant == quadrant and _polyline_distance(q, a.log_points) < params.seed_dedup
            for a in arcs
        ):
            continue
        arcs.append(trace_branch(p, seed, window, params))
    arcs = [_canonical(a) for a in arcs]
    arcs.sort(key=lambda a: (QUADRANTS.index(a.quadrant), a.log_points[0, 0], a.log_points[0, 1]))
    arcset = ArcSet(p, arcs, window)
    arcset.open_ends = [(k, e) for k, a in enumerate(arcs) if not a.closed for e in (0, 1)]
    arcset.components = [[k] for k in range(len(arcs))]
    if glue and arcs:
        from .tentacles import glue_arcset

        glue_arcset(arcset)
    return arcset


def trace_all(
    p: LaurentPoly,
    window: float = 12.0,
    grid_n: int = 32,
    *,
    params: TraceParams | None = None,
    glue: bool = True,
    max_window: float = 48.0,
) -> ArcSet:
    """Trace every branch found by :func:`seed_points` and glue tentacles.

    When some open end has not yet settled onto its asymptote the window is
    doubled (keeping the seed-grid spacing) up to ``max_window``.
    """
    params = params or TraceParams()
    W, n = window, grid_n
    while True:
        arcset = _trace_once(p, W, n, params, glue)
        bad = [f for f in arcset.flags if f.startswith(_WINDOW_FLAGS)]
        if not glue or not bad or 2 * W > max_window:
            break
        W, n = 2 * W, 2 * n
    if W != window:
        arcset.flags.append(f"window-enlarged: traced on [-{W:g}, {W:g}]^2")
    return arcset


def arcs_to_csv_rows(arcset: ArcSet):
    """Rows of (arc id, quadrant, x, y, u, v)."""
    for k, a in enumerate(arcset.arcs):
        xy = a.points
        for (x, y), (u, v) in zip(xy, a.log_points):
            yield k, quadrant_label(a.quadrant), x, y, u, v
