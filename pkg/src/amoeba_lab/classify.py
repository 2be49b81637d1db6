"""Simple-Harnack verdict from curvature, Gauss-map and positional evidence.

A curve is declared Harnack only when three independent measurements agree:
the total curvature of the real amoeba reaches ``2 pi vol``, every sampled
fiber of the logarithmic Gauss map is real, and the real amoeba has no pinch
points.  The topological side (component count and the cyclic arrangement of
boundary points) is checked as well; these are expected to agree with the
numerical legs, and any disagreement is reported as inconclusive.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .config import RunConfig
from .curvature import CurvatureReport, LiftAmbiguityError, pinch_detect, total_curvature
from .gauss import ScanError, ScanReport, totally_real_scan
from .lattice import NewtonPolygon, newton_polygon
from .laurent import LaurentPoly
from .tentacles import UnassignableEndError, real_edge_roots, tentacle_analysis
from .tracer import ArcSet, SingularityError, TraceParams, trace_all

__all__ = [
    "HarnackVerdict",
    "PositionalReport",
    "boundary_cycle",
    "check_conditions",
    "classify",
    "m_curve_check",
    "tentacle_analysis",
    "UnassignableEndError",
]

HARNACK = "Harnack"
NOT_HARNACK = "NotHarnack"
INCONCLUSIVE = "Inconclusive"
EXIT_CODES = {HARNACK: 0, NOT_HARNACK: 1, INCONCLUSIVE: 2}


def boundary_cycle(arcs: ArcSet, component: list[int]) -> list[int] | None:
    """Divisor points met while walking once around a glued component.

    Returns indices into ``arcs.divisor_points`` in traversal order, or
    ``None`` when the walk does not close up (an end without a partner).
    """
    points = arcs.divisor_points
    at_end: dict[tuple[int, int], int] = {}
    for k, d in enumerate(points):
        for end in d.ends:
            at_end[tuple(end)] = k
    comp = set(component)
    open_arcs = [a for a in component if not arcs.arcs[a].closed]
    if not open_arcs:
        return []
    start = (min(open_arcs), 1)
    seq = []
    cur = start
    for _ in range(2 * len(points) + 2):
        k = at_end.get(cur)
        if k is None:
            return None
        seq.append(k)
        others = [tuple(e) for e in points[k].ends if tuple(e) != cur]
        if len(others) != 1 or others[0][0] not in comp:
            return None
        arc, end = others[0]
        cur = (arc, 1 - end)
        if cur == start:
            return seq
    return None


def _is_cyclic_rotation(seq: list[int], target: list[int]) -> bool:
    if len(seq) != len(target):
        return False
    n = len(seq)
    return any(all(seq[(s + k) % n] == target[k] for k in range(n)) for s in range(n))


@dataclass
class PositionalReport:
    cond1: bool
    cond2: bool
    cond3: bool
    carrier: int | None  # index of the component holding the boundary points
    side_sequence: list[int]
    per_side: list[int]
    budget: list[int]
    intercept_order_consistent: bool | None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "cond1": self.cond1,
            "cond2": self.cond2,
            "cond3": self.cond3,
            "carrier_component": self.carrier,
            "side_sequence": self.side_sequence,
            "per_side": self.per_side,
            "budget": self.budget,
            "intercept_order_consistent": self.intercept_order_consistent,
            "notes": self.notes,
        }


def check_conditions(arcs: ArcSet, poly: NewtonPolygon | None = None) -> PositionalReport:
    """Positional conditions on the boundary points of the glued real curve.

    * cond1: one component carries all ``d_i`` boundary points of every side;
    * cond2: along that component the points of each side are consecutive;
    * cond3: the sides appear in the cyclic order of the polygon boundary
      (either orientation).
    """
    poly = poly or newton_polygon(arcs.poly)
    budget = [e.length for e in poly.edges]
    per_side = [0] * len(budget)
    for d in arcs.divisor_points:
        per_side[d.side] += 1
    notes = []
    fail = PositionalReport(False, False, False, None, [], per_side, budget, None, notes)
    if not arcs.divisor_points:
        notes.append("no boundary points on the real curve")
        return fail
    carrier = None
    seq: list[int] = []
    for ci, comp in enumerate(arcs.components):
        cyc = boundary_cycle(arcs, comp)
        if cyc and len(cyc) > len(seq):
            carrier, seq = ci, cyc
    if carrier is None:
        notes.append("no component closes up through the boundary points")
        return fail
    sides = [arcs.divisor_points[k].side for k in seq]
    counts = Counter(sides)
    cond1 = all(counts.get(i, 0) == d for i, d in enumerate(budget)) and len(seq) == len(arcs.divisor_points)
    # contiguity: rotate so the sequence starts at a side change, then count blocks
    n = len(sides)
    changes = [k for k in range(n) if sides[k] != sides[k - 1]]
    if not changes:
        blocks = [sides[0]]
    else:
        rot = sides[changes[0] :] + sides[: changes[0]]
        blocks = [rot[0]] + [rot[k] for k in range(1, n) if rot[k] != rot[k - 1]]
    cond2 = cond1 and len(blocks) == len(set(blocks))
    order = list(range(len(budget)))
    cond3 = cond2 and (
        _is_cyclic_rotation(blocks, order) or _is_cyclic_rotation(blocks, order[::-1])
    )
    # reported only: within each side, are intercepts monotone along the walk?
    consistent = None
    if cond2:
        consistent = True
        for side in set(sides):
            ws = [math.log(abs(arcs.divisor_points[k].root)) for k in seq if arcs.divisor_points[k].side == side]
            diffs = [b - a for a, b in zip(ws, ws[1:])]
            if diffs and not (all(x >= 0 for x in diffs) or all(x <= 0 for x in diffs)):
                consistent = False
    return PositionalReport(cond1, cond2, cond3, carrier, sides, per_side, budget, consistent, notes)


def m_curve_check(components: list[list[int]], g: int) -> bool:
    """Harnack's bound is attained: exactly ``g + 1`` glued components."""
    return len(components) == g + 1


@dataclass
class HarnackVerdict:
    is_m_curve: bool
    weak_max_position: bool
    cond1: bool
    cond2: bool
    cond3: bool
    amoeba_smooth: bool
    max_curvature: bool
    totally_real: bool
    verdict: str
    evidence: dict = field(default_factory=dict)
    reasons: list[str] = field(default_factory=list)
    # intermediate results for callers that write them out; not serialized
    polygon: NewtonPolygon | None = field(default=None, repr=False)
    arcs: ArcSet | None = field(default=None, repr=False)
    curvature: CurvatureReport | None = field(default=None, repr=False)
    scan: ScanReport | None = field(default=None, repr=False)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "is_m_curve": self.is_m_curve,
            "weak_max_position": self.weak_max_position,
            "cond1": self.cond1,
            "cond2": self.cond2,
            "cond3": self.cond3,
            "amoeba_smooth": self.amoeba_smooth,
            "max_curvature": self.max_curvature,
            "totally_real": self.totally_real,
            "reasons": self.reasons,
            "evidence": self.evidence,
        }


def _firm(value: bool, near: bool) -> str:
    """'yes', 'no', or 'near' (a miss within the near-miss band)."""
    if value:
        return "yes"
    return "near" if near else "no"


def classify(p: LaurentPoly, config: RunConfig | None = None, *, mapper: Callable = map) -> HarnackVerdict:
    config = config or RunConfig()
    tol = config.tolerances
    poly = newton_polygon(p)
    bound = 2 * math.pi * float(poly.vol)
    reasons: list[str] = []
    evidence: dict = {
        "vol": [poly.vol.numerator, poly.vol.denominator],
        "g": poly.g,
        "s": poly.s,
        "bound": bound,
    }

    def inconclusive(msg: str, **kw) -> HarnackVerdict:
        reasons.append(msg)
        return HarnackVerdict(False, False, False, False, False, False, False, False, INCONCLUSIVE,
                              evidence, reasons, polygon=poly, **kw)

    try:
        arcs = trace_all(p, config.window, config.grid_n, params=TraceParams())
    except SingularityError as exc:
        return inconclusive(f"tracing failed: {exc}")
    try:
        scan = totally_real_scan(
            p, config.theta_samples, seed=config.seed, mapper=mapper,
            imag_tol=tol.imag, residual_tol=tol.residual, cluster_tol=tol.cluster,
        )
    except ScanError as exc:
        return inconclusive(f"degenerate fibers: {exc}", arcs=arcs)
    try:
        curv = total_curvature(
            arcs, p, n_samples=config.theta_samples, seed=config.seed, scan=scan, pinch_tol=tol.pinch
        )
    except LiftAmbiguityError as exc:
        return inconclusive(f"curvature lift failed: {exc}", arcs=arcs, scan=scan)

    # curvature leg
    rel_gap = (bound - curv.total) / bound
    max_curv = rel_gap <= tol.curvature_rel
    curv_near = not max_curv and rel_gap <= tol.near_miss * tol.curvature_rel
    # Gauss-map leg: every sample must be fully real and of full degree
    full = [s.real_count == s.total_count == scan.expected for s in scan.samples]
    misses = full.count(False) + scan.degenerate_count
    totally_real = scan.totally_real
    real_near = not totally_real and misses <= tol.near_miss and scan.full_fraction > 0
    # smoothness leg
    smooth = not curv.pinches
    wide = pinch_detect(arcs, tol=tol.near_miss * tol.pinch, transverse=tol.pinch_angle)
    smooth_near = smooth and bool(wide)
    # topology
    comps = len(arcs.components)
    m_curve = m_curve_check(arcs.components, poly.g)
    edge_roots = real_edge_roots(p, poly)
    per_side = [0] * len(poly.edges)
    for d in arcs.divisor_points:
        per_side[d.side] += 1
    budget = [e.length for e in poly.edges]
    paired = all(len(d.ends) == 2 for d in arcs.divisor_points)
    weak_max = paired and per_side == budget and all(len(r) == d for r, d in zip(edge_roots, budget))
    pos = check_conditions(arcs, poly)

    evidence.update(
        {
            "total_curvature": curv.total,
            "crofton_total": curv.crofton_total,
            "relative_gap": rel_gap,
            "fiber_degree": scan.expected,
            "full_fraction": scan.full_fraction,
            "min_real": scan.min_real,
            "max_real": scan.max_real,
            "degenerate_samples": scan.degenerate_count,
            "pinch_points": len(curv.pinches),
            "near_pinch_points": len(wide),
            "components": comps,
            "compact_components": curv.p,
            "tentacles": curv.t,
            "component_bound": curv.component_bound,
            "truncation_uncertainty": curv.truncation_uncertainty,
            "boundary_points_per_side": per_side,
            "side_lengths": budget,
            "real_edge_roots": [len(r) for r in edge_roots],
            "positional": pos.to_json(),
            "trace_flags": list(arcs.flags),
            "curvature_flags": list(curv.flags),
            "legs": {
                "curvature": _firm(max_curv, curv_near),
                "gauss_map": _firm(totally_real, real_near),
                "smooth_amoeba": "near" if smooth_near else ("yes" if smooth else "no"),
                "positional": "yes" if (m_curve and weak_max and pos.cond1 and pos.cond2 and pos.cond3) else "no",
            },
        }
    )
    verdict_kw = dict(
        is_m_curve=m_curve, weak_max_position=weak_max, cond1=pos.cond1, cond2=pos.cond2, cond3=pos.cond3,
        amoeba_smooth=smooth, max_curvature=max_curv, totally_real=totally_real,
        evidence=evidence, reasons=reasons, polygon=poly, arcs=arcs, curvature=curv, scan=scan,
    )

    window_flags = [f for f in arcs.flags if f.startswith(("unassignable-end", "unmatched-end", "unpaired"))]
    if any(n > d for n, d in zip(per_side, budget)):
        reasons.append("tentacle budget exceeded on some side")
    if m_curve and weak_max and pos.cond1 and smooth and not (pos.cond2 and pos.cond3):
        reasons.append("cyclic-order conditions fail although the curve is a smooth M-curve in weak maximal position")
    positional_ok = m_curve and weak_max and pos.cond1 and pos.cond2 and pos.cond3

    if max_curv and totally_real and smooth and not smooth_near:
        if positional_ok and not reasons and not window_flags:
            chain = 2 * math.pi * poly.g + math.pi * poly.s - 2 * math.pi
            evidence["boundary_chain"] = [chain, curv.component_bound]
            if chain > curv.component_bound + tol.component_slack:
                reasons.append("lattice chain exceeds the component bound")
            else:
                return HarnackVerdict(verdict=HARNACK, **verdict_kw)
        reasons.append("numerical legs agree on maximality but the positional check disagrees")
        reasons.extend(window_flags)
        return HarnackVerdict(verdict=INCONCLUSIVE, **verdict_kw)

    firm_fail_curv = not max_curv and not curv_near
    firm_fail_real = not totally_real and not real_near
    if firm_fail_curv and firm_fail_real:
        if positional_ok and smooth:
            reasons.append("positional conditions hold although curvature and Gauss-map legs fail")
            return HarnackVerdict(verdict=INCONCLUSIVE, **verdict_kw)
        return HarnackVerdict(verdict=NOT_HARNACK, **verdict_kw)
    if curv_near:
        reasons.append(f"curvature within {tol.near_miss:g}x of the maximality threshold")
    if real_near:
        reasons.append(f"only {misses} Gauss-map samples are not fully real")
    if smooth_near:
        reasons.append("pinch-like approach within the widened tolerance")
    if max_curv != totally_real:
        reasons.append("curvature and Gauss-map legs disagree")
    reasons.extend(window_flags)
    return HarnackVerdict(verdict=INCONCLUSIVE, **verdict_kw)
