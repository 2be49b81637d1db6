import math

import numpy as np
import pytest

from amoeba_lab.laurent import evaluate, parse
from amoeba_lab.tracer import (
    QUADRANTS,
    TraceParams,
    arcs_to_csv_rows,
    quadrant_label,
    seed_points,
    trace_all,
    trace_branch,
)

from conftest import CIRCLE, EMPTY_CIRCLE, HARNACK_CUBIC, LINE


def residual(p, arc):
    xy = arc.points
    return np.max(np.abs(evaluate(p, xy[:, 0], xy[:, 1])) / p.magnitude(xy[:, 0], xy[:, 1]))


def test_line_has_three_open_arcs():
    p = parse(LINE)
    arcs = trace_all(p)
    assert sorted(a.quadrant for a in arcs.arcs) == sorted([(1, -1), (-1, 1), (-1, -1)])
    assert not any(a.closed for a in arcs.arcs)
    for a in arcs.arcs:
        assert residual(p, a) < 1e-10


def test_line_arc_matches_closed_form():
    # on the (-,-) branch y = -1 - x, so v = log(1 - e^u)
    arcs = trace_all(parse(LINE))
    arc = next(a for a in arcs.arcs if a.quadrant == (-1, -1))
    u, v = arc.log_points.T
    inside = u < -1e-3
    np.testing.assert_allclose(v[inside], np.log1p(-np.exp(u[inside])), atol=1e-9)


def test_open_ends_lie_on_window_boundary():
    arcs = trace_all(parse(LINE), window=8.0)
    for a in arcs.arcs:
        for q in (a.log_points[0], a.log_points[-1]):
            assert max(abs(q[0]), abs(q[1])) == pytest.approx(8.0, abs=1e-9)
        assert a.left_exit is not None and a.right_exit is not None


def test_step_controls_respected():
    p = parse(HARNACK_CUBIC)
    prm = TraceParams()
    for a in trace_all(p, params=prm).arcs:
        steps = np.linalg.norm(np.diff(a.log_points, axis=0), axis=1)
        assert steps.max() <= 2 * prm.h_max
        xy = a.points
        gx = evaluate(p.scale_terms(1, 0), xy[:, 0], xy[:, 1]).real
        gy = evaluate(p.scale_terms(0, 1), xy[:, 0], xy[:, 1]).real
        th = np.arctan2(gy, gx) % math.pi
        d = np.diff(th) % math.pi
        d = np.minimum(d, math.pi - d)
        assert d.max() <= prm.theta_max * 1.05


def test_harnack_cubic_has_one_oval():
    arcs = trace_all(parse(HARNACK_CUBIC))
    closed = [a for a in arcs.arcs if a.closed]
    assert len(closed) == 1
    lp = closed[0].log_points
    assert np.allclose(lp[0], lp[-1])
    assert arcs.p == 1
    assert len(arcs.components) == 2


def test_empty_real_locus():
    arcs = trace_all(parse(EMPTY_CIRCLE))
    assert arcs.arcs == [] and arcs.p == 0 and arcs.t == 0


def test_circle_open_ends_and_tentacles():
    arcs = trace_all(parse(CIRCLE))
    assert len(arcs.arcs) == 4
    assert len(arcs.open_ends) == 8
    assert arcs.t == 4  # x = +-1 on y = 0, y = +-1 on x = 0
    assert arcs.components == [[0, 1, 2, 3]]


def test_trace_is_deterministic():
    a = trace_all(parse(HARNACK_CUBIC))
    b = trace_all(parse(HARNACK_CUBIC))
    assert len(a.arcs) == len(b.arcs)
    for x, y in zip(a.arcs, b.arcs):
        assert np.array_equal(x.log_points, y.log_points)


def test_closed_arc_traced_from_any_seed():
    p = parse(HARNACK_CUBIC)
    oval = next(a for a in trace_all(p).arcs if a.closed)
    mid = oval.points[len(oval) // 3]
    again = trace_branch(p, tuple(mid))
    assert again.closed
    assert again.length() == pytest.approx(oval.length(), rel=1e-3)


def test_seed_points_are_on_curve():
    p = parse(HARNACK_CUBIC)
    for x, y in seed_points(p, 12.0, 16):
        assert abs(evaluate(p, x, y)) <= 1e-8 * p.magnitude(x, y)


def test_invalid_seed():
    with pytest.raises(ValueError):
        trace_branch(parse(LINE), (0.0, -1.0))


def test_csv_rows_and_labels():
    arcs = trace_all(parse(LINE))
    rows = list(arcs_to_csv_rows(arcs))
    assert len(rows) == sum(len(a) for a in arcs.arcs)
    assert {r[1] for r in rows} == {quadrant_label(q) for q in [(1, -1), (-1, 1), (-1, -1)]}
    assert quadrant_label(QUADRANTS[0]) == "(+,+)"


SLOW_TENTACLE = (
    "0.8151430770671912*y - 0.30357405822394856*x*y + 0.014707916802315868*x^2"
    " + 1.0137861543356208*x^2*y + 1.4551449643883396*x^3 + 1.8959376194094206*x*y^3"
    " + 0.8062742642474912*x^3*y - 0.09541171212498778*x^2*y^3"
)


def test_window_grows_until_ends_settle():
    p = parse(SLOW_TENTACLE)
    fixed = trace_all(p, max_window=12.0)
    assert any(f.startswith("unassignable-end") for f in fixed.flags)
    grown = trace_all(p)
    assert "window-enlarged: traced on [-24, 24]^2" in grown.flags
    assert not any(f.startswith(("unassignable", "unstabilized", "unmatched")) for f in grown.flags)
