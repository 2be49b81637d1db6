"""The ten acceptance criteria, one test each.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import math
import time
from fractions import Fraction

import numpy as np

from amoeba_lab.classify import HARNACK, INCONCLUSIVE, NOT_HARNACK
from amoeba_lab.cli import build_report, main
from amoeba_lab.config import RunConfig
from amoeba_lab.jsonio import dumps
from amoeba_lab.lattice import polygon_from_points
from amoeba_lab.laurent import DegenerateSupportError, parse
from amoeba_lab.raster import rasterize

from conftest import (
    CIRCLE,
    DENSE_CUBIC,
    EMPTY_CIRCLE,
    LINE,
    classify_run,
    curvature_run,
    key,
    named_suite,
    random_suite,
    record,
)
from test_lattice import brute_force


class Checker:
    """Collects failures so one record line summarizes a whole criterion."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.failures: list[str] = []
        self.notes: list[str] = []

    def check(self, ok: bool, msg: str) -> None:
        if not ok:
            self.failures.append(msg)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        detail = "; ".join(self.failures[:3]) if self.failures else "; ".join(self.notes)
        record(self.number, self.title, not self.failures, detail)
        return False

    def done(self) -> None:
        assert not self.failures, "\n".join(self.failures)


def test_criterion_01_line_harnack_target(capsys):
    with Checker(1, "line: total curvature pi, per-arc pi/2, pi/4, pi/4, classify exit 0, < 5 s") as c:
        t0 = time.perf_counter()
        code = main(["classify", "-p", LINE])
        elapsed = time.perf_counter() - t0
        capsys.readouterr()
        arcs, _, rep, _ = curvature_run(key(parse(LINE)))
        per_arc = sorted(r.total for r in rep.per_arc)
        c.check(abs(rep.total - math.pi) <= 1e-2, f"total {rep.total}")
        c.check(len(per_arc) == 3, f"{len(per_arc)} arcs")
        for got, want in zip(per_arc, [math.pi / 4, math.pi / 4, math.pi / 2]):
            c.check(abs(got - want) <= 1e-2, f"arc value {got} vs {want}")
        c.check(code == 0, f"exit {code}")
        c.check(elapsed < 5.0, f"runtime {elapsed:.2f} s")
        c.notes.append(f"total={rep.total:.5f} exit={code} {elapsed:.2f}s")
    c.done()


def test_criterion_02_crofton_agreement():
    with Checker(2, "direct vs Crofton curvature on line, circle, 20 random polynomials, < 3 min") as c:
        polys = [parse(LINE), parse(CIRCLE)] + random_suite()
        elapsed = 0.0
        worst = 0.0
        for p in polys:
            _, _, rep, secs = curvature_run(key(p))
            elapsed += secs
            tol = max(0.02 * rep.bound, 0.05)
            diff = abs(rep.total - rep.crofton_total)
            worst = max(worst, diff / tol)
            c.check(diff <= tol, f"{key(p)[:40]}: |{rep.total:.4f} - {rep.crofton_total:.4f}| > {tol:.4f}")
        c.check(elapsed < 180.0, f"runtime {elapsed:.1f} s")
        c.notes.append(f"{len(polys)} inputs, worst diff/tol={worst:.3f}, {elapsed:.1f}s")
    c.done()


def test_criterion_03_curvature_bound():
    with Checker(3, "total curvature <= 2 pi vol * 1.02 on the whole suite") as c:
        worst = 0.0
        for p in named_suite():
            _, _, rep, _ = curvature_run(key(p))
            worst = max(worst, rep.total / rep.bound)
            c.check(rep.total <= rep.bound * 1.02, f"{key(p)[:40]}: {rep.total} > 1.02*{rep.bound}")
        c.notes.append(f"max total/bound={worst:.4f}")
    c.done()


def test_criterion_04_pick_identity():
    with Checker(4, "Pick identity exact on 200 random supports, checked by brute force") as c:
        rng = np.random.default_rng(4)
        done = 0
        while done < 200:
            pts = [tuple(int(v) for v in q) for q in rng.integers(-7, 8, size=(int(rng.integers(3, 10)), 2))]
            try:
                P = polygon_from_points(pts)
            except DegenerateSupportError:
                continue
            done += 1
            area, g, s = brute_force(P.vertices)
            c.check(P.vol == P.g + Fraction(P.s, 2) - 1, f"Pick fails for {pts}")
            c.check((P.g, P.s) == (g, s), f"counts {(P.g, P.s)} vs brute force {(g, s)}")
            c.check(abs(float(P.vol) - area) < 1e-9, f"area {P.vol} vs {area}")
        c.notes.append(f"{done} polygons")
    c.done()


def test_criterion_05_gauss_degree_and_parity():
    with Checker(5, "fiber degree 1/4/9 for line/circle/dense cubic; total - real even everywhere") as c:
        for text, degree in [(LINE, 1), (CIRCLE, 4), (DENSE_CUBIC, 9)]:
            _, scan, _, _ = curvature_run(key(parse(text)))
            c.check(scan.expected == degree, f"{text}: expected {scan.expected}")
            generic = [s for s in scan.samples if s.theta not in scan.flagged_thetas]
            c.check(len(generic) >= 60, f"{text}: only {len(generic)} generic samples")
            bad = [s.total_count for s in generic if s.total_count != degree]
            c.check(not bad, f"{text}: fiber sizes {sorted(set(bad))} != {degree}")
        samples = 0
        for p in named_suite() + [parse(DENSE_CUBIC)]:
            _, scan, _, _ = curvature_run(key(p))
            for s in scan.samples:
                samples += 1
                c.check((s.total_count - s.real_count) % 2 == 0, f"{key(p)[:30]} theta={s.theta}: odd")
        c.notes.append(f"parity on {samples} samples")
    c.done()


def test_criterion_06_negative_controls(capsys):
    with Checker(6, "x^2+y^2+1 empty, curvature 0, not totally real, exit 1; circle never Harnack") as c:
        arcs, scan, rep, _ = curvature_run(key(parse(EMPTY_CIRCLE)))
        c.check(arcs.arcs == [], "arcs not empty")
        c.check(rep.total == 0.0, f"total {rep.total}")
        c.check(not scan.totally_real, "totally_real")
        code = main(["classify", "-p", EMPTY_CIRCLE])
        c.check(code == 1, f"exit {code}")
        code_c = main(["classify", "-p", CIRCLE])
        capsys.readouterr()
        c.check(code_c != 0, "circle classified Harnack")
        c.check(classify_run(key(parse(CIRCLE))).verdict != HARNACK, "circle verdict Harnack")
        c.notes.append(f"exit codes {code}, {code_c}")
    c.done()


def _firm_failures(v) -> list[str]:
    names = ["totally_real", "amoeba_smooth", "is_m_curve", "cond1", "cond2", "cond3"]
    return [n for n in names if not getattr(v, n)]


def test_criterion_07_equivalence_consistency():
    with Checker(7, "no firm max_curvature together with a firm failure of another leg") as c:
        verdicts = {HARNACK: 0, NOT_HARNACK: 0, INCONCLUSIVE: 0}
        suite = named_suite() + [parse(DENSE_CUBIC)]
        for p in suite:
            v = classify_run(key(p))
            verdicts[v.verdict] += 1
            if v.verdict == INCONCLUSIVE:
                continue
            fails = _firm_failures(v)
            c.check(not (v.max_curvature and fails), f"{key(p)[:40]}: max curvature but {fails}")
            if v.verdict == HARNACK:
                c.check(v.max_curvature and not fails, f"{key(p)[:40]}: Harnack without all legs")
            if v.verdict == NOT_HARNACK:
                c.check(not v.max_curvature, f"{key(p)[:40]}: NotHarnack with max curvature")
                c.check(not (v.totally_real and v.amoeba_smooth and not fails),
                        f"{key(p)[:40]}: NotHarnack while every other leg holds")
        c.check(verdicts[HARNACK] >= 2, "line and Harnack cubic should be Harnack")
        c.notes.append(", ".join(f"{k}={n}" for k, n in verdicts.items()))
    c.done()


def test_criterion_08_component_bound():
    with Checker(8, "smooth inflection-free amoebas: total <= 2 pi p + pi t + 0.05") as c:
        checked = 0
        for p in named_suite():
            _, _, rep, _ = curvature_run(key(p))
            if not (rep.smooth and rep.inflection_free and rep.per_arc):
                continue
            checked += 1
            c.check(rep.total <= rep.component_bound + 0.05,
                    f"{key(p)[:40]}: {rep.total} > {rep.component_bound} + 0.05")
        c.check(checked >= 2, f"only {checked} qualifying inputs")
        c.notes.append(f"{checked} qualifying inputs")
    c.done()


def test_criterion_09_amoeba_area():
    with Checker(9, "line raster area within 10% of pi^2/2; area <= pi^2 vol * 1.05 on the suite; < 2 min each") as c:
        t0 = time.perf_counter()
        line = rasterize(parse(LINE), 6.0, 256, 64)
        slowest = time.perf_counter() - t0
        target = math.pi**2 / 2
        c.check(abs(line.area_estimate - target) <= 0.1 * target, f"line area {line.area_estimate}")
        worst = 0.0
        for p in named_suite():
            t0 = time.perf_counter()
            r = rasterize(p, 6.0, 256, 64)
            slowest = max(slowest, time.perf_counter() - t0)
            worst = max(worst, r.area_estimate / r.area_bound)
            c.check(r.area_estimate <= r.area_bound * 1.05, f"{key(p)[:40]}: {r.area_estimate} > {r.area_bound}")
        c.check(slowest < 120.0, f"slowest raster {slowest:.1f} s")
        c.notes.append(f"line area={line.area_estimate:.4f} (target {target:.4f}), max area/bound={worst:.3f}, "
                       f"slowest {slowest:.2f}s")
    c.done()


def test_criterion_10_determinism():
    with Checker(10, "report twice with the same seed is byte-identical") as c:
        for text in (LINE, "1 - x^2*y + 3*x*y - y^2*x"):
            cfg = RunConfig(polynomial=text, seed=17)
            a = dumps(build_report(cfg))
            b = dumps(build_report(cfg))
            c.check(a == b, f"{text}: reports differ")
        c.notes.append("2 inputs")
    c.done()
