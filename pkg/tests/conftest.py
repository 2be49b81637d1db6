import time
from functools import lru_cache

import numpy as np
import pytest

from amoeba_lab.classify import classify
from amoeba_lab.curvature import total_curvature
from amoeba_lab.gauss import totally_real_scan
from amoeba_lab.laurent import LaurentPoly, PolyError, format_poly, parse
from amoeba_lab.tracer import trace_all

LINE = "1+x+y"
CIRCLE = "x^2+y^2-1"
EMPTY_CIRCLE = "x^2+y^2+1"
# symmetric dense cubic whose real part is an oval plus one arc through all
# nine boundary points
HARNACK_CUBIC = "1+x^3+y^3+5*x+5*y+5*x^2+5*y^2+5*x^2*y+5*x*y^2-40*x*y"
DENSE_CUBIC = "1+x+y+x^2+x*y+y^2+x^3+x^2*y+x*y^2+y^3"


def random_suite(seed: int = 0, n: int = 20) -> list[LaurentPoly]:
    """Polynomials with random support in [0,3]^2 and coefficients in [-2,2]."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        mask = rng.random(16) < 0.5
        c = rng.uniform(-2, 2, 16)
        terms = [(k // 4, k % 4, float(c[k])) for k in range(16) if mask[k]]
        try:
            out.append(LaurentPoly.from_terms(terms))
        except PolyError:
            continue
    return out


def named_suite() -> list[LaurentPoly]:
    return [parse(s) for s in (LINE, CIRCLE, EMPTY_CIRCLE, HARNACK_CUBIC)] + random_suite()


@lru_cache(maxsize=None)
def curvature_run(text: str):
    """(arcs, fiber scan, curvature report, seconds) for a formatted polynomial."""
    p = parse(text)
    t0 = time.perf_counter()
    arcs = trace_all(p)
    scan = totally_real_scan(p, 64)
    rep = total_curvature(arcs, p, scan=scan)
    return arcs, scan, rep, time.perf_counter() - t0


@lru_cache(maxsize=None)
def classify_run(text: str):
    return classify(parse(text))


def key(p: LaurentPoly) -> str:
    return format_poly(p)


@pytest.fixture(scope="session")
def suite():
    return named_suite()


ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(number: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (title, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
