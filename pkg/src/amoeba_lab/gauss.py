"""The logarithmic Gauss map and its fibers over real directions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lattice import newton_polygon
from .laurent import LaurentPoly, log_gauss_pair
from .resultant import DegenerateResultantError, solve_system

log = logging.getLogger(__name__)


class UndefinedDirectionError(ValueError):
    pass


class ScanError(RuntimeError):
    pass


def rp1_angle(a: float, b: float) -> float:
    """Projective angle of ``[a : b]`` reduced to ``[0, pi)``."""
    if a == 0 and b == 0:
        raise UndefinedDirectionError("both components of the direction vanish")
    theta = math.atan2(b, a) % math.pi
    return 0.0 if theta >= math.pi else theta


def gauss_direction(p: LaurentPoly, x: float, y: float) -> float:
    """Angle in [0, pi) of ``[x f_x : y f_y]`` at a real point of the curve."""
    xfx, yfy = log_gauss_pair(p)
    a = float(np.real(xfx(x, y)))
    b = float(np.real(yfy(x, y)))
    scale = float(p.magnitude(x, y))
    if math.hypot(a, b) <= 1e-14 * scale:
        raise UndefinedDirectionError(f"logarithmic Gauss map undefined at ({x}, {y})")
    return rp1_angle(a, b)


def fiber_system(p: LaurentPoly, theta: float) -> tuple[LaurentPoly, LaurentPoly]:
    """``(f, sin(theta) x f_x - cos(theta) y f_y)``; common zeros are the fiber."""
    a, b = log_gauss_pair(p)
    st, ct = math.sin(theta), math.cos(theta)
    terms = [(i, j, st * c) for i, j, c in a.terms] + [(i, j, -ct * c) for i, j, c in b.terms]
    return p, LaurentPoly.from_terms(terms, check=False)


@dataclass
class FiberReport:
    theta: float
    total_count: int
    real_count: int
    expected: int
    residuals: float
    real_points: list[tuple[float, float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def short(self) -> bool:
        return self.total_count < self.expected

    def to_json(self) -> dict:
        return {"theta": self.theta, "total": self.total_count, "real": self.real_count}


def count_fiber(
    p: LaurentPoly,
    theta: float,
    *,
    expected: int | None = None,
    imag_tol: float = 1e-7,
    residual_tol: float = 1e-7,
    cluster_tol: float = 1e-6,
) -> FiberReport:
    """Solve for the Gauss fiber over ``theta`` and classify its points.

    Raises :class:`DegenerateResultantError` when the elimination breaks down;
    the caller is expected to perturb ``theta`` and retry.
    """
    if expected is None:
        expected = int(2 * newton_polygon(p).vol)
    f, h = fiber_system(p, theta)
    if not h.terms:
        raise DegenerateResultantError("direction polynomial vanishes identically")
    sol = solve_system(f, h, residual_tol=residual_tol, cluster_tol=cluster_tol)
    pts = sol.points
    mags = np.maximum(1.0, np.abs(pts))
    is_real = np.all(np.abs(pts.imag) < imag_tol * mags, axis=1)
    real_pts = [(float(z[0].real), float(z[1].real)) for z in pts[is_real]]
    res = float(sol.residuals.max()) if len(sol.residuals) else 0.0
    return FiberReport(
        theta=theta,
        total_count=len(pts),
        real_count=int(is_real.sum()),
        expected=expected,
        residuals=res,
        real_points=sorted(real_pts),
        warnings=list(sol.warnings),
    )


@dataclass
class ScanReport:
    samples: list[FiberReport]
    expected: int
    flagged_thetas: list[float]
    degenerate_count: int
    totally_real: bool

    @property
    def min_real(self) -> int:
        return min((s.real_count for s in self.samples), default=0)

    @property
    def max_real(self) -> int:
        return max((s.real_count for s in self.samples), default=0)

    @property
    def full_fraction(self) -> float:
        if not self.samples:
            return 0.0
        return sum(s.real_count == self.expected for s in self.samples) / len(self.samples)

    def to_json(self) -> dict:
        return {
            "samples": [s.to_json() for s in self.samples],
            "expected": self.expected,
            "totally_real": self.totally_real,
            "flagged_thetas": self.flagged_thetas,
            "min_real": self.min_real,
            "max_real": self.max_real,
            "full_fraction": self.full_fraction,
            "degenerate_count": self.degenerate_count,
        }


def _sample(
    p: LaurentPoly,
    theta0: float,
    expected: int,
    rng: np.random.Generator,
    retries: int,
    kwargs: dict,
) -> tuple[FiberReport | None, bool, bool]:
    """Fiber at theta0, perturbing by ~1e-4 on degeneracy or a short fiber.

    Returns ``(report, flagged, degenerate)``.
    """
    theta = theta0
    last = None
    flagged = False
    for attempt in range(retries + 1):
        try:
            rep = count_fiber(p, theta, expected=expected, **kwargs)
        except DegenerateResultantError:
            rep = None
        if rep is not None and not rep.short:
            return rep, flagged, False
        flagged = True
        if rep is not None:
            last = rep
        step = 1e-4 * (attempt + 1) * rng.uniform(0.5, 1.5)
        theta = (theta0 + (step if attempt % 2 == 0 else -step)) % math.pi
    return last, flagged, last is None


def totally_real_scan(
    p: LaurentPoly,
    n_samples: int = 64,
    *,
    seed: int = 0,
    retries: int = 4,
    mapper: Callable = map,
    imag_tol: float = 1e-7,
    residual_tol: float = 1e-7,
    cluster_tol: float = 1e-6,
) -> ScanReport:
    """Count fibers at ``theta_k = k*pi/n`` and decide total reality."""
    if n_samples < 16:
        raise ValueError("n_samples must be at least 16")
    expected = int(2 * newton_polygon(p).vol)
    kwargs = dict(imag_tol=imag_tol, residual_tol=residual_tol, cluster_tol=cluster_tol)
    # one child generator per sample keeps results independent of scheduling
    seeds = np.random.SeedSequence(seed).spawn(n_samples)
    thetas = [k * math.pi / n_samples for k in range(n_samples)]
    results = list(
        mapper(
            lambda args: _sample(p, args[0], expected, np.random.default_rng(args[1]), retries, kwargs),
            zip(thetas, seeds),
        )
    )
    samples: list[FiberReport] = []
    flagged: list[float] = []
    degenerate = 0
    for theta, (rep, flag, degen) in zip(thetas, results):
        if degen or rep is None:
            degenerate += 1
            flagged.append(theta)
            continue
        if flag:
            flagged.append(theta)
        samples.append(rep)
    if degenerate > 0.1 * n_samples:
        raise ScanError(f"{degenerate} of {n_samples} fiber samples degenerate")
    totally_real = bool(samples) and all(
        s.real_count == s.total_count == expected for s in samples
    ) and degenerate == 0
    return ScanReport(samples, expected, flagged, degenerate, totally_real)


def crofton_from_scan(scan: ScanReport, n_samples: int) -> float:
    """Multiplicity-weighted length of the Gauss image: (pi/n) * sum of real counts.

    Samples lost to degeneracy are filled with the mean of the others.
    """
    if not scan.samples:
        return 0.0
    counts = [s.real_count for s in scan.samples]
    mean = sum(counts) / len(counts)
    return math.pi / n_samples * (sum(counts) + mean * (n_samples - len(counts)))

