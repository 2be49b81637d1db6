"""Rasterized complex amoeba and SVG figures.

A log point ``(u, v)`` lies on the amoeba when some ``phi`` gives a root of
``f(e^{u + i phi}, y)`` with ``|y| = e^v``.  For a column ``u`` we solve the
slice at ``n_phi`` angles; a cell center is a member when the number of roots
with ``log|y| < v`` is not the same at every sampled angle.  The roots move
continuously with ``phi``, so a change in that count means some root crossed
the circle ``|y| = e^v`` in between.

Tentacles thinner than a cell slip between cell centers.  To keep the real
amoeba inside the raster, the cell holding each real root of the slices at
``x = +-e^u`` is added unless a vertical neighbour is already set.  The whole
computation is repeated with ``x`` and ``y`` exchanged and the two bitmaps are
OR-ed, so symmetric polynomials give rasters that are symmetric cell for cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable
from xml.sax.saxutils import escape

import numpy as np

from .lattice import NewtonPolygon, moment_map, newton_polygon
from .laurent import LaurentPoly, dense_matrix

Window = tuple[float, float, float, float]  # (umin, umax, vmin, vmax)


@dataclass
class AmoebaRaster:
    window: Window
    resolution: tuple[int, int]
    bitmap: np.ndarray  # (ny, nx) bool, row 0 at vmin
    area_estimate: float
    area_bound: float
    flags: list[str] = field(default_factory=list)

    @property
    def cell_area(self) -> float:
        umin, umax, vmin, vmax = self.window
        nx, ny = self.resolution
        return (umax - umin) / nx * (vmax - vmin) / ny

    def to_json(self) -> dict:
        return {
            "area_estimate": self.area_estimate,
            "area_bound": self.area_bound,
            "resolution": list(self.resolution),
            "window": list(self.window),
            "members": int(self.bitmap.sum()),
            "flags": self.flags,
        }

    def to_pbm(self) -> str:
        """Plain PBM (P1) dump, top row = largest v."""
        ny, nx = self.bitmap.shape
        lines = ["P1", f"{nx} {ny}"]
        for row in self.bitmap[::-1]:
            lines.append(" ".join("1" if b else "0" for b in row))
        return "\n".join(lines) + "\n"


def _companion_roots(c: np.ndarray) -> np.ndarray:
    """Roots of ``sum c[b] t^b`` (rows of ``c``) with nonzero end coefficients.

    Each row is rescaled by ``t = e^sigma s`` so that its two end coefficients
    have equal modulus, which keeps the companion eigenvalues well scaled.
    """
    deg = c.shape[1] - 1
    sigma = (np.log(np.abs(c[:, 0])) - np.log(np.abs(c[:, -1]))) / deg
    scaled = c * np.exp(np.outer(sigma, np.arange(deg + 1)))
    comp = np.zeros((len(c), deg, deg), dtype=complex)
    if deg > 1:
        comp[:, 1:, :-1] = np.eye(deg - 1)
    comp[:, :, -1] = -scaled[:, :-1] / scaled[:, -1:]
    return np.linalg.eigvals(comp) * np.exp(sigma)[:, None]


def _slice_roots(C: np.ndarray, x: np.ndarray, xshift: int) -> tuple[np.ndarray, bool]:
    """Roots in ``y`` of ``sum_ab C[a,b] x^(a+xshift) y^b`` for each ``x``.

    Returns an ``(len(x), deg)`` complex array; roots that escaped to zero or
    infinity (a vanishing end coefficient) are ``0`` or ``inf``.  The flag
    reports such a degeneration.
    """
    a = np.arange(C.shape[0]) + xshift
    logmag = np.outer(np.log(np.abs(x)), a)
    # scale each row by its dominant power of |x| so large |u| does not overflow
    w = np.exp(logmag - logmag.max(axis=1, keepdims=True))
    powers = w * np.exp(1j * np.outer(np.angle(x), a))
    coeffs = powers @ C
    # cancellation is judged against each coefficient's own terms
    scale = w @ np.abs(C)
    dead = np.abs(coeffs) <= 1e-13 * scale
    deg = C.shape[1] - 1
    out = np.empty((len(x), deg), dtype=complex)
    ok = ~dead[:, 0] & ~dead[:, -1]
    if ok.any() and deg > 0:
        out[ok] = _companion_roots(coeffs[ok])
    for k in np.flatnonzero(~ok):
        live = np.flatnonzero(~dead[k])
        lo, hi = (live[0], live[-1]) if live.size else (0, 0)
        inner = _companion_roots(coeffs[k : k + 1, lo : hi + 1])[0] if hi > lo else np.array([])
        out[k] = np.concatenate([np.zeros(lo), inner, np.full(deg - hi, np.inf)])
    return out, bool((~ok).any())


def _slice_log_roots(C: np.ndarray, xshift: int, u: float, n_phi: int) -> tuple[np.ndarray, bool]:
    """Sorted ``log|y|`` of the slice roots at ``x = e^{u + i phi_k}``, shape ``(n_phi, deg)``."""
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    roots, degenerate = _slice_roots(C, np.exp(u + 1j * phi), xshift)
    with np.errstate(divide="ignore"):
        return np.sort(np.log(np.abs(roots)), axis=1), degenerate


def _real_log_roots(C: np.ndarray, xshift: int, u: float) -> list[float]:
    """``log|y|`` of the real roots of the slices at ``x = +e^u`` and ``x = -e^u``."""
    x = np.array([math.exp(u), -math.exp(u)], dtype=complex)
    roots, _ = _slice_roots(C, x, xshift)
    r = roots.ravel()
    keep = np.isfinite(r) & (r != 0) & (np.abs(r.imag) <= 1e-9 * np.abs(r))
    return [float(v) for v in np.log(np.abs(r[keep]))]


def _column_members(logy: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Cells whose center is crossed by a root as ``phi`` sweeps the circle."""
    below = (logy[:, :, None] < v[None, None, :]).sum(axis=1)  # (n_phi, nv)
    return below.min(axis=0) != below.max(axis=0)


def _mark_real(col: np.ndarray, real: list[float], vmin: float, h: float) -> None:
    # thin real tentacles fall between cell centers; keep one cell per root
    for lv in sorted(real):
        k = int(math.floor((lv - vmin) / h))
        if 0 <= k < len(col) and not col[max(0, k - 1) : k + 2].any():
            col[k] = True


def _sweep(C, shift, us, vs, h, n_phi, mapper) -> tuple[np.ndarray, bool]:
    def column(u):
        logy, degenerate = _slice_log_roots(C, shift, u, n_phi)
        col = _column_members(logy, vs)
        _mark_real(col, _real_log_roots(C, shift, u), vs[0] - h / 2, h)
        return col, degenerate

    results = list(mapper(column, us))
    bitmap = np.array([c for c, _ in results]).T.reshape(len(vs), len(us))
    return bitmap, any(d for _, d in results)


def membership(p: LaurentPoly, u: float, v: float, n_phi: int = 64, *, tol: float = 0.025) -> bool:
    """Whether ``(u, v)`` is (up to ``tol`` in ``v``) a point of the amoeba."""
    if n_phi < 32:
        raise ValueError("n_phi must be at least 32")
    C, imin, _ = dense_matrix(p)
    logy, _ = _slice_log_roots(C, imin, u, n_phi)
    if logy.shape[1] == 0:
        return False
    if _column_members(logy, np.array([v]))[0]:
        return True
    return bool(np.any(np.abs(logy - v) < tol))


def rasterize(
    p: LaurentPoly,
    window: Window | float = 6.0,
    resolution: int | tuple[int, int] = 256,
    n_phi: int = 64,
    *,
    mapper: Callable = map,
) -> AmoebaRaster:
    """Membership bitmap on cell centers of ``window``."""
    if n_phi < 32:
        raise ValueError("n_phi must be at least 32")
    if not isinstance(window, tuple):
        window = (-float(window), float(window), -float(window), float(window))
    nx, ny = (resolution, resolution) if isinstance(resolution, int) else resolution
    umin, umax, vmin, vmax = window
    bound = math.pi**2 * float(newton_polygon(p).vol)
    if umax <= umin or vmax <= vmin or nx <= 0 or ny <= 0:
        return AmoebaRaster(window, (nx, ny), np.zeros((max(ny, 0), max(nx, 0)), bool), 0.0, bound)
    hu = (umax - umin) / nx
    hv = (vmax - vmin) / ny
    us = umin + hu * (np.arange(nx) + 0.5)
    vs = vmin + hv * (np.arange(ny) + 0.5)
    C, imin, jmin = dense_matrix(p)
    by_y, deg_y = _sweep(C, imin, us, vs, hv, n_phi, mapper)
    by_x, deg_x = _sweep(C.T, jmin, vs, us, hu, n_phi, mapper)
    bitmap = by_y | by_x.T
    flags = ["slice-degeneration: a leading coefficient vanished at a sampled angle"] if deg_x or deg_y else []
    area = hu * hv * int(bitmap.sum())
    return AmoebaRaster(window, (nx, ny), bitmap, area, bound, flags)


# --- SVG ---------------------------------------------------------------------

QUADRANT_COLORS = {(1, 1): "#1f77b4", (-1, 1): "#d62728", (-1, -1): "#2ca02c", (1, -1): "#9467bd"}
_PANEL = 400.0
_GAP = 40.0


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _raster_rects(r: AmoebaRaster, to_px) -> list[str]:
    """One rect per horizontal run of member cells."""
    umin, umax, vmin, vmax = r.window
    nx, ny = r.resolution
    hu = (umax - umin) / nx
    hv = (vmax - vmin) / ny
    out = []
    for j in range(ny):
        row = r.bitmap[j]
        padded = np.concatenate([[False], row, [False]]).astype(np.int8)
        edges = np.flatnonzero(np.diff(padded))
        for a, b in zip(edges[::2], edges[1::2]):
            x0, y1 = to_px(umin + a * hu, vmin + j * hv)
            x1, y0 = to_px(umin + b * hu, vmin + (j + 1) * hv)
            out.append(
                f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}"/>'
            )
    return out


def render_svg(
    *,
    polygon: NewtonPolygon | None = None,
    arcs=None,
    raster: AmoebaRaster | None = None,
    pinches=None,
    moment: bool = False,
    window: Window | float | None = None,
) -> str:
    """Deterministic SVG: amoeba panel on the left, Newton polygon on the right."""
    if polygon is None and arcs is None and raster is None:
        raise ValueError("at least one layer is required")
    if window is None:
        if raster is not None:
            window = raster.window
        elif arcs is not None:
            window = float(arcs.window)
        else:
            window = 6.0
    if not isinstance(window, tuple):
        window = (-float(window), float(window), -float(window), float(window))
    umin, umax, vmin, vmax = window
    if polygon is None and arcs is not None:
        polygon = newton_polygon(arcs.poly)
    sx = _PANEL / (umax - umin)
    sy = _PANEL / (vmax - vmin)

    def to_px(u, v):
        return (u - umin) * sx, (vmax - v) * sy

    width = _PANEL * 2 + _GAP if polygon is not None else _PANEL
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(width)}" '
        f'height="{_fmt(_PANEL)}" viewBox="0 0 {_fmt(width)} {_fmt(_PANEL)}">',
        f"<title>{escape(f'amoeba window [{umin:g},{umax:g}]x[{vmin:g},{vmax:g}]')}</title>",
        f'<rect x="0" y="0" width="{_fmt(_PANEL)}" height="{_fmt(_PANEL)}" fill="white" stroke="black"/>',
    ]
    if raster is not None:
        parts.append('<g id="raster" fill="#bbbbbb" stroke="none">')
        parts.extend(_raster_rects(raster, to_px))
        parts.append("</g>")
    if arcs is not None:
        parts.append('<g id="arcs" fill="none" stroke-width="1.5">')
        for k, a in enumerate(arcs.arcs):
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (to_px(u, v) for u, v in a.log_points))
            parts.append(f'<polyline data-arc="{k}" stroke="{QUADRANT_COLORS[a.quadrant]}" points="{pts}"/>')
        parts.append("</g>")
    if pinches:
        parts.append('<g id="pinches" stroke="black" stroke-width="1">')
        for pp in pinches:
            x, y = to_px(*pp.location)
            parts.append(
                f'<path d="M{_fmt(x - 4)},{_fmt(y - 4)}L{_fmt(x + 4)},{_fmt(y + 4)}'
                f'M{_fmt(x - 4)},{_fmt(y + 4)}L{_fmt(x + 4)},{_fmt(y - 4)}"/>'
            )
        parts.append("</g>")
    if polygon is not None:
        parts.extend(_polygon_panel(polygon, arcs if moment else None))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _polygon_panel(poly: NewtonPolygon, arcs) -> list[str]:
    xs = [p[0] for p in poly.vertices]
    ys = [p[1] for p in poly.vertices]
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1)
    scale = (_PANEL - 40) / span
    ox = _PANEL + _GAP + 20

    def to_px(a, b):
        return ox + (a - min(xs)) * scale, _PANEL - 20 - (b - min(ys)) * scale

    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (to_px(*v) for v in poly.vertices))
    out = [
        '<g id="newton-polygon">',
        f'<polygon points="{pts}" fill="#fff3d6" stroke="black"/>',
    ]
    for q in poly.lattice_points():
        x, y = to_px(*q)
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="black"/>')
    if arcs is not None:
        for k, a in enumerate(arcs.arcs):
            img = []
            for x, y in a.points:
                m = moment_map(poly, x, y).point
                img.append(to_px(*m))
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in img)
            out.append(
                f'<polyline class="moment" data-arc="{k}" fill="none" '
                f'stroke="{QUADRANT_COLORS[a.quadrant]}" points="{pts}"/>'
            )
    out.append("</g>")
    return out
