"""Amoebas of real plane curves: tracing, curvature, Gauss-map fibers and Harnack tests."""

from .classify import HarnackVerdict, classify
from .curvature import CurvatureReport, total_curvature
from .gauss import count_fiber, totally_real_scan
from .lattice import NewtonPolygon, newton_polygon
from .laurent import LaurentPoly, format_poly, load_poly, parse
from .raster import AmoebaRaster, rasterize, render_svg
from .tracer import ArcSet, trace_all

__version__ = "0.1.0"

__all__ = [
    "AmoebaRaster",
    "ArcSet",
    "CurvatureReport",
    "HarnackVerdict",
    "LaurentPoly",
    "NewtonPolygon",
    "classify",
    "count_fiber",
    "format_poly",
    "load_poly",
    "newton_polygon",
    "parse",
    "rasterize",
    "render_svg",
    "total_curvature",
    "totally_real_scan",
    "trace_all",
]
