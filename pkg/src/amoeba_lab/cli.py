"""``amoeba-lab`` command line.

Exit codes: 0 success (``classify``: Harnack), 1 NotHarnack, 2 Inconclusive,
64 bad input (parse error, degenerate support, bad flags), 70 pipeline
failure.  Diagnostics go to stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

from . import __version__
from .classify import classify
from .config import RunConfig, Tolerances
from .curvature import total_curvature
from .gauss import totally_real_scan
from .jsonio import dumps
from .lattice import newton_polygon
from .laurent import PolyError, format_poly, load_poly
from .raster import rasterize, render_svg
from .tracer import arcs_to_csv_rows, trace_all

EXIT_USAGE = 64
EXIT_FAILURE = 70
COMMANDS = ("newton", "trace", "curvature", "fibers", "classify", "raster", "report")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's default exit status 2 would collide with "Inconclusive"
    def error(self, message):
        raise UsageError(message)


def _diag(kind: str, message: str, **extra) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="amoeba-lab", description="Real amoebas, curvature and Harnack tests for plane curves.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("-p", "--poly", required=True, help='polynomial text, e.g. "1+x+y", or @file.json')
        sp.add_argument("-o", "--out", help="directory for output files")
        sp.add_argument("--config", help="JSON file with RunConfig fields")
        sp.add_argument("--window", type=float, help="log window half-width for tracing (default 12)")
        sp.add_argument("--grid", type=int, dest="grid_n", help="seed grid lines per axis (default 32)")
        sp.add_argument("--theta-samples", type=int, dest="theta_samples", help="Gauss-map directions (default 64)")
        sp.add_argument("--resolution", type=int, help="raster cells per axis (default 256)")
        sp.add_argument("--nphi", type=int, dest="n_phi", help="argument samples per raster column (default 64)")
        sp.add_argument("--raster-window", type=float, dest="raster_window", help="raster half-width (default 6)")
        sp.add_argument("--seed", type=int, help="seed for direction perturbations (default 0)")
        sp.add_argument("--threads", type=int, help="worker pool size")
        for tname in Tolerances.__dataclass_fields__:
            sp.add_argument(f"--tol-{tname.replace('_', '-')}", type=float, dest=f"tol_{tname}")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    layers = []
    if args.config:
        layers.append(RunConfig.from_file(args.config))
    flags = {
        k: getattr(args, k)
        for k in ("window", "grid_n", "theta_samples", "resolution", "n_phi", "raster_window", "seed", "threads")
    }
    flags["polynomial"] = args.poly
    flags["output_dir"] = args.out
    flags["tolerances"] = {
        t: getattr(args, f"tol_{t}") for t in Tolerances.__dataclass_fields__ if getattr(args, f"tol_{t}") is not None
    }
    layers.append(flags)
    return RunConfig.build(*layers)


@contextmanager
def _pool(config: RunConfig):
    n = config.pool_size()
    if n <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=n) as ex:
        yield ex.map


def _write(config: RunConfig, name: str, text: str) -> None:
    if not config.output_dir:
        return
    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, name), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv(arcset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["arc", "quadrant", "x", "y", "u", "v"])
    for k, q, x, y, u, v in arcs_to_csv_rows(arcset):
        w.writerow([k, q, f"{x:.17g}", f"{y:.17g}", f"{u:.17g}", f"{v:.17g}"])
    return buf.getvalue()


def _raster_window(config: RunConfig) -> float:
    return float(config.raster_window)


def cmd_newton(config: RunConfig, mapper) -> int:
    p = load_poly(config.polynomial)
    text = dumps(newton_polygon(p).to_json())
    _write(config, "lattice.json", text)
    sys.stdout.write(text)
    return 0


def cmd_trace(config: RunConfig, mapper) -> int:
    p = load_poly(config.polynomial)
    arcs = trace_all(p, config.window, config.grid_n)
    text = dumps(arcs.to_json())
    _write(config, "arcs.json", text)
    _write(config, "arcs.csv", _csv(arcs))
    sys.stdout.write(text)
    return 0


def cmd_curvature(config: RunConfig, mapper) -> int:
    p = load_poly(config.polynomial)
    arcs = trace_all(p, config.window, config.grid_n)
    rep = total_curvature(
        arcs, p, n_samples=config.theta_samples, seed=config.seed, mapper=mapper, pinch_tol=config.tolerances.pinch
    )
    text = dumps(rep.to_json())
    _write(config, "curvature.json", text)
    sys.stdout.write(text)
    return 0


def cmd_fibers(config: RunConfig, mapper) -> int:
    p = load_poly(config.polynomial)
    tol = config.tolerances
    scan = totally_real_scan(
        p, config.theta_samples, seed=config.seed, mapper=mapper,
        imag_tol=tol.imag, residual_tol=tol.residual, cluster_tol=tol.cluster,
    )
    text = dumps(scan.to_json())
    _write(config, "gauss_scan.json", text)
    sys.stdout.write(text)
    return 0


def cmd_raster(config: RunConfig, mapper) -> int:
    p = load_poly(config.polynomial)
    r = rasterize(p, _raster_window(config), config.resolution, config.n_phi, mapper=mapper)
    text = dumps(r.to_json())
    _write(config, "raster.json", text)
    _write(config, "raster.pbm", r.to_pbm())
    _write(config, "raster.svg", render_svg(polygon=newton_polygon(p), raster=r))
    sys.stdout.write(text)
    return 0


def cmd_classify(config: RunConfig, mapper) -> int:
    p = load_poly(config.polynomial)
    v = classify(p, config, mapper=mapper)
    _write(config, "lattice.json", dumps(v.polygon.to_json()))
    if v.arcs is not None:
        _write(config, "arcs.csv", _csv(v.arcs))
    _write(config, "curvature.json", dumps(v.curvature.to_json() if v.curvature else None))
    _write(config, "gauss_scan.json", dumps(v.scan.to_json() if v.scan else None))
    text = dumps(v.to_json())
    _write(config, "verdict.json", text)
    if config.output_dir:
        _write(
            config,
            "figure.svg",
            render_svg(
                polygon=v.polygon,
                arcs=v.arcs,
                pinches=v.curvature.pinches if v.curvature else None,
                window=float(config.window),
            ),
        )
    sys.stdout.write(text)
    return v.exit_code


def build_report(config: RunConfig, mapper=map) -> dict:
    """Consolidated results of every stage; failed stages are reported, not raised."""
    report: dict = {
        "config": config.to_json(),
        "polynomial": None,
        "stages": {k: "skipped" for k in ("newton", "trace", "curvature", "fibers", "raster")},
        "lattice": None,
        "trace": None,
        "fibers": None,
        "curvature": None,
        "raster": None,
        "total_curvature": None,
        "curvature_bound": None,
        "area_estimate": None,
        "area_bound": None,
        "errors": {},
    }
    p = load_poly(config.polynomial)
    report["polynomial"] = format_poly(p)
    stages = report["stages"]
    tol = config.tolerances

    def run(name, fn):
        try:
            out = fn()
            stages[name] = "ok"
            return out
        except Exception as exc:  # recorded per stage; the report is still written
            stages[name] = "failed"
            report["errors"][name] = f"{type(exc).__name__}: {exc}"
            return None

    poly = run("newton", lambda: newton_polygon(p))
    if poly is not None:
        report["lattice"] = poly.to_json()
        report["curvature_bound"] = 2 * math.pi * float(poly.vol)
    arcs = run("trace", lambda: trace_all(p, config.window, config.grid_n))
    if arcs is not None:
        report["trace"] = arcs.to_json()
    scan = run(
        "fibers",
        lambda: totally_real_scan(
            p, config.theta_samples, seed=config.seed, mapper=mapper,
            imag_tol=tol.imag, residual_tol=tol.residual, cluster_tol=tol.cluster,
        ),
    )
    if scan is not None:
        report["fibers"] = scan.to_json()
    if arcs is not None:
        curv = run(
            "curvature",
            lambda: total_curvature(
                arcs, p, n_samples=config.theta_samples, seed=config.seed, scan=scan,
                crofton=scan is not None, pinch_tol=tol.pinch,
            ),
        )
        if curv is not None:
            report["curvature"] = curv.to_json()
            report["total_curvature"] = curv.total
    r = run("raster", lambda: rasterize(p, _raster_window(config), config.resolution, config.n_phi, mapper=mapper))
    if r is not None:
        report["raster"] = r.to_json()
        report["area_estimate"] = r.area_estimate
        report["area_bound"] = r.area_bound
    return report


def cmd_report(config: RunConfig, mapper) -> int:
    report = build_report(config, mapper)
    text = dumps(report)
    _write(config, "report.json", text)
    sys.stdout.write(text)
    return 0 if all(s == "ok" for s in report["stages"].values()) else EXIT_FAILURE


HANDLERS = {
    "newton": cmd_newton,
    "trace": cmd_trace,
    "curvature": cmd_curvature,
    "fibers": cmd_fibers,
    "classify": cmd_classify,
    "raster": cmd_raster,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = _config(args)
    except UsageError as exc:
        _diag("usage", str(exc))
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        _diag("config", str(exc))
        return EXIT_USAGE
    try:
        with _pool(config) as mapper:
            return HANDLERS[args.command](config, mapper)
    except PolyError as exc:
        _diag(type(exc).__name__, str(exc))
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        _diag("input", str(exc))
        return EXIT_USAGE
    except Exception as exc:  # pipeline failure: no traceback on stdout
        _diag("pipeline", f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
