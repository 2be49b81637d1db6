import json
import math

import pytest

from amoeba_lab.cli import EXIT_USAGE, main
from amoeba_lab.config import RunConfig, Tolerances
from amoeba_lab.jsonio import dumps

from conftest import CIRCLE, EMPTY_CIRCLE, LINE


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_newton_line(capsys):
    code, out, _ = run(capsys, "newton", "-p", LINE)
    d = json.loads(out)
    assert code == 0
    assert d["vol"] == {"num": 1, "den": 2}
    assert (d["g"], d["s"], d["pick_ok"]) == (0, 3, True)


def test_newton_degenerate_support(capsys):
    code, out, err = run(capsys, "newton", "-p", "x+x^2")
    assert code == EXIT_USAGE == 64
    assert out == ""
    assert json.loads(err)["error"] == "DegenerateSupportError"


def test_newton_parse_error(capsys):
    code, _, err = run(capsys, "newton", "-p", "1+x+")
    assert code == 64
    assert "ParseError" in err


def test_newton_reads_json(tmp_path, capsys):
    path = tmp_path / "poly.json"
    path.write_text(json.dumps({"terms": [{"i": 0, "j": 0, "c": 1}, {"i": 1, "j": 0, "c": 1}, {"i": 0, "j": 1, "c": 1}]}))
    code, out, _ = run(capsys, "newton", "-p", f"@{path}")
    assert code == 0 and json.loads(out)["s"] == 3


def test_usage_errors_do_not_use_exit_two(capsys):
    code, _, err = run(capsys, "classify")
    assert code == 64
    assert json.loads(err)["error"] == "usage"
    assert run(capsys, "newton", "-p", LINE, "--window", "-3")[0] == 64
    assert run(capsys, "newton", "-p", LINE, "--tol-nonsense", "1")[0] == 64


def test_missing_json_file(capsys):
    assert run(capsys, "newton", "-p", "@/nonexistent/poly.json")[0] == 64


@pytest.mark.parametrize("text, code", [(LINE, 0), (EMPTY_CIRCLE, 1)])
def test_classify_exit_codes(text, code, capsys):
    assert run(capsys, "classify", "-p", text)[0] == code


def test_circle_never_exit_zero(capsys):
    assert run(capsys, "classify", "-p", CIRCLE)[0] in (1, 2)


def test_classify_writes_evidence(tmp_path, capsys):
    code, out, _ = run(capsys, "classify", "-p", LINE, "-o", str(tmp_path))
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"lattice.json", "arcs.csv", "curvature.json", "gauss_scan.json", "verdict.json", "figure.svg"} <= names
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["verdict"] == "Harnack" and verdict == json.loads(out)
    header = (tmp_path / "arcs.csv").read_text().splitlines()[0]
    assert header == "arc,quadrant,x,y,u,v"
    assert (tmp_path / "figure.svg").read_text().count("<polyline") == 3


def test_other_subcommands(tmp_path, capsys):
    code, out, _ = run(capsys, "trace", "-p", LINE, "--window", "8")
    assert code == 0 and len(json.loads(out)["arcs"]) == 3
    code, out, _ = run(capsys, "curvature", "-p", LINE)
    assert code == 0 and json.loads(out)["total"] == pytest.approx(math.pi, abs=1e-2)
    code, out, _ = run(capsys, "fibers", "-p", CIRCLE, "--theta-samples", "64", "--seed", "5")
    assert code == 0 and json.loads(out)["expected"] == 4
    code, out, _ = run(capsys, "raster", "-p", LINE, "--resolution", "64", "--nphi", "32", "-o", str(tmp_path))
    assert code == 0 and json.loads(out)["resolution"] == [64, 64]
    assert (tmp_path / "raster.pbm").read_text().startswith("P1\n64 64\n")


def test_report_contents(capsys):
    code, out, _ = run(capsys, "report", "-p", EMPTY_CIRCLE, "--resolution", "128")
    d = json.loads(out)
    assert code == 0
    assert set(d["stages"].values()) == {"ok"}
    assert d["total_curvature"] == 0.0
    assert d["area_estimate"] > 0


def test_report_is_byte_identical(capsys, monkeypatch):
    argv = ("report", "-p", "1 - x^2*y + 3*x*y - y^2*x", "--seed", "11", "--resolution", "128")
    first = run(capsys, *argv)[1]
    monkeypatch.setenv("AMOEBA_LAB_THREADS", "3")
    second = run(capsys, *argv)[1]
    assert first == second


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"resolution": 32, "n_phi": 32, "seed": 9}))
    code, out, _ = run(capsys, "report", "-p", LINE, "--config", str(cfg), "--resolution", "48")
    d = json.loads(out)
    assert d["config"]["resolution"] == 48  # flag beats file
    assert d["config"]["seed"] == 9  # file beats default
    assert d["config"]["n_phi"] == 32


def test_tolerance_override():
    t = Tolerances().override({"pinch": 1e-3})
    assert t.pinch == 1e-3
    with pytest.raises(ValueError):
        Tolerances().override({"bogus": 1})
    with pytest.raises(ValueError):
        RunConfig(resolution=0)


def test_threads_env(monkeypatch):
    monkeypatch.setenv("AMOEBA_LAB_THREADS", "5")
    assert RunConfig(threads=2).pool_size() == 5


def test_json_floats_have_17_digits():
    text = dumps({"a": 0.1, "b": [1.0, math.pi], "c": float("nan")})
    assert '"a": 0.10000000000000001' in text
    assert "3.1415926535897931" in text
    assert json.loads(text)["c"] is None
