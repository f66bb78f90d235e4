from __future__ import annotations

import csv
import json

import pytest

from vmoidx.cli import main, run, strip_timing
from vmoidx.presets import PRESETS


def report(out):
    return json.loads((out / "report.json").read_text(encoding="utf-8"))


@pytest.mark.parametrize("preset,pair", [("figure1-a", (0, 1)), ("figure1-b", (1, 0)),
                                         ("figure1-c", (-1, 2))])
def test_index_presets(tmp_path, preset, pair):
    assert main(["index", "--preset", preset, "--out", str(tmp_path), "--quiet"]) == 0
    res = report(tmp_path)["results"]["index"]
    assert (res["ind"], res["ind_minus"], res["morse_residual"]) == (*pair, 0)
    with open(tmp_path / "field_samples.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["chart", "u", "v", "x", "y", "z", "w1", "w2", "w3"] and len(rows) > 100


def test_index_sphere_rotation():
    code, rep = run(["index", "--preset", "sphere-rotation", "--quiet"])
    assert code == 0 and rep["results"]["index"]["ind"] == 2


def test_index_from_expression_and_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# saddle on the disk\nsurface = disk\nfield = (y, x)\ntol-zero = 1e-10\n",
                   encoding="utf-8")
    code, rep = run(["index", "--config", str(cfg), "--quiet"])
    assert code == 0 and rep["results"]["index"]["ind"] == -1
    assert rep["config"]["tol_zero"] == 1e-10
    # flags override the file
    code, rep = run(["index", "--config", str(cfg), "--field", "(-y, x)", "--quiet"])
    assert rep["results"]["index"]["ind"] == 1


def test_index_from_csv_field(tmp_path):
    path = tmp_path / "f.csv"
    lines = ["u,v,w1,w2,w3"]
    grid = [i / 10 - 1 for i in range(21)]
    lines += [f"{u},{v},{-v},{u},0" for u in grid for v in grid]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    code, rep = run(["index", "--surface", "disk", "--field", str(path), "--quiet"])
    assert code == 0 and rep["results"]["index"]["ind"] == 1


@pytest.mark.parametrize("argv", [
    ["index", "--surface", "disk", "--field", "(x, y)", "--tol-zero", "-1"],
    ["index", "--surface", "nowhere", "--field", "(x, y)"],
    ["index", "--surface", "disk", "--field", "(x +, y)"],
    ["vmo-index", "--surface", "disk", "--field", "(y, x)", "--eps-grid", "0.01,0.02"],
    ["vmo-index", "--surface", "disk", "--field", "(y, x)", "--eps-grid", "1.0,0.5"],
    ["extend", "--surface", "disk"],
])
def test_config_errors_exit_4(argv):
    assert main(argv + ["--quiet"]) == 4


def test_zero_on_boundary_exit_3():
    assert main(["index", "--surface", "disk", "--field", "(x**2, 0)", "--quiet"]) == 3


def test_threads_env(monkeypatch):
    monkeypatch.setenv("VMOIDX_THREADS", "1")
    assert main(["index", "--preset", "figure1-a", "--quiet"]) == 0
    monkeypatch.setenv("VMOIDX_THREADS", "zero")
    assert main(["index", "--preset", "figure1-a", "--quiet"]) == 4


def test_vmo_index_command(tmp_path):
    code = main(["vmo-index", "--surface", "disk", "--field", "(-y, x)",
                 "--eps-grid", "0.1,0.05,0.025,0.0125", "--out", str(tmp_path), "--quiet"])
    assert code == 0
    res = report(tmp_path)["results"]["vmo_index"]
    assert (res["ind"], res["ind_minus"]) == (1, 0) and res["certificate"]["constant"]
    with open(tmp_path / "diagnostics.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["eps"]) for r in rows] == [0.1, 0.05, 0.025, 0.0125]


def test_extend_commands(tmp_path):
    assert main(["extend", "--preset", "extend-figure1-a", "--out", str(tmp_path),
                 "--quiet"]) == 0
    assert report(tmp_path)["results"]["extension"]["certified"]
    assert (tmp_path / "extended_field.csv").exists()
    obstructed = tmp_path / "obstructed"
    assert main(["extend", "--preset", "extend-figure1-b", "--out", str(obstructed),
                 "--quiet"]) == 2
    err = report(obstructed)["error"]
    assert err["type"] == "TopologicalObstruction" and (err["ind_minus"], err["chi"]) == (0, 1)
    assert main(["extend", "--surface", "annulus", "--datum", "(-y, x)", "--quiet"]) == 0


def test_linefield_command():
    code, rep = run(["linefield", "--preset", "figure2-n1", "--quiet"])
    res = rep["results"]["linefield"]
    assert code == 0 and res["holonomy"]["phi-loop"] == -1 and res["orientable"] is False
    code, rep = run(["linefield", "--preset", "planar-half", "--quiet"])
    assert str(rep["results"]["linefield"]["total_index"]) == "1/2"


def test_figure_presets_are_documented():
    import vmoidx.presets as P
    for name in ("figure1-a", "figure1-b", "figure1-c", "figure2-n0", "figure2-n1"):
        assert name in PRESETS and PRESETS[name].description
        assert name in P.__doc__


def test_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        main(["extend", "--preset", "extend-annulus-angular", "--seed", "5", "--out", str(out),
              "--quiet"])
    ra, rb = report(a), report(b)
    ra["config"].pop("out"), rb["config"].pop("out")
    ra["results"].pop("files"), rb["results"].pop("files")
    assert strip_timing(ra) == strip_timing(rb)


def test_selftest_subset_and_expected_failure(tmp_path):
    code, rep = run(["selftest", "--only", "1,4,11", "--out", str(tmp_path), "--quiet"])
    assert code == 0 and rep["results"]["all_satisfied"]
    by_id = {c["criterion"]: c for c in rep["results"]["criteria"]}
    assert by_id[11]["passed"] is False and by_id[11]["satisfied"] is True
    code2, rep2 = run(["selftest", "--only", "1,4,11", "--quiet"])
    assert strip_timing(rep2["results"]) == strip_timing(rep["results"])


def test_selftest_with_corrupted_tolerances(tmp_path):
    cfg = tmp_path / "tol.cfg"
    cfg.write_text("tol_zero = -1e-9\n", encoding="utf-8")
    assert main(["selftest", "--config", str(cfg), "--only", "1", "--quiet"]) != 0
    cfg.write_text("tol_jac = banana\n", encoding="utf-8")
    assert main(["selftest", "--config", str(cfg), "--only", "1", "--quiet"]) == 4
