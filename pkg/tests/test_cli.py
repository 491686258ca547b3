import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from geodistort import cli

SPHERE = {"name": "sphere", "kind": "builtin", "builtin": "sphere_projection"}
EUCLID = {"name": "flat", "kind": "builtin", "builtin": "euclidean", "domain_radius": 2.0}
HYPER = {"name": "hyperbolic", "kind": "warped", "profile": "sinh", "domain_radius": 3.0}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def test_solve_exp_sphere(capsys, spec_file):
    code, out, _ = run(capsys, "solve-exp", "--spec", spec_file(SPHERE))
    head, rows = table(out)
    assert code == 0 and head == ["r_prime", "r_hat"]
    assert len(rows) == 101
    mid = rows[50]
    assert mid[0] == pytest.approx(np.pi / 4, abs=1e-9)
    assert mid[1] == pytest.approx(0.7071067812, abs=1e-9)
    assert np.abs(rows[:, 1] - np.sin(rows[:, 0])).max() < 1e-8


def test_solve_exp_euclidean_and_hyperbolic(capsys, spec_file):
    _, out, _ = run(capsys, "solve-exp", "--spec", spec_file(EUCLID), "--grid", "8")
    _, rows = table(out)
    assert np.allclose(rows[:, 0], rows[:, 1], atol=1e-12)
    _, out, _ = run(capsys, "solve-exp", "--spec", spec_file(HYPER), "--grid", "30")
    _, rows = table(out)
    assert rows[10, 0] == pytest.approx(1.0, abs=1e-12)
    assert rows[10, 1] == pytest.approx(1.175201194, abs=1e-9)


def test_solve_distortion_sphere(capsys, spec_file):
    # grid of 100 intervals over [0, sqrt 2] does not contain r = 1; use 2 intervals over [0, sqrt 2]
    code, out, _ = run(capsys, "solve-distortion", "--spec", spec_file(SPHERE), "--grid", "2")
    head, rows = table(out)
    assert code == 0 and head == ["r", "r_prime", "r_hat", "slip"]
    assert list(rows[0]) == [0.0, 0.0, 0.0, 1.0]
    assert rows[2, 0] == pytest.approx(np.sqrt(2), abs=1e-9)
    assert rows[2, 2] == pytest.approx(1.0, abs=1e-9)
    _, out, _ = run(capsys, "solve-distortion", "--spec", spec_file(SPHERE))
    _, rows = table(out)
    r = rows[:, 0]
    assert np.abs(rows[:, 2] - r * np.sqrt(1 - r * r / 4)).max() < 1e-8
    assert np.abs(rows[1:-1, 3] - r[1:-1] / np.sin(rows[1:-1, 1])).max() < 1e-8


def test_solve_distortion_hyperbolic_row(capsys, spec_file):
    _, out, _ = run(capsys, "solve-distortion", "--spec", spec_file(HYPER), "--format", "json")
    data = json.loads(out)
    assert data["columns"] == ["r", "r_prime", "r_hat", "slip"]
    rows = np.array(data["rows"], dtype=float)
    assert np.abs(rows[:, 2] - rows[:, 0] * np.sqrt(1 + rows[:, 0] ** 2 / 4)).max() < 1e-8
    assert np.interp(1.0, rows[:, 0], rows[:, 2]) == pytest.approx(1.118034, abs=2e-3)


def test_table_full_sphere_marks_undefined_chart_radius(capsys, spec_file):
    code, out, _ = run(capsys, "table", "--spec", spec_file({"kind": "warped", "profile": "sin"}),
                       "--grid", "4")
    head, rows = table(out)
    assert code == 0 and head == ["r", "r_prime", "r_hat", "slip", "g"]
    assert rows[2, 0] == 1.0 and rows[2, 2] == pytest.approx(np.sqrt(3) / 2, abs=1e-9)
    assert rows[2, 3] == pytest.approx(2 / np.sqrt(3), abs=1e-9)
    assert np.isnan(rows[3, 2]) and rows[4, 1] == pytest.approx(np.pi, abs=1e-9)


def test_text_format_is_aligned(capsys, spec_file):
    _, out, _ = run(capsys, "solve-exp", "--spec", spec_file(EUCLID), "--grid", "4", "--format", "text")
    lines = out.splitlines()
    assert len({len(line) for line in lines}) == 1
    assert lines[0].split() == ["r_prime", "r_hat"]


def test_output_file_and_determinism(capsys, spec_file, tmp_path):
    target = tmp_path / "out.csv"
    spec = spec_file(SPHERE)
    assert cli.main(["solve-distortion", "--spec", spec, "--out", str(target), "--grid", "10"]) == 0
    assert capsys.readouterr().out == ""
    first = target.read_bytes()
    cli.main(["solve-distortion", "--spec", spec, "--out", str(target), "--grid", "10"])
    assert target.read_bytes() == first


def test_csv_round_trip_at_ten_digits(capsys, spec_file):
    _, out, _ = run(capsys, "table", "--spec", spec_file(HYPER), "--grid", "20")
    for row in list(csv.reader(io.StringIO(out)))[1:]:
        assert all(f"{float(v):.10g}" == v for v in row)


def test_verify_euclidean(capsys, spec_file):
    code, out, err = run(capsys, "verify", "--spec", spec_file(EUCLID), "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["passed_all"] and err == ""
    assert data["manifold"] == "flat"
    assert all(c["residual"] < 1e-10 for c in data["checks"])
    assert set(data["checks"][0]) == {"name", "paper_ref", "residual", "tolerance", "passed"}


def test_verify_coarse_sphere_fails(capsys, spec_file):
    code, out, err = run(capsys, "verify", "--spec", spec_file(SPHERE), "--steps", "20", "--format", "text")
    assert code == 1
    assert "FAIL" in out and "passed_all: false" in out
    assert "FAIL exp_closed_form" in err and "closed form" in err


def test_verify_csv_default(capsys, spec_file):
    code, out, _ = run(capsys, "verify", "--spec", spec_file({"kind": "builtin", "builtin": "sphere_polar"}))
    head = next(csv.reader(io.StringIO(out)))
    assert code == 0 and head == ["name", "paper_ref", "residual", "tolerance", "passed"]


@pytest.mark.parametrize("argv", [
    ["verify", "--spec", "/nonexistent/spec.json"],
    ["solve-exp", "--spec", "{spec}", "--steps", "1"],
    ["solve-exp", "--spec", "{spec}", "--grid", "0"],
])
def test_configuration_errors_exit_2(capsys, spec_file, argv):
    spec = spec_file(SPHERE)
    code, _, err = run(capsys, *[a.replace("{spec}", spec) for a in argv])
    assert code == 2 and err.startswith("error:")


def test_invalid_spec_exit_2(capsys, spec_file):
    code, _, err = run(capsys, "solve-exp", "--spec", spec_file({"kind": "warped", "profile": "tan"}))
    assert code == 2 and "tan" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["solve-exp"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["nonsense", "--spec", "x"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["verify", "--spec", "x", "--format", "xml"])
    capsys.readouterr()


def test_run_config_validation():
    with pytest.raises(ValueError):
        cli.RunConfig("x", "plot")
    with pytest.raises(ValueError):
        cli.RunConfig("x", "verify", format="xml")


def test_module_entry_point(spec_file):
    proc = subprocess.run([sys.executable, "-m", "geodistort.cli", "solve-exp", "--spec", spec_file(EUCLID),
                           "--grid", "2"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["r_prime,r_hat", "0,0", "1,1", "2,2"]
