import csv
import math
import subprocess
import sys

import pytest
from numpy.testing import assert_allclose

from hitprop.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, PROPAGATOR_COLUMNS, emit_plot_script, main


def value_of(out):
    return float(out.split("value=")[1].split()[0])


def test_hit_eval_examples(capsys):
    assert main(["hit-eval", "--path", "0;0;0", "--T", "1"]) == EXIT_OK
    assert_allclose(value_of(capsys.readouterr().out), 0.25)
    sym = "0,0,0;0,0,1;0,0,0"
    assert main(["hit-eval", "--path", sym, "--T", "1"]) == EXIT_OK
    closed = capsys.readouterr().out
    assert "method=closed-form" in closed
    assert_allclose(value_of(closed), 2 * math.exp(-1) / (4 * math.pi) ** 2.5, rtol=1e-14)
    assert main(["hit-eval", "--path", sym, "--T", "1", "--method", "bromwich"]) == EXIT_OK
    assert_allclose(value_of(capsys.readouterr().out), value_of(closed), rtol=1e-10)


def test_exit_codes(capsys, tmp_path):
    assert main(["hit-eval", "--path", "0,0;1,0,0;0,0"]) == EXIT_CONFIG
    assert main(["hit-eval"]) == EXIT_CONFIG
    assert main(["bogus"]) == EXIT_CONFIG
    assert main(["propagator", "--geometry", "cube"]) == EXIT_CONFIG
    assert main(["hit-eval", "--path", "0,0,0;0,0,0;0,0,1"]) == EXIT_NUMERIC
    assert main(["pade", "--coeffs", "1,0,1,0"]) == EXIT_NUMERIC
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["plot-script", "--csv", str(empty)]) == EXIT_CONFIG
    capsys.readouterr()


def test_pade_and_shanks_commands(capsys):
    assert main(["pade", "--coeffs", "1,1,0.5", "--mn", "1,1", "--x", "1"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "[1/1](1) = 3"
    assert main(["pade", "--coeffs", "0.4,-0.9,1.3,-0.2"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert_allclose(float(lines[0].split("=")[1]), -(0.4**2) / -0.9)
    assert main(["shanks", "--values", "1.5,1.25,1.125,1.0625"]) == EXIT_OK
    assert_allclose([float(v) for v in capsys.readouterr().out.split(",")], [1.0, 1.0])
    # three values go through S1, S2; an exactly geometric triple leaves S2 undefined
    assert main(["shanks", "--values", "1.5,1.25,1.125"]) == EXIT_NUMERIC
    assert main(["shanks", "--values", "0.9,1.05,0.98"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("S1 = ")


def scan(tmp_path, name, *extra):
    out = tmp_path / name
    assert main(["propagator", "--points", "3", "--out", str(out), *extra]) == EXIT_OK
    return out


def test_propagator_scan_deterministic(tmp_path):
    a = scan(tmp_path, "a.csv", "--geometry", "sphere", "--r", "0.7")
    b = scan(tmp_path, "b.csv", "--geometry", "sphere", "--r", "0.7")
    assert a.read_bytes() == b.read_bytes()
    with a.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == PROPAGATOR_COLUMNS
    assert len(rows) == 4
    assert_allclose([float(r[0]) for r in rows[1:]], [0.02, math.sqrt(0.02 * 2.5), 2.5])
    assert all(cell != "" for r in rows[1:] for cell in r)


@pytest.mark.slow
def test_plane_scan_deterministic(tmp_path):
    extra = ["--geometry", "plane", "--tmin", "1", "--tmax", "2", "--qmc-log2n", "12", "--seed", "5"]
    a = scan(tmp_path, "a.csv", *extra)
    b = scan(tmp_path, "b.csv", *extra)
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# exact sphere values\ngeometry = sphere\npoints = 2\ntmin = 0.5\ntmax = 1.0\n")
    assert main(["exact", "--config", str(cfg)]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "T,exact,exact_minus_free" and rows[1].startswith("0.5,") and len(rows) == 3
    assert main(["exact", "--config", str(cfg), "--points", "4"]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 5
    bad = tmp_path / "bad.cfg"
    bad.write_text("wavelength = 3\n")
    assert main(["exact", "--config", str(bad)]) == EXIT_CONFIG
    capsys.readouterr()


def test_plot_script(tmp_path):
    data = scan(tmp_path, "sphere.csv")
    script = tmp_path / "plot.py"
    assert main(["plot-script", "--csv", str(data), "--out", str(script)]) == EXIT_OK
    text = script.read_text()
    compile(text, str(script), "exec")
    assert "exact_minus_free" in text and "'log'" in text and "fill_between" in text
    header_only = tmp_path / "h.csv"
    header_only.write_text(",".join(PROPAGATOR_COLUMNS) + "\n")
    with pytest.raises(Exception):
        emit_plot_script(header_only)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hitprop", "shanks", "--values", "1.5,1.25,1.125,1.0625"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "1,1"
