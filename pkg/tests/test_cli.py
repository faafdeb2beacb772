import csv

import numpy as np
import pytest

from tvci.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, main, read_config, read_measurements
from tvci.io import read_pgm
from tvci.patterns import Pattern


def test_density_gamma_output(capsys):
    assert main(["density", "gamma", "--kind", "optimal-fourier", "--N", "256", "--d", "2"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("Gamma(p) = ") and out[1].startswith("Gamma(p)/ln N = ")
    g, r = float(out[0].split("=")[1]), float(out[1].split("=")[1])
    assert g / r == pytest.approx(np.log(256), rel=1e-8)


def test_pattern_measure_reconstruct_pipeline(tmp_path, capsys):
    pat, meas, rec = (str(tmp_path / n) for n in ("p.txt", "y.txt", "x.pgm"))
    assert main(["pattern", "gen", "--N", "32", "--d", "2", "--scheme", "optimal", "--pct", "40", "--seed", "2",
                 "--out", pat]) == EXIT_OK
    assert Pattern.load(pat).distinct == round(0.4 * 1024)
    assert main(["pattern", "show", pat, "--pgm", str(tmp_path / "mask.pgm")]) == EXIT_OK
    assert read_pgm(tmp_path / "mask.pgm")[16, 16] == 1.0  # DC at the centre
    assert main(["measure", "--image", "shepp-logan-32", "--pattern", pat, "--out", meas]) == EXIT_OK
    kind, grid, m, rows, y = read_measurements(meas)
    assert kind == "fourier" and m == rows.size == y.size
    assert main(["reconstruct", "--pattern", pat, "--measurements", meas, "--out", rec, "--outer", "3"]) == EXIT_OK
    assert read_pgm(rec).shape == (32, 32)
    assert "residual" in capsys.readouterr().out


def test_pattern_gen_iid_to_stdout(capsys):
    assert main(["pattern", "gen", "--N", "8", "--d", "1", "--m", "5", "--scheme", "iid-vds", "--seed", "1"]) == 0
    text = capsys.readouterr().out
    assert Pattern.from_text(text).m == 5


def test_experiment_row_count(tmp_path):
    out = tmp_path / "run"
    code = main(["experiment", "run", "--scheme", "uniform,optimal", "--pct", "25", "--trials", "20",
                 "--image", "shepp-logan-16", "--outer", "1", "--inner", "30", "--frames", "none", "--out", str(out),
                 "--quiet"])
    assert code == EXIT_OK
    with open(out / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 20
    assert not (out / "frames").exists()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nscheme = uniform\npct = 20\ntrials = 2\nimage = shepp-logan-16\ninner = 30\n"
                   "frames = none\n")
    assert read_config(cfg)["trials"] == "2"
    out = tmp_path / "o"
    assert main(["experiment", "run", "--config", str(cfg), "--trials", "3", "--out", str(out), "--quiet"]) == 0
    with open(out / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 and {r["scheme"] for r in rows} == {"uniform"} and rows[0]["pct"] == "20.0"


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["pattern", "gen", "--N", "8", "--d", "1"],
    ["pattern", "gen", "--N", "6", "--d", "1", "--m", "2"],
    ["density", "gamma", "--kind", "optimal-walsh", "--convention", "fourier", "--N", "8", "--d", "2"],
    ["experiment", "run", "--scheme", "spiral", "--trials", "1"],
    ["experiment", "run", "--r-levels", "10"],
    ["verify", "--only", "nothing"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert capsys.readouterr().err


def test_io_errors(tmp_path):
    assert main(["pattern", "show", str(tmp_path / "missing.txt")]) == EXIT_IO
    bad = tmp_path / "bad.cfg"
    assert main(["experiment", "run", "--config", str(bad)]) == EXIT_IO


def test_bad_config_line(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("trials 3\n")
    assert main(["experiment", "run", "--config", str(cfg)]) == EXIT_USAGE


def test_verify_subset(capsys):
    assert main(["verify", "--only", "walsh-haar,theta"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and all(l.startswith("[PASS]") for l in lines)
