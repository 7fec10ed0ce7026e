import csv
import json

import numpy as np
import pytest
from scipy.integrate import trapezoid

from hnelab.cli import SWEEP_COLUMNS, main

GOLDEN_HEADER = (
    "speed_kmh,method,trials,triggers,failures,unnecessary,successes,no_handover,"
    "empirical_failure_prob,analytic_failure_prob,empirical_unnecessary_prob,analytic_unnecessary_prob"
)


def _sweep(tmp_path, name, *extra):
    out = tmp_path / name
    code = main(["sweep", "--out", str(out), "--trials", "200", "--speeds", "3.6,50,99.6", *extra])
    return code, out


def test_sweep_outputs(tmp_path):
    code, out = _sweep(tmp_path, "a")
    assert code == 0
    text = (out / "sweep.csv").read_text()
    assert text.splitlines()[0] == GOLDEN_HEADER == ",".join(SWEEP_COLUMNS)
    rows = list(csv.DictReader(text.splitlines()))
    assert len(rows) == 9
    for r in rows:
        assert int(r["trials"]) == 200
        assert sum(int(r[c]) for c in ("successes", "failures", "unnecessary", "no_handover")) == 200
        assert len(r["analytic_failure_prob"].split(".")[1]) == 6
    wide = list(csv.reader((out / "failures.csv").read_text().splitlines()))
    assert wide[0] == ["speed_kmh", "hne", "fixed_rss", "hysteresis"]
    assert len(wide) == 4
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 1
    assert manifest["speeds_kmh"] == [3.6, 50.0, 99.6]
    assert manifest["speeds_mps"][0] == pytest.approx(1.0)
    assert manifest["config"]["sweep.trials"] == 200
    assert set(manifest["outputs"]) >= {"sweep", "failures", "unnecessary", "config", "manifest"}


def test_sweep_replay_from_resolved_config(tmp_path):
    _, a = _sweep(tmp_path, "a", "--seed", "9")
    assert main(["sweep", "--config", str(a / "config.resolved.cfg"), "--out", str(tmp_path / "b")]) == 0
    assert (a / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_sweep_parallel_and_backends_identical(tmp_path):
    _, a = _sweep(tmp_path, "a")
    _, b = _sweep(tmp_path, "b", "--workers", "3")
    _, c = _sweep(tmp_path, "c", "--backend", "numpy")
    for name in ("sweep.csv", "failures.csv", "unnecessary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()


def test_sweep_method_filter(tmp_path):
    code, out = _sweep(tmp_path, "a", "--method", "hne")
    assert code == 0
    rows = list(csv.DictReader((out / "sweep.csv").read_text().splitlines()))
    assert {r["method"] for r in rows} == {"hne"}


def test_sweep_config_error_names_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("radio.sigma_db = -2\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "radio.sigma_db" in capsys.readouterr().err
    cfg.write_text("radio.sigmaa = 2\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "radio.sigmaa" in capsys.readouterr().err
    assert main(["sweep", "--set", "hne.window=0", "--out", str(tmp_path / "o")]) == 1


def test_sweep_io_errors(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "o")]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["sweep", "--trials", "5", "--speeds", "10", "--out", str(blocker / "sub")]) == 2


def test_bad_arguments_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--trials", "many"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_thresholds_command(capsys):
    assert main(["thresholds", "--radius", "150", "--speed", "20", "--tau-in", "2", "--tau-out", "2",
                 "--pf", "0.02", "--pu", "0.04"]) == 0
    out = capsys.readouterr().out
    assert "T1 = 1.5321 s" in out
    assert "T2 = 3.0844 s" in out
    assert "recovered P_f = 0.020000" in out
    assert "recovered P_u = 0.040000" in out


def test_thresholds_domain_and_config_errors(capsys):
    assert main(["thresholds", "--radius", "10", "--speed", "20"]) == 3
    assert "cell too small" in capsys.readouterr().err
    assert main(["thresholds", "--pf", "1"]) == 1
    assert main(["thresholds", "--speed", "0"]) == 1


def test_thresholds_speed_in_kmh(capsys):
    assert main(["thresholds", "--speed-kmh", "72"]) == 0
    assert "T1 = 1.5321 s" in capsys.readouterr().out


def test_verify_command(capsys):
    assert main(["verify", "--samples", "100000"]) == 0
    out = capsys.readouterr().out
    assert "18/18 cells" in out
    assert main(["verify", "--samples", "100000", "--set", "baseline.fixed_threshold_dbm=-80"]) == 4
    assert main(["verify", "--samples", "50"]) == 1


def test_pdf_command(tmp_path):
    out = tmp_path / "pdf.csv"
    assert main(["pdf", "--radius", "150", "--speed", "20", "--points", "10001", "--out", str(out)]) == 0
    data = np.genfromtxt(out, delimiter=",", names=True)
    assert data.dtype.names == ("T_s", "pdf", "cdf")
    assert data["T_s"][-1] == pytest.approx(15.0)
    assert data["cdf"][-1] == pytest.approx(1.0)
    assert np.all(np.diff(data["cdf"]) >= 0)
    # the density has an inverse-square-root singularity at 2R/v, so the trapezoid
    # misses a mass of order sqrt(h); compare against that bound rather than 1e-3
    h = data["T_s"][1]
    mass = trapezoid(data["pdf"][:-1], data["T_s"][:-1])
    missing = 1.0 - data["cdf"][-2]
    assert mass + missing == pytest.approx(1.0, abs=1e-3)
    assert 1.0 - trapezoid(data["pdf"], data["T_s"]) < 4 * np.sqrt(h / 15.0)


def test_pdf_invalid_grid():
    assert main(["pdf", "--points", "1"]) == 1
    assert main(["pdf", "--radius", "-1"]) == 1


def test_pdf_stdout(capsys):
    assert main(["pdf", "--points", "3", "--speed-kmh", "36"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "T_s,pdf,cdf" and len(lines) == 4
