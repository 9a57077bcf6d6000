import json
import math

import pytest

from unruhqfi import channels, cli
from unruhqfi.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_qfi_golden(capsys):
    code, out, _ = run(capsys, "qfi", "--mu", "0.2", "--r", str(math.pi / 6), "--gamma-a", "1",
                       "--scenario", "qubit", "--wrt", "r")
    assert code == 0
    assert len(out.splitlines()) == 1
    rec = json.loads(out)
    assert set(rec) == {"f_total", "f_cl", "f_qu", "f_mix", "residual_vs_sld"}
    assert rec["f_total"] == pytest.approx(0.9687912, abs=1e-6)


def test_qfi_rounded_input(capsys):
    code, out, _ = run(capsys, "qfi", "--mu", "0.2", "--r", "0.5236", "--gamma-a", "1", "--scenario", "qubit")
    assert code == 0
    assert json.loads(out)["f_total"] == pytest.approx(0.9687912, abs=1e-5)


def test_qfi_r0_and_pi4(capsys):
    code, out, _ = run(capsys, "qfi", "--mu", "0.3", "--r", "0", "--gamma", "0.4", "--scenario", "both")
    assert code == 0 and abs(json.loads(out)["f_total"]) <= 1e-10
    code, out, _ = run(capsys, "qfi", "--mu", "0.3", "--r", "pi/4", "--provider", "fd", "--wrt", "mu")
    assert code == 0 and json.loads(out)["f_total"] > 0


def test_qfi_exit_codes(capsys):
    assert run(capsys, "qfi", "--mu", "0.7")[0] == 3
    assert run(capsys, "qfi", "--r", "1.0")[0] == 3
    assert run(capsys, "qfi", "--gamma", "0.2", "--gamma-a", "0.1")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["qfi", "--scenario", "loud"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["qfi", "--mu", "abc"])
    assert exc.value.code == 2


def test_sweep_writes_csv(tmp_path, capsys):
    prefix = str(tmp_path / "s")
    code, _, err = run(capsys, "sweep", "--axis1", "r:0:pi/4:5", "--mu", "0.2", "--out", prefix)
    assert code == 0 and "cells=5" in err and "failures=0" in err
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert len(lines) == 6
    assert float(lines[1].split(",")[4]) == 0.0
    first = (tmp_path / "s.csv").read_bytes()
    run(capsys, "sweep", "--axis1", "r:0:pi/4:5", "--mu", "0.2", "--out", prefix)
    assert (tmp_path / "s.csv").read_bytes() == first


def test_sweep_heatmap_frozen_json(tmp_path, capsys):
    prefix = str(tmp_path / "h")
    code, out, _ = run(capsys, "sweep", "--axis1", "mu:0:0.5:6", "--axis2", "gamma:0:1:5", "--r", "0.1",
                       "--scenario", "qubit", "--out", prefix, "--heatmap", "--components", "--frozen",
                       "--min-cells", "4", "--json")
    assert code == 0
    summary = json.loads(out)
    assert summary["cells"] == 30 and summary["failures"] == 0
    pgm = (tmp_path / "h.pgm").read_text().split("\n")
    assert pgm[:3] == ["P2", "5 6", "65535"]
    rows = (tmp_path / "h.csv").read_text().splitlines()
    assert len(rows) == 31 and all(field for field in rows[1].split(",")[4:])
    regions = json.loads((tmp_path / "h.frozen.json").read_text())
    assert len(regions) == summary["frozen_regions"]
    for reg in regions:
        assert reg["flatness"] <= 0.05 and reg["area"] >= 4


def test_sweep_usage_errors(tmp_path, capsys):
    out = str(tmp_path / "x")
    assert run(capsys, "sweep", "--out", out)[0] == 2
    assert run(capsys, "sweep", "--axis1", "r:0:0.5:5")[0] == 2
    assert run(capsys, "sweep", "--axis1", "r:0:0.5", "--out", out)[0] == 2
    assert run(capsys, "sweep", "--axis1", "r:0:0.5:5", "--heatmap", "--out", out)[0] == 2
    assert run(capsys, "sweep", "--axis1", "mu:0:0.9:5", "--out", out)[0] == 3


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mu": 0.2, "r": "pi/4", "gamma_a": 1, "scenario": "qubit"}))
    code, out, _ = run(capsys, "qfi", "--config", str(cfg))
    from_file = json.loads(out)["f_total"]
    code2, out2, _ = run(capsys, "qfi", "--config", str(cfg), "--r", str(math.pi / 6))
    assert code == code2 == 0
    assert json.loads(out2)["f_total"] == pytest.approx(0.9687912, abs=1e-6)
    assert from_file != json.loads(out2)["f_total"]

    cfg.write_text(json.dumps({"mu": 0.2, "colour": "red"}))
    code, _, err = run(capsys, "qfi", "--config", str(cfg))
    assert code == 2 and "colour" in err
    cfg.write_text("[1, 2]")
    assert run(capsys, "qfi", "--config", str(cfg))[0] == 2
    assert run(capsys, "qfi", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_figure_curves(tmp_path, capsys):
    prefix = str(tmp_path / "f3")
    code, _, err = run(capsys, "figure", "--id", "3", "--out", prefix, "--points", "11")
    assert code == 0 and "gamma=0.99" in err
    lines = (tmp_path / "f3.csv").read_text().splitlines()
    assert lines[0] == "r,mu=0.01,mu=0.1,mu=0.2,mu=0.3"
    assert len(lines) == 12
    assert all(float(v) == 0.0 for v in lines[1].split(",")[1:])


def test_figure_heatmap(tmp_path, capsys):
    prefix = str(tmp_path / "f2a")
    code, _, _ = run(capsys, "figure", "--id", "2a", "--out", prefix, "--points", "6")
    assert code == 0
    assert (tmp_path / "f2a.pgm").read_text().startswith("P2\n6 6\n65535\n")
    assert len((tmp_path / "f2a.csv").read_text().splitlines()) == 37
    first = (tmp_path / "f2a.pgm").read_bytes()
    run(capsys, "figure", "--id", "2a", "--out", prefix, "--points", "6", "--workers", "2")
    assert (tmp_path / "f2a.pgm").read_bytes() == first


def test_figure_r_override(tmp_path, capsys):
    code, _, err = run(capsys, "figure", "--id", "8a", "--out", str(tmp_path / "a"), "--points", "3", "--r", "0.1")
    assert code == 0 and "r=0.10000000000000001" in err
    assert run(capsys, "figure", "--id", "3", "--out", str(tmp_path / "b"), "--r", "0.1")[0] == 2


def test_figure_unknown_id(capsys, tmp_path):
    code, _, err = run(capsys, "figure", "--id", "99", "--out", str(tmp_path / "z"))
    assert code == 2 and "99" in err


def test_validate_passes(capsys):
    code, out, err = run(capsys, "validate", "--samples", "3", "--json")
    assert code == 0
    rec = json.loads(out)
    assert rec["ok"] and len(rec["suites"]) == 7
    assert "PASS cptp" in err


def test_validate_catches_bad_qutrit_weight(capsys, monkeypatch):
    def unnormalized(gamma):
        r1 = math.sqrt(1 - 2 * gamma / 3)
        return r1, 2 * gamma / 3

    monkeypatch.setattr(channels, "qutrit_amplitudes", unnormalized)
    code, _, err = run(capsys, "validate", "--samples", "1")
    assert code == 1
    assert "FAIL cptp" in err


def test_validate_bad_samples(capsys):
    assert run(capsys, "validate", "--samples", "0")[0] == 2


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "QFI_THREADS" in capsys.readouterr().out
    assert cli.CONFIG_KEYS >= {"mu", "r", "gamma", "axis1", "tau", "workers"}


def test_sweep_degraded_exit(tmp_path, capsys, monkeypatch):
    from unruhqfi.errors import SweepDegraded

    def degraded(*args, **kwargs):
        raise SweepDegraded("5 of 5 cells failed")

    monkeypatch.setattr(cli, "run_sweep", degraded)
    code, _, err = run(capsys, "sweep", "--axis1", "r:0:0.5:5", "--out", str(tmp_path / "d"))
    assert code == 4 and "5 of 5" in err
