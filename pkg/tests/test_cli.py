import json
import subprocess
import sys

import pytest

from multisio.cli import build_parser, main

SMALL_SCAN = """[grid]
N = 64
T = 8
[omega]
kind = harmonic
q = 2
[experiment]
name = norm_scan_sio
inputs = random_band_limited
band = 1/2
eps_set = 1/4, 1/2, 1
eps_extra = 2
trials = 20
seed = 7
"""


def test_selftest_command(tmp_path, capsys):
    assert main(["selftest", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "PASS selftest.all_checks" in out
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["experiment"] == "selftest" and data["passed"]
    assert (tmp_path / "selftest.csv").exists()


def test_unknown_argument_prints_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["selftest", "--bogus"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "usage: multisio selftest" in err and "--bogus" in err


def test_no_command(capsys):
    assert main([]) == 2
    assert "SUBCOMMAND" in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert main(["probe", "--config", str(tmp_path / "none.ini")]) == 2
    assert "none.ini" in capsys.readouterr().err


def test_config_for_wrong_subcommand(tmp_path, capsys):
    p = tmp_path / "c.ini"
    p.write_text("[experiment]\nname = decay_study\n")
    assert main(["probe", "--config", str(p)]) == 2


def test_bad_config_value(tmp_path, capsys):
    p = tmp_path / "c.ini"
    p.write_text("[omega]\nq = 1/2\n")
    assert main(["probe", "--config", str(p)]) == 2
    assert "must exceed" in capsys.readouterr().err


def test_norm_scan_deterministic_across_threads(tmp_path):
    cfg = tmp_path / "scan.ini"
    cfg.write_text(SMALL_SCAN)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["norm-scan", "--config", str(cfg), "--out", str(a), "--threads", "1"]) in (0, 1)
    assert main(["norm-scan", "--config", str(cfg), "--out", str(b), "--threads", "3"]) in (0, 1)
    for name in ("scan.csv", "summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ja, jb = (json.loads((d / "report.json").read_text()) for d in (a, b))
    ja.pop("run")
    jb.pop("run")
    assert ja == jb


def test_seed_override_changes_scan(tmp_path):
    cfg = tmp_path / "scan.ini"
    cfg.write_text(SMALL_SCAN)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["norm-scan", "--config", str(cfg), "--out", str(a)])
    main(["norm-scan", "--config", str(cfg), "--out", str(b), "--seed", "8"])
    assert (a / "scan.csv").read_bytes() != (b / "scan.csv").read_bytes()


def test_plot_flag(tmp_path):
    pytest.importorskip("matplotlib")
    assert main(["selftest", "--out", str(tmp_path), "--plot"]) == 0


def test_parser_lists_subcommands():
    p = build_parser()
    assert set(p.subcommands) == {"converge-truncation", "converge-lacunary", "norm-scan",
                                  "decay-study", "probe", "selftest"}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "multisio", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "decay-study" in res.stdout
