import json

import numpy as np
import pytest

from multisio import ConfigError
from multisio.config import default_config, dump_config, eval_fraction, load_config, omega_spec
from multisio.report import Report, Rule, Table, evaluate_rule, read_table, recompute_flags
from multisio.selftest import CHECKS, run_selftest
from multisio.sphere import PowerSingularity


def test_eval_fraction():
    assert eval_fraction("1/4") == 0.25
    assert eval_fraction("2^-3") == 0.125
    assert eval_fraction(" 0.5 ") == 0.5
    with pytest.raises(ConfigError):
        eval_fraction("abc")


def test_defaults_validate():
    cfg = default_config("norm_scan_sio")
    assert cfg.trials == 100 and cfg.q == 1.5
    assert isinstance(omega_spec(cfg), PowerSingularity)
    with pytest.raises(ConfigError):
        default_config("nonexistent")


@pytest.mark.parametrize("override, msg", [
    (dict(q=1.0), "must exceed"),
    (dict(sigma_a=0.4), "must exceed"),
    (dict(n=3), "m\\*n"),
    (dict(N=63), "even"),
    (dict(trials=5), "trials"),
])
def test_validation_messages(override, msg):
    with pytest.raises(ConfigError, match=msg):
        default_config("norm_scan_sio", **override)


def test_load_config(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[grid]\nN = 128\nT = 8\n[omega]\nkind = harmonic\nk = 3\n"
                 "[experiment]\nname = converge_lacunary\neps_set = 1/4, 1/2\n")
    cfg = load_config(p)
    assert cfg.experiment == "converge_lacunary" and cfg.N == 128 and cfg.omega_k == 3
    assert cfg.eps_set == (0.25, 0.5)
    assert load_config(p, experiment="selftest").experiment == "selftest"


@pytest.mark.parametrize("text", ["[bogus]\nx = 1\n", "[grid]\nwhat = 1\n", "[grid]\nN = many\n"])
def test_load_config_rejects(tmp_path, text):
    p = tmp_path / "bad.ini"
    p.write_text(text + "[experiment]\nname = selftest\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_missing_config_names_path(tmp_path):
    with pytest.raises(ConfigError, match="nope.ini"):
        load_config(tmp_path / "nope.ini")


def test_dump_config_is_json():
    json.dumps(dump_config(default_config("decay_study")))


def _table():
    t = Table("t", [("x", ""), ("y", "1"), ("tag", "")])
    for x in range(4):
        t.add(x, 2.0 ** -x, "a" if x % 2 else "b")
    return t


def test_rules():
    tabs = {"t": _table()}
    assert evaluate_rule(Rule("s", "slope_le", "t", y="y", x="x", threshold=-0.99), tabs)["passed"]
    assert not evaluate_rule(Rule("s", "slope_ge", "t", y="y", x="x", threshold=0.0), tabs)["passed"]
    assert evaluate_rule(Rule("m", "max_le", "t", y="y", threshold=1.0), tabs)["value"] == 1.0
    assert evaluate_rule(Rule("m", "min_ge", "t", y="y", threshold=0.1, where={"tag": "a"}), tabs)["passed"]
    assert evaluate_rule(Rule("n", "nonincreasing", "t", y="y"), tabs)["passed"]
    assert evaluate_rule(Rule("f", "max_le_factor_first", "t", y="y", threshold=1.0), tabs)["passed"]
    assert evaluate_rule(Rule("f", "max_le_factor_min", "t", y="y", threshold=8.0), tabs)["passed"]
    with pytest.raises(ValueError):
        evaluate_rule(Rule("u", "unknown", "t", y="y"), tabs)
    zero = Table("z", [("x", ""), ("y", "1")], [(0, 0.0), (1, 0.0)])
    r = evaluate_rule(Rule("s", "slope_le", "z", y="y", x="x"), {"z": zero})
    assert r["passed"] and r["degenerate"]


def test_table_row_length():
    with pytest.raises(ValueError):
        _table().add(1, 2)


def test_report_roundtrip(tmp_path):
    rep = Report("demo", {"a": 1})
    t = rep.table("t", [("x", ""), ("y", "1")])
    t.add(0, 0.1)
    t.add(1, 1.0 / 3.0)
    rep.rule("ok", "max_le", "t", y="y", threshold=0.5)
    rep.rule("bad", "max_le", "t", y="y", threshold=0.2)
    rep.finish().write(tmp_path)
    back = read_table(tmp_path / "t.csv")
    assert back.rows[1][1] == 1.0 / 3.0
    assert back.header() == ["x", "y [1]"]
    assert recompute_flags(tmp_path) == {"ok": True, "bad": False}
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["passed"] is False and "run" in data
    assert rep.summary_lines()[0].startswith("PASS demo.ok")


def test_selftest_all_pass():
    rep = run_selftest()
    tab = rep.tables["selftest"]
    assert len(tab.rows) == len(CHECKS)
    failed = [r[0] for r in tab.rows if not r[1]]
    assert failed == []
    assert rep.passed
