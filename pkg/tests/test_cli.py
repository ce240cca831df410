import json
import math
import subprocess
import sys

import pytest

from zeroset import cli

CARTWRIGHT = {"command": "check-cartwright", "sequence": {"kind": "half_integers"},
              "majorant": {"kind": "cartwright_imabs", "sigma": math.pi},
              "family": {"variant": "log_cusp"}, "tolerances": {"i_max": 6}}


def run(tmp_path, command, config, *extra):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    out = tmp_path / "out"
    code = cli.main([command, "--config", str(path), "--out", str(out), *extra])
    report = out / "report.json"
    return code, (json.loads(report.read_text(encoding="utf-8")) if report.exists() else None)


def test_oracle_selftest_command(tmp_path):
    code = cli.main(["oracle-selftest", "--out", str(tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert code == 0 and report["results"]["selftest"]["passed"]
    gaps = [c["value"] for c in report["results"]["selftest"]["checks"]
            if c["check"].startswith("jensen")]
    assert gaps and max(gaps) < 1e-8


def test_check_cartwright_bounded(tmp_path):
    code, report = run(tmp_path, "check-cartwright", CARTWRIGHT)
    assert code == 0
    assert report["results"]["criterion"]["verdict"] == "Bounded"
    assert report["config"] == CARTWRIGHT
    assert report["results"]["riesz_fd_crosscheck"]["relative_error"] < 0.02
    assert report["header"]["profile_columns"] == ["R", "lambda", "value", "slack"]


def test_missing_sequence_exits_2(tmp_path, capsys):
    cfg = {"command": "check-jensen", "majorant": {"kind": "cartwright_imabs", "sigma": 1.0}}
    code, report = run(tmp_path, "check-jensen", cfg)
    assert code == 2 and report is None
    assert "sequence" in capsys.readouterr().err


def test_unknown_key_exits_2(tmp_path, capsys):
    code, _ = run(tmp_path, "check-cartwright", {**CARTWRIGHT, "extra": 1})
    assert code == 2 and "extra" in capsys.readouterr().err


def test_unreadable_paths_exit_2(tmp_path, capsys):
    assert cli.main(["check-jensen", "--config", str(tmp_path / "missing.json")]) == 2
    assert "--config" in capsys.readouterr().err
    cfg = {**CARTWRIGHT, "sequence": {"kind": "csv", "path": "nowhere.csv"}}
    code, _ = run(tmp_path, "check-cartwright", cfg)
    assert code == 2 and "sequence" in capsys.readouterr().err


def test_command_mismatch_exits_2(tmp_path):
    code, _ = run(tmp_path, "check-jensen", CARTWRIGHT)
    assert code == 2


def test_nonpositive_tolerance_exits_2(tmp_path):
    code, _ = run(tmp_path, "check-cartwright", {**CARTWRIGHT, "tolerances": {"tol_quad": 0}})
    assert code == 2


def test_numeric_failure_exits_3(tmp_path):
    cfg = {"command": "check-jensen", "sequence": {"kind": "half_integers"},
           "majorant": {"kind": "cartwright_imabs", "sigma": math.pi},
           "family": {"variant": "avg_green"}, "tolerances": {"i_max": 4}}
    code, report = run(tmp_path, "check-jensen", cfg)
    assert code == 3 and report["exit_status"] == 3


def test_emit_profile_writes_csv(tmp_path):
    cfg = {"command": "emit-profile", "sequence": {"kind": "half_integers"},
           "majorant": {"kind": "cartwright_imabs", "sigma": math.pi},
           "family": {"variant": "radial_log", "ratios": [1.0, 0.5]},
           "tolerances": {"i_max": 5}}
    code, report = run(tmp_path, "emit-profile", cfg)
    assert code == 0
    csv_text = (tmp_path / "out" / "profile.csv").read_bytes().decode("utf-8")
    header = csv_text.split("\r\n")[0]
    assert header == ",".join(report["header"]["profile_columns"])
    assert csv_text.count("\r\n") == 7


def test_check_radial(tmp_path):
    cfg = {"command": "check-radial", "weight": {"variant": "power", "alpha": 1.5},
           "majorant": {"kind": "radial", "profile": {"variant": "linear", "sigma": math.pi}},
           "sequence": {"kind": "integers", "symmetric": False}}
    code, report = run(tmp_path, "check-radial", cfg)
    res = report["results"]
    assert code == 0 and res["test"] == "radial_zero_test"
    assert res["integral_test"]["value"] == pytest.approx(2 * math.pi)
    assert res["zero_tail_sum"]["verdict"] == "convergent"


def test_check_radial_constant_weight_skips(tmp_path):
    cfg = {"command": "check-radial", "weight": {"variant": "constant"},
           "majorant": {"kind": "radial", "profile": {"variant": "linear", "sigma": 1.0}}}
    code, report = run(tmp_path, "check-radial", cfg)
    assert code == 0 and report["results"]["admissibility"]["status"] == "rejected"
    assert "integral_test" not in report["results"]


def test_check_uniqueness(tmp_path):
    cfg = {"command": "check-uniqueness", "v": {"variant": "power", "b": 1, "r0": 1, "beta": 3},
           "oracle": {"builtin": "cos_pi"},
           "majorant": {"kind": "radial", "profile": {"variant": "linear", "sigma": math.pi}}}
    code, report = run(tmp_path, "check-uniqueness", cfg)
    assert code == 0
    assert report["results"]["tail_sum"]["verdict"] == "TailSumFinite"
    assert report["results"]["v_inequality"]["lhs"]["finite"]


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ZEROSET_THREADS", "3")
    assert cli._threads(None, {}) == 3
    assert cli._threads(2, {}) == 2
    monkeypatch.setenv("ZEROSET_THREADS", "zero")
    with pytest.raises(cli.ConfigError):
        cli._threads(None, {})


def test_reports_have_no_bare_nonfinite_numbers():
    assert cli.jsonable({"a": math.inf, "b": [math.nan, 1.0]}) == {"a": "inf", "b": ["nan", 1.0]}


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "zeroset.cli", "oracle-selftest", "--out",
                           str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and (tmp_path / "report.json").exists()
