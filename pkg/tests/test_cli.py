import json
import subprocess
import sys

import pytest

from qtoroidal.cli import main

SMALL = ["--degree", "0", "--ball", "0", "--window", "1"]


def _run(tmp_path, *argv, name="r.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def _strip_times(obj):
    if isinstance(obj, dict):
        return {k: _strip_times(v) for k, v in obj.items() if k not in ("time_ms", "elapsed")}
    if isinstance(obj, list):
        return [_strip_times(x) for x in obj]
    return obj


def test_report_schema_and_success(tmp_path):
    code, rep = _run(tmp_path, "cartan", "--m", "3", "--n", "2")
    assert code == 0
    assert set(rep) == {"config", "checks", "summary"}
    assert rep["config"]["m"] == 3 and rep["config"]["n"] == 2
    for check in rep["checks"]:
        assert {"id", "params", "status", "residuals", "time_ms"} <= set(check)
        assert check["status"] == "pass"
    assert rep["summary"]["status"] == "pass" and rep["summary"]["fail"] == 0


def test_verify_small_passes(tmp_path):
    code, rep = _run(tmp_path, "verify", "--m", "2", "--n", "1", "--weight", "L1", *SMALL, "--suite", "EF,HH")
    assert code == 0
    ids = {c["id"].split("(")[0] for c in rep["checks"]}
    assert {"EF", "HH", "level", "admissibility"} <= ids


def test_check_failure_exits_1(tmp_path):
    code, rep = _run(tmp_path, "verify", "--m", "2", "--n", "3", "--suite", "EF", "--convention", "literal", *SMALL)
    assert code == 1
    bad = [c for c in rep["checks"] if c["status"] == "fail"]
    assert bad
    res = bad[0]["residuals"][0]
    assert res["multi_index"] and res["test_vector"] and res["terms"]


@pytest.mark.parametrize("argv", [
    ["verify", "--m", "2", "--n", "2"],
    ["verify", "--m", "2", "--n", "1", "--weight", "L9"],
    ["verify", "--m", "2", "--n", "1", "--suite", "Serre9"],
    ["verify", "--m", "2", "--n", "1", "--degree", "-1"],
    ["coeffs", "--m", "0", "--n", "1"],
    ["frobnicate"],
    ["cartan", "--bogus"],
])
def test_usage_errors_exit_2(argv, tmp_path):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# acceptance settings\nm = 2\nn = 3\nweight = L1\nrmax = 2\norder = 3\n")
    code, rep = _run(tmp_path, "coeffs", "--config", str(cfg), "--m", "3", "--n", "2")
    assert code == 0
    assert (rep["config"]["m"], rep["config"]["n"], rep["config"]["rmax"]) == (3, 2, 2)
    bad = tmp_path / "bad.cfg"
    bad.write_text("m 2\n")
    assert main(["cartan", "--config", str(bad)]) == 2


def test_report_is_deterministic(tmp_path):
    argv = ["contractions", "--m", "2", "--n", "1", "--order", "4"]
    _, a = _run(tmp_path, *argv)
    _, b = _run(tmp_path, *argv)
    assert _strip_times(a) == _strip_times(b)


def test_module_entry_point(tmp_path):
    out = tmp_path / "c.json"
    proc = subprocess.run([sys.executable, "-m", "qtoroidal", "cartan", "--m", "2", "--n", "1", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "checks passed" in proc.stderr
    assert json.loads(out.read_text())["summary"]["status"] == "pass"
