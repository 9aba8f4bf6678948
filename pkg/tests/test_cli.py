import io
import json
import subprocess
import sys

import pytest

from gcdlab.cli import run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


def test_gcdsum_example():
    code, text = call("gcdsum", "--alpha", "1.0", "--seq", "1,2,3,6", "--normalized")
    assert code == 0
    report = json.loads(text)
    assert report["rows"][0]["value"] == 2.0
    assert report["config"]["seed"] == 0
    assert report["schema_version"] == 1


def test_extremal_example():
    code, text = call("extremal", "--kind", "squarefree", "--r", "2", "--alpha", "1")
    row = json.loads(text)["rows"][0]
    assert code == 0
    assert row["seq"] == [1, 2, 3, 6]
    assert row["closed_form"] == 8.0 and row["brute"] == 8.0


def test_factorize_example():
    code, text = call("factorize", "12")
    assert code == 0
    assert json.loads(text)["rows"][0]["multi_index"] == "{1:2, 2:1}"


def test_usage_errors_exit_2(capsys):
    assert call("nonsense")[0] == 2
    assert call("gcdsum", "--alpha", "1", "--bogus")[0] == 2
    assert call("gcdsum", "--alpha", "1")[0] == 2
    assert call("gcdsum", "--alpha", "1", "--seq", "1,x")[0] == 2


def test_computation_error_exits_1(capsys):
    assert call("gcdsum", "--alpha", "1.5", "--seq", "1,2")[0] == 1
    assert call("resonance", "--v", "3", "--w", "2")[0] == 1


@pytest.mark.parametrize("argv", [
    ["gcdsum", "--alpha", "0.5", "--seq", "4,6,9,10", "--check"],
    ["reduce", "--index-set", '[{"1": 2}, {"2": 1}, {}]', "--alpha", "1"],
    ["spectral", "--random", "3", "--max-n", "12", "--seed", "5"],
    ["verify-poisson", "--index-set", '[{}, {"1": 1}]', "--method", "mc", "--samples", "20000"],
    ["bounds", "--alpha", "0.5,0.75", "--N", "100,1e4"],
    ["resonance", "--v", "4", "--w", "6", "--J", "3", "--s", "0.9"],
    ["maximal", "--seq", "1,2,5", "--coeffs", "1,-0.5,0.25"],
    ["ch-ratio", "--family", "powers2", "--N", "3,5"],
])
def test_deterministic_and_replayable(argv, tmp_path):
    code1, a = call(*argv)
    code2, b = call(*argv, "--workers", "3")
    assert code1 == code2 == 0
    assert a == b
    path = tmp_path / "report.json"
    path.write_text(a)
    code, text = call("selftest", "--from-report", str(path))
    assert code == 0, text
    assert all(r["passed"] for r in json.loads(text)["rows"])


def test_replay_detects_tampering(tmp_path):
    _, text = call("gcdsum", "--alpha", "1", "--seq", "1,2,3,6")
    report = json.loads(text)
    report["rows"][0]["value"] = 2.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(report))
    code, out = call("selftest", "--from-report", str(path))
    assert code == 1


def test_csv_and_human_formats():
    code, text = call("bounds", "--alpha", "0.75", "--N", "1000", "--format", "csv")
    assert code == 0
    assert text.splitlines()[0] == "alpha,N,g,exp_g,gal,dh,harman_floor,extremal_value"
    code, text = call("resonance", "--v", "1", "--w", "2", "--format", "human")
    assert code == 0 and "value=" in text


def test_timing_only_on_request():
    _, text = call("factorize", "30")
    assert "timing" not in json.loads(text)
    _, text = call("factorize", "30", "--timing")
    assert "seconds" in json.loads(text)["timing"]


def test_workers_env(monkeypatch):
    monkeypatch.setenv("GCDLAB_WORKERS", "2")
    code, text = call("spectral", "--random", "2", "--max-n", "6")
    assert code == 0


def test_selftest_passes():
    code, text = call("selftest")
    assert code == 0
    rows = json.loads(text)["rows"]
    assert rows and all(r["passed"] for r in rows)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gcdlab", "factorize", "6"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][0]["multi_index"] == "{1:1, 2:1}"
