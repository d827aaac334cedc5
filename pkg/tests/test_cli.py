import json
import math
import subprocess
import sys

import pytest

from fockriesz import report as rp
from fockriesz.cli import main, validate_report
from fockriesz.sequences import lambda_log_modulus


def run(*argv):
    return subprocess.run([sys.executable, "-m", "fockriesz.cli", *argv], capture_output=True, text=True)


def _csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


@pytest.fixture()
def lam_spec(tmp_path):
    path = tmp_path / "lam.json"
    assert main(["seq", "gen", "--beta", "0.5", "--count", "100", "--c", "0", "--out", str(path)]) == 0
    return path


def test_check_reference_exits_zero_and_satisfies(lam_spec, capsys):
    assert main(["check", "--spec", str(lam_spec)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"]["verdict"] == "satisfies"
    assert doc["version"] and doc["config"]["d_min"] == 1e-3


def test_malformed_spec_exits_one_with_field_path(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"beta": 0.5, "count": 3, "deltas": [0, 0, "x"]}')
    assert main(["check", "--spec", str(bad)]) == 1
    assert "deltas/2" in capsys.readouterr().err
    bad.write_text("{nope")
    assert main(["check", "--spec", str(bad)]) == 1
    assert main(["check", "--spec", str(tmp_path / "missing.json")]) == 1


def test_strict_inconclusive_exits_two(tmp_path, capsys):
    path = tmp_path / "near.json"
    main(["seq", "gen", "--beta", "0.5", "--count", "100", "--c", "0.44", "--out", str(path)])
    assert main(["check", "--spec", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["results"]["verdict"] == "inconclusive"
    assert main(["check", "--spec", str(path), "--strict"]) == 2


def test_usage_error_exits_one():
    res = run("moments", "--beta", "3")
    assert res.returncode == 1
    res = run("bogus")
    assert res.returncode == 1


def test_errors_name_the_flag_or_module(tmp_path, capsys):
    ref = tmp_path / "r.json"
    main(["seq", "gen", "--beta", "0.5", "--count", "10", "--out", str(ref)])
    assert main(["gram", "--spec", str(ref), "--sizes", "8,16"]) == 1
    assert "--sizes" in capsys.readouterr().err
    # more factors than points fails inside the products module
    assert main(["product", "--spec", str(ref), "--M", "50"]) == 1
    assert "[fockriesz.products]" in capsys.readouterr().err


def test_moments_csv_columns(capsys):
    assert main(["moments", "--beta", "0.5", "--n-max", "3"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert header == ["n", "w_exact", "w_asymptotic", "diff"]
    assert len(rows) == 4 and float(rows[0][1]) == pytest.approx(2.6879258864013077)


def test_kernel_points_and_json(capsys):
    assert main(["kernel", "--beta", "0.5", "--points", "grid:1,5,3", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["s"] for r in doc["results"]] == [1.0, 3.0, 5.0]
    assert main(["kernel", "--beta", "0.5", "--points", "tau:1..2"]) == 1


def test_gram_bari_matrix_product_interp(lam_spec, tmp_path, capsys):
    assert main(["gram", "--spec", str(lam_spec), "--sizes", "8,16"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert header == ["M", "lambda_min", "lambda_max", "cond", "trend"] and rows[0][-1] == "stable"

    assert main(["bari", "--beta", "0.5", "--n-max", "4"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert header[:4] == ["n", "J1", "J2", "defect"] and len(rows) == 5

    assert main(["matrix", "--which", "B", "--range", "0..1,0..2", "--count", "12"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert header == ["n", "m", "log_abs_B"] and len(rows) == 6
    assert main(["matrix", "--which", "A", "--range", "3..1,0..1"]) == 1
    capsys.readouterr()

    assert main(["product", "--spec", str(lam_spec), "--grid", "20,5"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert len(rows) == 5 and header[2] == "log_abs_G"
    assert main(["product", "--spec", str(lam_spec), "--envelope"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"]["band_width"] <= doc["golden"]["envelope_band_width_max"]

    data, pts = tmp_path / "v.json", tmp_path / "z.json"
    data.write_text("[1, [0, 1], 2]")
    pts.write_text(json.dumps([[lambda_log_modulus(1, 0.5), 0.0], [2.0, 1.0]]))
    assert main(["interp", "--spec", str(lam_spec), "--data", str(data), "--eval", str(pts), "--M", "30"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert float(rows[0][2]) == pytest.approx(0.0, abs=1e-9)  # |L(gamma_1)| = |i| = 1
    pts.write_text('[[1.0]]')
    assert main(["interp", "--spec", str(lam_spec), "--data", str(data), "--eval", str(pts)]) == 1
    assert "--eval/0" in capsys.readouterr().err


def test_seq_inspect(lam_spec, capsys):
    assert main(["seq", "inspect", "--spec", str(lam_spec), "--head", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"]["separation"]["separated"] and len(doc["results"]["head"]) == 3


def test_dumps_is_deterministic_and_round_trips_floats():
    obj = {"b": [0.1, 1e-300, -2.5], "a": {"x": math.inf, "y": float("nan"), "z": True}}
    text = rp.dumps(obj)
    assert text == rp.dumps(dict(reversed(list(obj.items()))))
    back = json.loads(text)
    assert back["b"] == [0.1, 1e-300, -2.5]
    assert back["a"]["x"] == "inf" and back["a"]["y"] == "nan"


def test_report_schema_rejects_missing_header():
    with pytest.raises(Exception):
        validate_report({"tool": "fockriesz"})


def test_jobs_env_default(monkeypatch):
    monkeypatch.setenv(rp.JOBS_ENV, "3")
    assert rp.default_jobs() == 3
    monkeypatch.setenv(rp.JOBS_ENV, "junk")
    assert rp.default_jobs() == 1


def test_parallel_map_preserves_order():
    assert rp.parallel_map(abs, [-3, 1, -2], jobs=2) == [3, 1, 2]
