import json
import math
import subprocess
import sys

import pytest

from ifs_lab import cli
from ifs_lab.errors import ConfigError


def run_main(capsys, argv):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_rotnum_report(capsys):
    code, out, _ = run_main(capsys, ["rotnum", "--system", "rotation:0.35", "--n", "10000"])
    assert code == 0
    rep = json.loads(out)
    assert rep["operation"] == "rotnum"
    assert rep["result"]["value"] == pytest.approx(0.35, abs=1e-4)
    assert rep["result"]["error_bound"] == pytest.approx(1e-4)
    assert "wall_time" not in rep


def test_timing_flag_adds_wall_time(capsys):
    code, out, _ = run_main(capsys, ["rotnum", "--system", "rotation:0.35", "--n", "100", "--timing"])
    assert code == 0 and json.loads(out)["wall_time"] >= 0


def test_zoo_build_exits_zero(capsys):
    code, out, _ = run_main(capsys, ["zoo", "build", "cantor-pair", "--depth", "6"])
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "built"


def test_zoo_list(capsys):
    code, out, _ = run_main(capsys, ["zoo", "list"])
    assert code == 0 and "cantorval" in out.split()


def test_malformed_probabilities(capsys):
    code, _, err = run_main(capsys, ["simulate", "--system", "rotation:0.1;rotation:0.2",
                                     "--probabilities", "0.5,,0.5", "--n", "10"])
    assert code == 2 and "probabilities" in err


def test_probabilities_must_sum_to_one(capsys):
    code, _, err = run_main(capsys, ["simulate", "--system", "rotation:0.1;rotation:0.2",
                                     "--probabilities", "0.5,0.6", "--n", "10"])
    assert code == 2 and "probabilities" in err


def test_unknown_map_kind(capsys):
    code, _, err = run_main(capsys, ["rotnum", "--system", "spiral:1"])
    assert code == 2 and "spiral" in err


def test_unknown_config_key_rejected():
    with pytest.raises(ConfigError):
        cli.resolve({"operation": "rotnum", "system": "rotation:0.1", "colour": "red"})
    row = cli.run_config({"name": "x", "operation": "rotnum", "system": "rotation:0.1", "colour": "red"})
    assert row["status"] == "FAILED" and "colour" in row["detail"]


def test_unknown_parameter_rejected():
    with pytest.raises(ConfigError):
        cli.resolve({"operation": "rotnum", "system": "rotation:0.1", "parameters": {"bogus": 1}})


def test_required_parameter():
    with pytest.raises(ConfigError):
        cli.resolve({"operation": "rho-cross", "system": "rotation:0.3"})


def test_batch_failed_row(tmp_path, capsys):
    (tmp_path / "a.json").write_text(json.dumps({
        "operation": "rotnum", "system": "rotation:0.35", "parameters": {"n": 1000},
        "expect": {"value": {"eq": 0.5, "abs_tol": 1e-3}}}))
    (tmp_path / "b.json").write_text(json.dumps({
        "operation": "rotnum", "system": "rotation:0.35", "parameters": {"n": 1000},
        "expect": {"value": {"eq": 0.35, "abs_tol": 1e-3}}}))
    (tmp_path / "c.json").write_text("{not json")
    code, out, _ = run_main(capsys, ["batch", str(tmp_path)])
    assert code == 1
    lines = out.strip().splitlines()
    assert lines[0] == "name,operation,status,verdict,metrics,detail"
    status = {ln.split(",")[0]: ln.split(",")[2] for ln in lines[1:]}
    assert status == {"a": "FAILED", "b": "ok", "c": "FAILED"}


def test_batch_empty_dir(tmp_path, capsys):
    code, out, err = run_main(capsys, ["batch", str(tmp_path)])
    assert code == 0 and "warning" in err
    assert out.strip() == "name,operation,status,verdict,metrics,detail"


def test_reports_are_byte_identical(tmp_path):
    argv = ["simulate", "--system", "rotation:sqrt(2)-1;ns:0,0.5,2", "--n", "2000", "--seed", "7"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(argv + ["--json-out", str(a)]) == 0
    assert cli.main(argv + ["--json-out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_changes_report(tmp_path):
    base = ["simulate", "--system", "rotation:sqrt(2)-1;ns:0,0.5,2", "--n", "2000"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(base + ["--seed", "1", "--json-out", str(a)])
    cli.main(base + ["--seed", "2", "--json-out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_csv_out(tmp_path):
    path = tmp_path / "mu.csv"
    argv = ["simulate", "--system", "rotation:0.1;rotation:0.3", "--n", "50", "--csv-out", str(path),
            "--json-out", str(tmp_path / "r.json")]
    assert cli.main(argv) == 0
    assert len(path.read_text().strip().splitlines()) > 1


@pytest.mark.parametrize("text,value", [("1/3", 1 / 3), ("sqrt(2)-1", math.sqrt(2) - 1), ("-2*pi", -2 * math.pi),
                                        ("1e-4", 1e-4), ("2**3", 8.0)])
def test_parse_number(text, value):
    assert cli.parse_number(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["__import__('os')", "open('x')", "x", "1/0", "inf", "[1]", "sqrt(1,2)", ""])
def test_parse_number_rejects(text):
    with pytest.raises(ConfigError):
        cli.parse_number(text)


def test_check_expectations():
    res = {"a": 1.0, "b": {"c": [3, 4]}, "v": "x"}
    assert cli.check_expectations(res, {"a": {"eq": 1.05, "abs_tol": 0.1}, "b.c.1": {"gt": 3}, "v": "x"}) == []
    fails = cli.check_expectations(res, {"a": {"lt": 0.5}, "missing": 1})
    assert len(fails) == 2


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "ifs_lab.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "ifs_lab" in out.stdout
