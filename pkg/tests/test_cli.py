import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from affsob.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main

SPECS = Path(__file__).resolve().parents[1] / "demos" / "specs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def payload(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_constants_record_both_forms(capsys):
    code, d = payload(capsys, "constants", "--n", "3", "--p", "2", "--a", "1", "--alpha", "2")
    assert code == EXIT_PASS and d["status"] == "pass" and d["seed"] == 20240611
    names = {r["name"] for r in d["records"]}
    assert {"S_cal", "K_cal", "R_cal", "L_cal", "G_cal"} <= names
    for r in d["records"]:
        assert {"defining", "simplified", "rel_gap", "flagged"} <= set(r)
        assert not r["flagged"]


@pytest.mark.parametrize("alpha", ["1", "-0.5"])
def test_constants_reject_bad_alpha(capsys, alpha):
    code, _, err = run(capsys, "constants", "--n", "3", "--p", "2", "--alpha", alpha)
    assert code == EXIT_USAGE and err


def test_limit_table(capsys):
    code, d = payload(capsys, "constants", "--limit-p1", "--n", "2", "3", "--a", "0", "1",
                      "--alpha", "2", "0.5")
    assert code == EXIT_PASS
    gn = [r for r in d["records"] if r["name"] in ("G_cal", "N_cal")]
    assert len(gn) == 8 and all(r["gap_to_S"] < 1e-3 for r in gn)


def test_csv_floats_round_trip(capsys):
    code, out, _ = run(capsys, "constants", "--n", "3", "--p", "1.5", "--a", "0.5", "--format", "csv")
    assert code == EXIT_PASS
    head, body = out.split("\n", 1)
    assert head.startswith("# ") and json.loads(head[2:])["command"] == "constants"
    rows = list(csv.DictReader(io.StringIO(body)))
    _, d = payload(capsys, "constants", "--n", "3", "--p", "1.5", "--a", "0.5")
    by = {r["name"]: r for r in d["records"]}
    for row in rows:
        assert float(row["defining"]) == by[row["name"]]["defining"]


def test_output_is_byte_identical_across_runs(capsys, tmp_path):
    outs = []
    f = tmp_path / "o.json"
    for _ in range(2):
        assert main(["verify", "stronger", "--function", str(SPECS / "gaussian.json"), "--n", "2",
                     "--p", "2", "--a", "1", "--out", str(f)]) == EXIT_PASS
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]


def test_verify_stronger_is_equality_in_the_plane(capsys):
    code, d = payload(capsys, "verify", "stronger", "--function", '{"family":"gaussian","n":2}',
                      "--p", "2", "--a", "1", "--expect", "equality")
    assert code == EXIT_PASS and d["reports"][0]["ratio"] == pytest.approx(1.0, abs=1e-12)


def test_verify_failed_expectation_exits_one(capsys):
    code, d = payload(capsys, "verify", "sobolev", "--function", '{"family":"gaussian","n":2}',
                      "--p", "2", "--a", "1", "--expect", "equality")
    assert code == EXIT_FAIL and d["status"] == "fail"


@pytest.mark.parametrize("spec", ['{"family": "gaussian", "n": 2', '{"family": "nonesuch", "n": 2}',
                                  "missing-file.json", '{"family": "gaussian", "n": 5}'])
def test_bad_function_specs_are_usage_errors(capsys, spec):
    code, _, err = run(capsys, "verify", "sobolev", "--function", spec, "--n", "2", "--p", "1.5")
    assert code == EXIT_USAGE and err.strip()


def test_config_file_then_flags(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": [2], "p": [1.5], "a": [0.0], "seed": 3}))
    _, d = payload(capsys, "constants", "--config", str(cfg))
    assert d["seed"] == 3 and {r["n"] for r in d["records"]} == {2}
    _, d = payload(capsys, "constants", "--config", str(cfg), "--n", "3", "--seed", "4")
    assert d["seed"] == 4 and {r["n"] for r in d["records"]} == {3}
    assert d["config"]["p"] == [1.5]


@pytest.mark.parametrize("cfg", [{"bogus": 1}, {"budget": {"nodes": 3}}, {"command": "sweep"}, [1, 2]])
def test_bad_configs_are_usage_errors(capsys, tmp_path, cfg):
    f = tmp_path / "c.json"
    f.write_text(json.dumps(cfg))
    code, _, _ = run(capsys, "constants", "--config", str(f))
    assert code == EXIT_USAGE


def test_centroid_square(capsys):
    code, d = payload(capsys, "centroid", "--body", str(SPECS / "square.json"), "--p", "2")
    assert code == EXIT_PASS
    import math
    assert d["rows"][0]["ratio"] == pytest.approx(math.pi / 3, rel=1e-12)


def test_sweep_detects_injected_fault(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "2", "--p", "2", "--a", "1", "--alpha", "0.5",
                       "--fault", "S_cal=1.01")
    assert code == EXIT_FAIL
    rows = list(csv.DictReader(io.StringIO(out.split("\n", 1)[1])))
    assert any(r["ok"] == "false" and r["inequality"] == "sobolev" for r in rows)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "affsob", "constants", "--n", "2", "--p", "1.5"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == EXIT_PASS
    assert json.loads(r.stdout)["tool"] == "affsob"
