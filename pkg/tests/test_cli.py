import json

import pytest

from proctheory.audit import REPORT_SCHEMA
from proctheory.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_audit_full_suite_exit_zero(capsys):
    code, out, _ = run(capsys, "audit", "--backend", "cpmC", "--dims", "2,3", "--checks", "all", "--samples", "20")
    assert code == 0 and out.strip().endswith("PASS")


def test_laws_exact(capsys):
    code, out, _ = run(capsys, "laws", "--backend", "matQ", "--dims", "4", "--samples", "30")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["audit", "--backend", "cpmC", "--checks", "no_such"],
    ["audit", "--backend", "nope"],
    ["laws", "--backend", "nope"],
    ["audit", "--mutant", "nope"],
    ["audit", "--samples", "0"],
    ["audit", "--dims", "a,b"],
    ["nonsense"],
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_mutant_exits_one_with_report(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "audit", "--mutant", "non_central_phases", "--checks", "phased_ring_scalars",
                     "--format", "json", "-o", str(path), "--samples", "10")
    assert code == 1
    d = json.loads(path.read_text())
    assert d["passed"] is False and d["entries"][0]["witnesses"]


def test_json_deterministic_apart_from_timestamp(capsys):
    argv = ["audit", "--dims", "2", "--samples", "10", "--format", "json", "--checks", "homogeneity,cp_axiom"]
    a = json.loads(run(capsys, *argv)[1])
    b = json.loads(run(capsys, *argv)[1])
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_env_seed_overrides_flag(capsys, monkeypatch):
    monkeypatch.setenv("PROCTHEORY_SEED", "7")
    code, out, _ = run(capsys, "audit", "--seed", "1", "--dims", "2", "--samples", "5", "--checks", "homogeneity",
                       "--format", "json")
    assert code == 0 and json.loads(out)["config"]["seed"] == 7
    monkeypatch.setenv("PROCTHEORY_SEED", "x")
    assert run(capsys, "audit")[0] == 2


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"backend": "mspek", "dims": [1], "samples": 5, "checks": ["pure_exclusion"]}))
    code, out, _ = run(capsys, "audit", "--config", str(cfg), "--format", "json")
    assert code == 0 and json.loads(out)["config"]["backend"] == "mspek"
    cfg.write_text("{not json")
    assert run(capsys, "audit", "--config", str(cfg))[0] == 2


def test_report_schema(capsys):
    code, out, _ = run(capsys, "report-schema")
    assert code == 0 and json.loads(out) == REPORT_SCHEMA


def test_closure_and_totalise(capsys):
    code, out, _ = run(capsys, "closure", "--dims", "1", "--format", "json")
    assert code == 0 and json.loads(out)["result"]["saturated"] is True
    code, out, _ = run(capsys, "totalise", "--denominator", "2", "--max-word", "4")
    assert code == 0


def test_gp_roundtrip(capsys):
    code, _, _ = run(capsys, "gp-roundtrip", "--dims", "1,2", "--samples", "10")
    assert code == 0


def test_closure_large_needs_flag(capsys):
    assert run(capsys, "closure", "--dims", "3")[0] == 2
