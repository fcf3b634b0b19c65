import importlib
import json
import os
import sys

import pytest

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))
sys.path.insert(0, BASE_DIR)

from privcon import cli  # noqa: E402
from privcon.core.augment import AugmentedSystem  # noqa: E402
from privcon.core.catalog import load_catalog  # noqa: E402
from privcon.core.errors import PreconditionError  # noqa: E402
from privcon.tests.fixtures import example1_matrix  # noqa: E402

DATA_DIR = os.path.join(BASE_DIR, "data")


def data(name):
    return os.path.join(DATA_DIR, name)


def augment(tmp_path, graph, *extra, name="sys.json"):
    out = tmp_path / name
    rc = cli.main(["augment", data(graph), "--out", str(out), *extra])
    return rc, out


def test_parse_values_flags_inexact_floats():
    exact, flagged = cli.parse_values("1/2, 3, 0.25")
    assert [str(x) for x in exact] == ["1/2", "3", "1/4"]
    assert not flagged
    _, flagged = cli.parse_values("0.1234567891")
    assert flagged


def test_run_config_validation():
    with pytest.raises(ValueError):
        cli.RunConfig(input="x.json", tolerance=0)
    with pytest.raises(ValueError):
        cli.RunConfig(input="x.json", algorithm="alg9")
    config = cli.RunConfig(input="x.json", seed=4, algorithm="alg1")
    assert config.split_choice(3, 2).width == 2
    assert config.rng().integers(0, 100) == cli.RunConfig(input="x.json", seed=4).rng().integers(0, 100)
    with pytest.raises(PreconditionError, match="PRIVCON_SEED"):
        cli.RunConfig(input="x.json", seed=None, algorithm="alg1").rng()


def test_augment_p1d_writes_example1(tmp_path):
    rc, out = augment(tmp_path, "cycle3.json", "--alg", "p1d", "--x0", "1/2,1/3,1/5")
    assert rc == cli.EXIT_OK
    system = AugmentedSystem.load(out)
    assert system.ap == example1_matrix()
    assert "rationalized_inputs" not in json.loads(out.read_text())


def test_augment_flags_rationalized_floats(tmp_path):
    rc, out = augment(tmp_path, "cycle3.json", "--alg", "p1d", "--x0", "0.3333333333,0.5,0.2")
    assert rc == cli.EXIT_OK
    assert json.loads(out.read_text())["rationalized_inputs"] is True


def test_augment_alg1_needs_three_agents(tmp_path, capsys):
    rc, _ = augment(tmp_path, "two_agents.json", "--alg", "alg1", "--seed", "3")
    assert rc == cli.EXIT_PRECONDITION
    assert "A2: at least three agents" in capsys.readouterr().err


def test_augment_alg1_reports_agent_count_before_seed(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "DEFAULT_SEED", None)
    rc, _ = augment(tmp_path, "two_agents.json", "--alg", "alg1")
    assert rc == cli.EXIT_PRECONDITION
    err = capsys.readouterr().err
    assert "A2: at least three agents" in err
    assert "PRIVCON_SEED" not in err
    rc, _ = augment(tmp_path, "cycle3.json", "--alg", "alg1")
    assert rc == cli.EXIT_PRECONDITION
    assert "PRIVCON_SEED" in capsys.readouterr().err


def test_augment_alg2_is_deterministic(tmp_path):
    args = ("--alg", "alg2", "--x0", "1/2,1/3,1/5", "--seed", "7")
    _, first = augment(tmp_path, "cycle3.json", *args, name="a.json")
    _, second = augment(tmp_path, "cycle3.json", *args, name="b.json")
    assert first.read_bytes() == second.read_bytes()


def test_augment_default_output_name(tmp_path):
    rc = cli.main(["augment", data("cycle3.json"), "--alg", "raw", "--x0", "1,2,3", "--out-dir", str(tmp_path)])
    assert rc == cli.EXIT_OK
    assert (tmp_path / "cycle3_raw.json").exists()


def test_augment_missing_file(tmp_path):
    rc = cli.main(["augment", str(tmp_path / "nope.json")])
    assert rc == cli.EXIT_IO


def test_audit_exit_codes(tmp_path, capsys):
    _, private = augment(tmp_path, "cycle3.json", "--alg", "p1d", "--x0", "1/2,1/3,1/5", name="p.json")
    _, raw = augment(tmp_path, "cycle3.json", "--alg", "raw", "--x0", "1/2,1/3,1/5", name="r.json")
    report = tmp_path / "report.json"
    assert cli.main(["audit", str(private), "--observer", "0", "--report", str(report)]) == cli.EXIT_OK
    assert json.loads(report.read_text())["verdict"] == "private"
    assert cli.main(["audit", str(raw), "--observer", "0"]) == cli.EXIT_NOT_PRIVATE
    assert "NOT private" in capsys.readouterr().out
    assert cli.main(["audit", str(tmp_path / "missing.json")]) == cli.EXIT_IO


def test_audit_malformed_system(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["audit", str(bad)]) == cli.EXIT_IO


def test_audit_ragged_system_is_a_format_error(tmp_path):
    _, system = augment(tmp_path, "cycle3.json", "--alg", "p1d", "--x0", "1/2,1/3,1/5")
    data = json.loads(system.read_text())
    data["ap"][2] = data["ap"][2][:-1]
    system.write_text(json.dumps(data))
    assert cli.main(["audit", str(system)]) == cli.EXIT_IO


def test_simulate_example1(tmp_path):
    _, system = augment(tmp_path, "cycle3.json", "--alg", "p1d", "--x0", "1/2,1/3,1/5")
    out = tmp_path / "trace.json"
    trace_csv = tmp_path / "trace.csv"
    rc = cli.main(["simulate", str(system), "--tol", "1e-6", "--json", str(out), "--trace", str(trace_csv)])
    assert rc == cli.EXIT_OK
    summary = json.loads(out.read_text())
    assert summary["converged"] is True
    assert abs(summary["consensus_value"] - 31 / 90) <= 1e-6
    assert trace_csv.exists()


def test_simulate_period_two_gadget(tmp_path, capsys):
    _, system = augment(
        tmp_path, "two_agents.json", "--alg", "alg1", "--min-agents", "2", "--stochastic",
        "--x0", "9/10,1/10", "--seed", "1",
    )
    trace_csv = tmp_path / "osc.csv"
    rc = cli.main(["simulate", str(system), "--tol", "1e-9", "--max-rounds", "10000", "--trace", str(trace_csv)])
    assert rc == cli.EXIT_NOT_CONVERGED
    assert "period-2 oscillation suspected" in capsys.readouterr().out
    assert trace_csv.exists()


def test_simulate_both_modes_agree(tmp_path, capsys):
    x0 = "0.1,0.3,0.6,0.43,0.85,0.9,0.45,0.11,0.06,0.51,0.13"
    _, system = augment(tmp_path, "example2.json", "--alg", "p1d", "--x0", x0)
    rc = cli.main(["simulate", str(system), "--mode", "both", "--tol", "1e-6", "--max-rounds", "3000"])
    assert rc == cli.EXIT_OK
    line = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("max cross-mode deviation")][0]
    assert float(line.split(":")[1]) <= 1e-12


def test_simulate_needs_initial_state(tmp_path):
    _, system = augment(tmp_path, "cycle3.json", "--alg", "raw")
    assert cli.main(["simulate", str(system)]) == cli.EXIT_PRECONDITION


def test_catalog_command(tmp_path, capsys):
    out = tmp_path / "cat.json"
    assert cli.main(["catalog", "--kind", "4aug", "--trials", "5", "--out", str(out)]) == cli.EXIT_OK
    entries = load_catalog(out)
    assert entries
    assert all(e.filter_results.passed for e in entries)
    assert f"4aug: {len(entries)} classes" in capsys.readouterr().out


def test_bench_command(capsys):
    assert cli.main(["bench", "--sizes", "2"]) == cli.EXIT_PRECONDITION
    assert cli.main(["bench", "--sizes", "8,16", "--repeats", "1"]) == cli.EXIT_OK
    assert "log-log slope" in capsys.readouterr().out


def test_ledger_records_runs(tmp_path, monkeypatch):
    monkeypatch.setenv("DB_URL", "sqlite:///:memory:")
    db = importlib.import_module("privcon.core.db")
    importlib.reload(db)
    _, system = augment(tmp_path, "cycle3.json", "--alg", "p1d", "--x0", "1/2,1/3,1/5")
    assert cli.main(["--ledger", "audit", str(system)]) == cli.EXIT_OK
    assert cli.main(["--ledger", "simulate", str(system), "--tol", "1e-6"]) == cli.EXIT_OK
    stats = db.stats()
    assert stats["runs"] == 2
    assert stats["private"] == 1
    assert stats["converged"] == 1
