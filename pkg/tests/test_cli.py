"""End-to-end command line checks on a small scenario."""

import csv
from pathlib import Path

import pytest
import yaml

from mdpstream.cli import (
    ExperimentSpec,
    load_experiment_spec,
    main,
    table_filename,
)
from mdpstream.configfile import save_scenario
from mdpstream.model import ConfigurationError
from mdpstream.presets import fair_scenario

BUNDLED = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture
def workspace(tmp_path):
    """A small solved scenario plus an experiment file pointing at it."""
    scenario = fair_scenario(horizon=6, num_runs=2, name="small")
    scenario_path = tmp_path / "small.cfg"
    save_scenario(scenario, str(scenario_path))

    spec_path = tmp_path / "exp.yaml"
    spec_path.write_text(yaml.safe_dump({
        "scenario": "small.cfg",
        "arms": ["proposed", "myopic", "ideal"],
    }), encoding="utf-8")

    tables = tmp_path / "tables"
    rc = main([
        "solve", "--config", str(scenario_path),
        "--out", str(tables / table_filename("small", 850.0, 6)),
    ])
    assert rc == 0
    return tmp_path, scenario_path, spec_path, tables


def read_rows(path):
    with open(path, newline="", encoding="ascii") as fh:
        return list(csv.reader(fh))


def test_table_filename_layout():
    assert table_filename("fair", 850.0, 200) == "policy_fair_cap850_T200.ptab"
    assert table_filename("x", 600.5, 6) == "policy_x_cap600.5_T6.ptab"


def test_solve_run_outputs(workspace):
    tmp, _, spec_path, tables = workspace
    out = tmp / "out"
    rc = main([
        "run", "--spec", str(spec_path),
        "--out-dir", str(out), "--tables-dir", str(tables),
    ])
    assert rc == 0

    rows = read_rows(out / "summary.csv")
    assert rows[0][:4] == ["arm", "sweep_axis", "sweep_value", "run"]
    assert rows[0][-1] == "profit"
    # three arms, two runs each
    assert len(rows) == 1 + 6
    assert sorted({r[0] for r in rows[1:]}) == ["ideal", "myopic", "proposed"]
    assert {r[3] for r in rows[1:]} == {"0", "1"}

    agg = read_rows(out / "aggregate.csv")
    assert len(agg) == 1 + 3
    assert "profit_mean" in agg[0]

    traces = sorted(p.name for p in (out / "traces").iterdir())
    assert "trace_proposed_run0.csv" in traces
    assert len(traces) == 6
    trace = read_rows(out / "traces" / "trace_proposed_run0.csv")
    assert trace[0][0] == "epoch"
    assert len(trace) == 1 + 6  # horizon rows


def test_repeated_runs_are_byte_identical(workspace):
    tmp, _, spec_path, tables = workspace
    args = ["run", "--spec", str(spec_path), "--tables-dir", str(tables)]
    assert main(args + ["--out-dir", str(tmp / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp / "b")]) == 0
    for name in ("summary.csv", "aggregate.csv", "traces/trace_ideal_run1.csv"):
        assert (tmp / "a" / name).read_bytes() == (tmp / "b" / name).read_bytes()


def test_seed_override_changes_results(workspace):
    tmp, _, spec_path, tables = workspace
    args = ["run", "--spec", str(spec_path), "--tables-dir", str(tables)]
    assert main(args + ["--out-dir", str(tmp / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp / "c"), "--seed", "777"]) == 0
    assert (tmp / "a" / "summary.csv").read_bytes() != \
        (tmp / "c" / "summary.csv").read_bytes()


def test_stationary_flag_runs(workspace):
    tmp, _, spec_path, tables = workspace
    rc = main([
        "run", "--spec", str(spec_path), "--tables-dir", str(tables),
        "--out-dir", str(tmp / "s"), "--stationary",
    ])
    assert rc == 0
    assert (tmp / "s" / "summary.csv").exists()


def test_missing_table_names_the_fix(workspace, capsys):
    tmp, _, spec_path, _ = workspace
    rc = main([
        "run", "--spec", str(spec_path),
        "--out-dir", str(tmp / "nope"), "--tables-dir", str(tmp / "empty"),
    ])
    assert rc == 1
    err = capsys.readouterr().err
    assert "missing policy table" in err
    assert "mdpstream solve" in err


def test_rate_cap_sweep(workspace):
    tmp, scenario_path, _, tables = workspace
    rc = main([
        "solve", "--config", str(scenario_path), "--rate-cap", "600",
        "--out", str(tables / table_filename("small", 600.0, 6)),
    ])
    assert rc == 0
    spec_path = tmp / "sweep.yaml"
    spec_path.write_text(yaml.safe_dump({
        "scenario": "small.cfg",
        "arms": ["proposed", "client_centric"],
        "sweep": {"axis": "rate_cap", "values": [850, 600]},
    }), encoding="utf-8")
    out = tmp / "sweep_out"
    rc = main([
        "run", "--spec", str(spec_path),
        "--out-dir", str(out), "--tables-dir", str(tables),
    ])
    assert rc == 0
    agg = read_rows(out / "aggregate.csv")
    assert len(agg) == 1 + 4  # two arms at two cap values
    assert {(r[0], r[2]) for r in agg[1:]} == {
        ("proposed", "850"), ("proposed", "600"),
        ("client_centric", "850"), ("client_centric", "600"),
    }
    names = {p.name for p in (out / "traces").iterdir()}
    assert "trace_proposed_rate_cap600_run0.csv" in names


def test_validate_accepts_bundled_scenarios(capsys):
    assert main(["validate", "--config", str(BUNDLED / "fair.cfg")]) == 0
    out = capsys.readouterr().out
    assert "ok" in out
    assert "state space: 400" in out
    assert "feasible actions: 13" in out


def test_validate_flags_bad_transition_rows(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    save_scenario(fair_scenario(), str(path))
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    data["channel"]["transition"][0] = [0.9, 0.0, 0.0, 0.0]
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    assert main(["validate", "--config", str(path)]) == 1
    assert "PROBLEM" in capsys.readouterr().err


def test_validate_reports_infeasible_cap(tmp_path, capsys):
    path = tmp_path / "tight.cfg"
    save_scenario(fair_scenario().with_rate_cap(100.0), str(path))
    assert main(["validate", "--config", str(path)]) == 2
    assert "no feasible action" in capsys.readouterr().err


def test_unknown_arm_rejected(tmp_path, capsys):
    scenario_path = tmp_path / "s.cfg"
    save_scenario(fair_scenario(), str(scenario_path))
    spec_path = tmp_path / "exp.yaml"
    spec_path.write_text(yaml.safe_dump({
        "scenario": "s.cfg", "arms": ["greedy"],
    }), encoding="utf-8")
    rc = main(["run", "--spec", str(spec_path), "--out-dir", str(tmp_path / "o")])
    assert rc == 1
    assert "greedy" in capsys.readouterr().err


def test_experiment_spec_validation():
    with pytest.raises(ConfigurationError, match="at least one arm"):
        ExperimentSpec(scenario_path="x", arms=())
    with pytest.raises(ConfigurationError, match="sweep axis"):
        ExperimentSpec(scenario_path="x", arms=("myopic",), sweep_axis="price")
    with pytest.raises(ConfigurationError, match="without a sweep axis"):
        ExperimentSpec(
            scenario_path="x", arms=("myopic",), sweep_values=(1.0,)
        )
    with pytest.raises(ConfigurationError, match="needs values"):
        ExperimentSpec(scenario_path="x", arms=("myopic",), sweep_axis="horizon")


def test_experiment_file_parsing(tmp_path):
    spec_path = tmp_path / "exp.yaml"
    spec_path.write_text(yaml.safe_dump({
        "scenario": "sub/s.cfg",
        "arms": ["myopic"],
        "sweep": {"axis": "horizon", "values": [100, 200]},
    }), encoding="utf-8")
    spec = load_experiment_spec(str(spec_path))
    assert spec.scenario_path == str(tmp_path / "sub" / "s.cfg")
    assert spec.sweep_axis == "horizon"
    assert spec.sweep_values == (100.0, 200.0)

    spec_path.write_text(yaml.safe_dump({
        "scenario": "s.cfg", "arms": ["myopic"], "budget": 5,
    }), encoding="utf-8")
    with pytest.raises(ConfigurationError, match="budget"):
        load_experiment_spec(str(spec_path))

    spec_path.write_text(yaml.safe_dump({"arms": ["myopic"]}), encoding="utf-8")
    with pytest.raises(ConfigurationError, match="scenario"):
        load_experiment_spec(str(spec_path))
