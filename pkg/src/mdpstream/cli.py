"""Command line front end: solve policy tables, run experiment arms over
seeded sessions, and validate configuration files.

Exit codes: 0 on success, 1 for configuration problems (malformed files,
missing tables, violated invariants), 2 when the model itself is
infeasible (no action can respect the rate cap).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass

from .configfile import load_scenario, read_yaml
from .economics import derive_constants
from .mdp import (
    InfeasibleModelError,
    PolicyTable,
    backward_induction,
    feasible_actions,
)
from .metrics import SessionSummary, aggregate_runs, summarize
from .model import (
    ChannelModel,
    ConfigurationError,
    QualityLadder,
    map_bandwidth_to_state,
    state_space_size,
)
from .policies import IdealOracle, Myopic, Proposed
from .sim import ScenarioConfig, run_session

ARMS = ("proposed", "myopic", "ideal", "client_centric")
SWEEP_AXES = ("none", "rate_cap", "horizon")

_EXPERIMENT_KEYS = {"scenario", "arms", "sweep"}


@dataclass(frozen=True)
class ExperimentSpec:
    """One batch of sessions: which scenario, which policy arms, and an
    optional one-dimensional parameter sweep."""

    scenario_path: str
    arms: tuple[str, ...]
    sweep_axis: str = "none"
    sweep_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.arms:
            raise ConfigurationError("experiment needs at least one arm")
        for arm in self.arms:
            if arm not in ARMS:
                raise ConfigurationError(
                    f"unknown arm {arm!r}; choose from {', '.join(ARMS)}"
                )
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigurationError(
                f"unknown sweep axis {self.sweep_axis!r}; choose from {', '.join(SWEEP_AXES)}"
            )
        if self.sweep_axis == "none" and self.sweep_values:
            raise ConfigurationError("sweep values given without a sweep axis")
        if self.sweep_axis != "none" and not self.sweep_values:
            raise ConfigurationError(f"sweep over {self.sweep_axis} needs values")


def load_experiment_spec(path: str) -> ExperimentSpec:
    data = read_yaml(path)
    unknown = set(data) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigurationError(
            f"unknown experiment keys: {', '.join(sorted(unknown))}"
        )
    try:
        scenario_rel = data["scenario"]
        arms = tuple(data["arms"])
    except KeyError as missing:
        raise ConfigurationError(f"{path}: experiment needs {missing}") from None
    sweep = data.get("sweep") or {}
    axis = sweep.get("axis", "none") if sweep else "none"
    values = tuple(float(v) for v in sweep.get("values", ())) if sweep else ()
    scenario_path = os.path.join(os.path.dirname(os.path.abspath(path)), scenario_rel)
    return ExperimentSpec(
        scenario_path=os.path.normpath(scenario_path),
        arms=arms,
        sweep_axis=axis,
        sweep_values=values,
    )


# ----------------------------- output helpers -----------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def table_filename(scenario_name: str, cap_kbps: float, horizon: int) -> str:
    return f"policy_{scenario_name}_cap{cap_kbps:g}_T{horizon}.ptab"


def _sweep_configs(config: ScenarioConfig, spec: ExperimentSpec):
    """Yield (sweep value or None, adjusted scenario) pairs."""
    if spec.sweep_axis == "none":
        yield None, config
    elif spec.sweep_axis == "rate_cap":
        for value in spec.sweep_values:
            yield value, config.with_rate_cap(value)
    else:
        for value in spec.sweep_values:
            yield value, config.with_horizon(int(value))


def _cell_tag(arm: str, axis: str, value: float | None, run: int) -> str:
    if value is None:
        return f"{arm}_run{run}"
    return f"{arm}_{axis}{value:g}_run{run}"


def _write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def _write_trace(path: str, trace, num_users: int) -> None:
    header = ["epoch"]
    for u in range(1, num_users + 1):
        header += [
            f"u{u}_rate_kbps", f"u{u}_channel_state", f"u{u}_effective_bw_kbps",
            f"u{u}_download_s", f"u{u}_rebuffer_s", f"u{u}_buffer_s",
            f"u{u}_income", f"u{u}_buffering_cost", f"u{u}_variation_cost",
        ]
    header += ["bottleneck_cost", "stage_profit"]
    rows = []
    for rec in trace:
        row = [str(rec.epoch)]
        for u in range(num_users):
            row += [
                _fmt(rec.rate_kbps[u]), str(rec.channel_state[u]),
                _fmt(rec.effective_bw_kbps[u]), _fmt(rec.download_s[u]),
                _fmt(rec.rebuffer_s[u]), _fmt(rec.buffer_s[u]),
                _fmt(rec.income[u]), _fmt(rec.buffering_cost[u]),
                _fmt(rec.variation_cost[u]),
            ]
        row += [_fmt(rec.bottleneck_cost), _fmt(rec.stage_profit)]
        rows.append(row)
    _write_csv(path, header, rows)


def _summary_header(num_users: int) -> list[str]:
    header = ["arm", "sweep_axis", "sweep_value", "run"]
    for u in range(1, num_users + 1):
        header += [
            f"u{u}_avg_bitrate_kbps", f"u{u}_buffering_ratio",
            f"u{u}_stall_events_per_second", f"u{u}_stalled_frames_per_second",
            f"u{u}_significant_variations",
        ]
    header.append("profit")
    return header


def _summary_row(
    summary: SessionSummary, axis: str, value: float | None
) -> list[str]:
    row = [
        summary.arm,
        axis,
        "" if value is None else _fmt(value),
        str(summary.run_index),
    ]
    for u in range(len(summary.avg_bitrate_kbps)):
        row += [
            _fmt(summary.avg_bitrate_kbps[u]),
            _fmt(summary.buffering_ratio[u]),
            _fmt(summary.stall_events_per_second[u]),
            _fmt(summary.stalled_frames_per_second[u]),
            str(summary.significant_variations[u]),
        ]
    row.append(_fmt(summary.profit))
    return row


def run_experiment(
    config: ScenarioConfig,
    spec: ExperimentSpec,
    out_dir: str,
    *,
    tables_dir: str | None = None,
    seed: int | None = None,
    stationary: bool = False,
) -> str:
    """Execute every (arm, sweep value, run) cell and write the CSV outputs.

    Returns the summary CSV path.  Proposed arms require their policy
    tables to exist already (see ``table_filename``); everything is written
    atomically and depends only on the inputs and the seed, so repeated
    calls produce byte-identical files.
    """
    if seed is not None:
        from dataclasses import replace
        config = replace(config, rng_seed=seed)
    tables_dir = tables_dir or os.path.join(out_dir, "tables")
    traces_dir = os.path.join(out_dir, "traces")
    os.makedirs(traces_dir, exist_ok=True)

    summary_rows: list[list[str]] = []
    aggregate_rows: list[list[str]] = []
    aggregate_header: list[str] | None = None

    for value, scenario in _sweep_configs(config, spec):
        table: PolicyTable | None = None
        if "proposed" in spec.arms:
            table_path = os.path.join(tables_dir, table_filename(
                config.name, scenario.profit.total_rate_cap_kbps, scenario.horizon
            ))
            if not os.path.exists(table_path):
                raise ConfigurationError(
                    f"missing policy table {table_path}; create it with: "
                    f"mdpstream solve --config <scenario> "
                    f"--rate-cap {scenario.profit.total_rate_cap_kbps:g} "
                    f"--horizon {scenario.horizon} --out {table_path}"
                )
            table = PolicyTable.load(table_path)

        for arm in spec.arms:
            if arm == "proposed":
                policy = Proposed(table=table, stationary=stationary)
            elif arm == "ideal":
                policy = IdealOracle()
            else:  # myopic and client_centric share the client rule
                policy = Myopic(ladder=scenario.ladder)

            summaries = []
            for run in range(scenario.num_runs):
                trace = run_session(scenario, policy, run)
                tag = _cell_tag(arm, spec.sweep_axis, value, run)
                _write_trace(
                    os.path.join(traces_dir, f"trace_{tag}.csv"),
                    trace, scenario.num_users,
                )
                summary = summarize(trace, scenario, arm=arm, run_index=run)
                summaries.append(summary)
                summary_rows.append(_summary_row(summary, spec.sweep_axis, value))

            agg = aggregate_runs(summaries)
            if aggregate_header is None:
                aggregate_header = ["arm", "sweep_axis", "sweep_value"]
                for key in agg:
                    aggregate_header += [f"{key}_mean", f"{key}_std"]
            row = [arm, spec.sweep_axis, "" if value is None else _fmt(value)]
            for mean, std in agg.values():
                row += [_fmt(mean), _fmt(std)]
            aggregate_rows.append(row)

    summary_path = os.path.join(out_dir, "summary.csv")
    _write_csv(summary_path, _summary_header(config.num_users), summary_rows)
    _write_csv(
        os.path.join(out_dir, "aggregate.csv"),
        aggregate_header or ["arm", "sweep_axis", "sweep_value"],
        aggregate_rows,
    )
    return summary_path


# ----------------------------- subcommands -----------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    if args.rate_cap is not None:
        config = config.with_rate_cap(args.rate_cap)
    if args.horizon is not None:
        config = config.with_horizon(args.horizon)
    consts = derive_constants(config.ladder, config.channel, config.profit)
    table = backward_induction(
        config.ladder, config.channel, config.profit, consts, config.horizon
    )
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    table.save(args.out)
    print(
        f"solved {config.name}: {table.num_states} states x {table.horizon} epochs "
        f"-> {args.out}"
    )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    spec = load_experiment_spec(args.spec)
    config = load_scenario(spec.scenario_path)
    os.makedirs(args.out_dir, exist_ok=True)
    summary_path = run_experiment(
        config,
        spec,
        args.out_dir,
        tables_dir=args.tables_dir,
        seed=args.seed,
        stationary=args.stationary,
    )
    print(f"wrote {summary_path}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    """Check a scenario file and report derived quantities.

    Problems are reported, not thrown; the exit code distinguishes
    configuration errors (1) from an infeasible model (2).
    """
    problems: list[str] = []
    infeasible = False
    data = read_yaml(args.config)

    config = None
    try:
        config = load_scenario(args.config)
    except ConfigurationError as err:
        problems.append(str(err))

    if config is None:
        # Retry the pieces separately so several problems surface at once.
        for section, builder in (
            ("ladder", lambda: QualityLadder(tuple(data.get("ladder_kbps", ())))),
            ("channel", lambda: ChannelModel(
                transition=data.get("channel", {}).get("transition", ()),
                state_bandwidth=tuple(
                    data.get("channel", {}).get("state_bandwidth_kbps", ())
                ),
                boundaries=tuple(data.get("channel", {}).get("boundaries_kbps", ())),
            )),
        ):
            try:
                builder()
            except (ConfigurationError, TypeError, ValueError) as err:
                problems.append(f"{section}: {err}")
    else:
        consts = derive_constants(config.ladder, config.channel, config.profit)
        size = state_space_size(config.ladder, config.channel, config.num_users)
        print(f"scenario {config.name}: {config.num_users} users, "
              f"{len(config.ladder)} rates, {config.channel.num_states} channel states")
        print(f"state space: {size}")
        print(f"income normalization: {consts.income_norm:.6f}")
        if consts.min_shortfall_kbps is not None:
            print(f"smallest shortfall: {consts.min_shortfall_kbps:.6f} Kbps")
            print(f"buffering normalization: {consts.buffering_norm:.6f}")
        else:
            print("buffering impossible on this grid (bandwidth always covers every rate)")
        if consts.variation_norm is not None:
            print(f"variation normalization: {consts.variation_norm:.6f}")
        else:
            print("ladder span never exceeds the variation threshold")
        stationary = config.channel.stationary_distribution()
        print("stationary channel distribution: "
              + ", ".join(f"{p:.4f}" for p in stationary))
        for k, bw in enumerate(config.channel.state_bandwidth):
            mapped = map_bandwidth_to_state(bw, config.channel)
            if mapped != k:
                problems.append(
                    f"state {k}'s representative bandwidth {bw} Kbps maps to "
                    f"state {mapped}; adjust the boundaries or the representative"
                )
        try:
            acts = feasible_actions(config.num_users, config.ladder, config.profit)
            print(f"feasible actions: {len(acts)}")
        except InfeasibleModelError as err:
            problems.append(str(err))
            infeasible = True

    if problems:
        for p in problems:
            print(f"PROBLEM: {p}", file=sys.stderr)
        return 2 if infeasible and len(problems) == 1 else 1
    print("ok")
    return 0


# ----------------------------- entry point -----------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdpstream",
        description="Operator-side rate adaptation for competing HTTP streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a policy table for a scenario")
    solve.add_argument("--config", required=True, help="scenario file")
    solve.add_argument("--out", required=True, help="policy table output path")
    solve.add_argument("--rate-cap", type=float, default=None,
                       help="override the scenario's total rate cap (Kbps)")
    solve.add_argument("--horizon", type=int, default=None,
                       help="override the scenario's horizon (epochs)")
    solve.set_defaults(func=cmd_solve)

    run = sub.add_parser("run", help="run an experiment over seeded sessions")
    run.add_argument("--spec", required=True, help="experiment file")
    run.add_argument("--out-dir", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario's base seed")
    run.add_argument("--stationary", action="store_true",
                     help="reuse the epoch-0 policy at every step")
    run.add_argument("--tables-dir", default=None,
                     help="where solved tables live (default: <out-dir>/tables)")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate", help="check a scenario file")
    validate.add_argument("--config", required=True, help="scenario file")
    validate.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except InfeasibleModelError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
