"""Operator-side rate adaptation for competing HTTP video streams.

A mobile operator serving several adaptive-bitrate video sessions over one
bottleneck can pick every client's next segment rate itself.  This package
models that choice as a finite-horizon sequential decision problem: each
user's last-hop link follows a finite-state Markov bandwidth model, and
the operator balances playback income against buffering, rate-variation,
and congestion costs, weighted per user so premium subscribers can be
favored.

The pieces:

- ``model``: bitrate ladders, Markov channel models, joint states/actions
- ``economics``: the profit terms and their normalization constants
- ``mdp``: transition structure, feasibility filtering, backward induction
- ``policies``: solved-table lookup, the client throughput rule, and a
  hindsight planner used as a non-causal upper bound
- ``sim``: seeded multi-user session simulator with proportional
  bottleneck sharing and fluid playback buffers
- ``metrics``: per-session summaries and cross-run aggregation
- ``presets``: the bundled fair and differentiated case studies
- ``configfile`` / ``cli``: YAML scenario files and the ``mdpstream``
  command line tool (``solve``, ``run``, ``validate``)

Typical library use::

    from mdpstream import presets, economics, mdp, sim, metrics

    config = presets.fair_scenario()
    consts = config.derived_constants()
    table = mdp.backward_induction(
        config.ladder, config.channel, config.profit, consts, config.horizon
    )
    trace = sim.run_session(config, policies.Proposed(table), run_index=0)
    print(metrics.summarize(trace, config, arm="proposed"))

The ``demos`` directory in the repository walks through each capability.
"""

from .economics import (
    INFEASIBLE,
    DerivedConstants,
    ProfitParams,
    derive_constants,
)
from .mdp import (
    InfeasibleModelError,
    PolicyTable,
    backward_induction,
    extract_policy,
    feasible_actions,
)
from .metrics import SessionSummary, aggregate_runs, summarize
from .model import (
    Action,
    ChannelModel,
    ConfigurationError,
    QualityLadder,
    SystemState,
    enumerate_states,
    map_bandwidth_to_state,
)
from .policies import IdealOracle, Myopic, Proposed, solve_ideal
from .sim import ScenarioConfig, SegmentRecord, run_session

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ChannelModel",
    "ConfigurationError",
    "DerivedConstants",
    "IdealOracle",
    "INFEASIBLE",
    "InfeasibleModelError",
    "Myopic",
    "PolicyTable",
    "ProfitParams",
    "Proposed",
    "QualityLadder",
    "ScenarioConfig",
    "SegmentRecord",
    "SessionSummary",
    "SystemState",
    "aggregate_runs",
    "backward_induction",
    "derive_constants",
    "enumerate_states",
    "extract_policy",
    "feasible_actions",
    "map_bandwidth_to_state",
    "run_session",
    "solve_ideal",
    "summarize",
]
