"""Seeded session simulator: Markov bandwidth paths, per-segment policy
decisions, proportional sharing of the bottleneck, and fluid playback
buffers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import economics
from .economics import DerivedConstants, ProfitParams, derive_constants
from .model import (
    ChannelModel,
    ConfigurationError,
    QualityLadder,
    SystemState,
    map_bandwidth_to_state,
    _require,
)
from .policies import IdealOracle, IdealPlan, Myopic, Proposed, solve_ideal

SHARING_PROPORTIONAL = "proportional"
SHARING_NONE = "none"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a session needs: content, link model, economics, and the
    run plan.  Policy arms are chosen per experiment, not here."""

    ladder: QualityLadder
    channel: ChannelModel
    profit: ProfitParams
    num_users: int
    horizon: int
    segment_seconds: float = 1.0
    frames_per_second: float = 24.0
    initial_buffer_frames: int = 80
    initial_rate_index: int = 0
    num_runs: int = 15
    rng_seed: int = 101
    sharing_mode: str = SHARING_PROPORTIONAL
    name: str = "scenario"

    def __post_init__(self) -> None:
        _require(self.num_users >= 1, "need at least one user")
        _require(
            self.profit.num_users == self.num_users,
            f"profit params carry {self.profit.num_users} priorities "
            f"but the scenario has {self.num_users} users",
        )
        _require(self.horizon >= 1, "horizon must be at least 1")
        _require(self.segment_seconds > 0, "segment duration must be positive")
        _require(self.frames_per_second > 0, "frame rate must be positive")
        _require(self.initial_buffer_frames >= 0, "initial buffer cannot be negative")
        _require(
            0 <= self.initial_rate_index < len(self.ladder),
            f"initial rate index {self.initial_rate_index} outside the ladder",
        )
        _require(self.num_runs >= 1, "need at least one run")
        _require(
            self.sharing_mode in (SHARING_PROPORTIONAL, SHARING_NONE),
            f"unknown sharing mode {self.sharing_mode!r}",
        )

    @property
    def initial_buffer_seconds(self) -> float:
        return self.initial_buffer_frames / self.frames_per_second

    def derived_constants(self) -> DerivedConstants:
        return derive_constants(self.ladder, self.channel, self.profit)

    def with_rate_cap(self, cap_kbps: float) -> "ScenarioConfig":
        return replace(self, profit=replace(self.profit, total_rate_cap_kbps=cap_kbps))

    def with_horizon(self, horizon: int) -> "ScenarioConfig":
        return replace(self, horizon=horizon)


@dataclass(frozen=True)
class SegmentRecord:
    """Everything observed for one segment period: per-user tuples plus the
    shared charge.  Income and costs are per user and unweighted; the stage
    profit applies the priorities and subtracts the bottleneck charge."""

    epoch: int
    rate_kbps: tuple[float, ...]
    channel_state: tuple[int, ...]
    effective_bw_kbps: tuple[float, ...]
    download_s: tuple[float, ...]
    rebuffer_s: tuple[float, ...]
    buffer_s: tuple[float, ...]
    income: tuple[float, ...]
    buffering_cost: tuple[float, ...]
    variation_cost: tuple[float, ...]
    bottleneck_cost: float
    stage_profit: float


def user_rngs(seed: int, run_index: int, num_users: int) -> list[np.random.Generator]:
    """Independent, reproducible per-user generators for one (seed, run)."""
    return [
        np.random.default_rng(np.random.SeedSequence([seed, run_index, user]))
        for user in range(num_users)
    ]


def sample_channel_path(
    channel: ChannelModel,
    initial_state: int,
    num_steps: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Realized channel states, length ``num_steps + 1`` starting from
    ``initial_state``."""
    if not 0 <= initial_state < channel.num_states:
        raise ValueError(f"initial state {initial_state} out of range")
    cumulative = np.cumsum(channel.transition, axis=1)
    path = np.empty(num_steps + 1, dtype=np.int64)
    path[0] = initial_state
    state = initial_state
    for step in range(1, num_steps + 1):
        draw = rng.random()
        state = int(np.searchsorted(cumulative[state], draw, side="right"))
        state = min(state, channel.num_states - 1)  # guard the top edge
        path[step] = state
    return path


def effective_bandwidth(
    chosen_rates_kbps,
    raw_bw_kbps,
    rate_cap_kbps: float,
    sharing_mode: str,
) -> tuple[float, ...]:
    """Per-user delivered bandwidth after the shared bottleneck.

    Proportional mode models a scheduler that, whenever aggregate demand
    exceeds the cap, splits the cap in proportion to the requested video
    rates; each user is additionally limited by its own link.  Demand
    counts only what a user can actually pull: the smaller of its link
    bandwidth and its requested rate.  Mode "none" bypasses the bottleneck
    entirely.
    """
    raw = tuple(float(b) for b in raw_bw_kbps)
    if sharing_mode == SHARING_NONE:
        return raw
    if sharing_mode != SHARING_PROPORTIONAL:
        raise ConfigurationError(f"unknown sharing mode {sharing_mode!r}")
    rates = tuple(float(r) for r in chosen_rates_kbps)
    if len(rates) != len(raw):
        raise ValueError("need one chosen rate per user")
    demand = sum(min(b, r) for b, r in zip(raw, rates))
    if demand <= rate_cap_kbps:
        return raw
    total_rate = sum(rates)
    return tuple(
        min(b, rate_cap_kbps * r / total_rate) for b, r in zip(raw, rates)
    )


def step_buffer(
    buffer_s: float, segment_s: float, download_s: float
) -> tuple[float, float]:
    """Advance one user's fluid playback buffer across one download.

    The buffer drains one second of content per wall-clock second while the
    download runs; if it empties, playback stalls for the remainder.  On
    completion the new segment's duration is credited.  Returns the new
    buffer level and the stall time.
    """
    if buffer_s < 0 or segment_s <= 0 or download_s < 0:
        raise ValueError("buffer and download times must be nonnegative, segment positive")
    rebuffer = max(0.0, download_s - buffer_s)
    remaining = max(0.0, buffer_s - download_s)
    return remaining + segment_s, rebuffer


def run_session(
    config: ScenarioConfig,
    policy: Proposed | Myopic | IdealOracle | IdealPlan,
    run_index: int = 0,
) -> list[SegmentRecord]:
    """Simulate one seeded session under one policy arm.

    The channel paths depend only on (seed, run, user), never on the
    policy, so arms compared at the same run index face identical
    bandwidth realizations.  Realized profit is scored against the
    bandwidth each user's connection actually delivered; with an infinite
    congestion price the bottleneck charge is zero because the cap is
    enforced by rationing, not billed.
    """
    consts = config.derived_constants()
    params = config.profit
    ladder = config.ladder
    channel = config.channel
    n = config.num_users

    rngs = user_rngs(config.rng_seed, run_index, n)
    stationary = channel.stationary_distribution()
    stationary_cum = np.cumsum(stationary)
    paths = np.empty((n, config.horizon + 1), dtype=np.int64)
    for u in range(n):
        first = int(np.searchsorted(stationary_cum, rngs[u].random(), side="right"))
        first = min(first, channel.num_states - 1)
        paths[u] = sample_channel_path(channel, first, config.horizon, rngs[u])

    if isinstance(policy, IdealOracle):
        policy = solve_ideal(
            paths, (config.initial_rate_index,) * n, ladder, channel, params, consts
        )

    estimators = None
    if isinstance(policy, Myopic):
        estimators = [policy.estimator_factory() for _ in range(n)]

    charge_overload = math.isfinite(params.congestion_price)
    prev_rates = (config.initial_rate_index,) * n
    buffers = [config.initial_buffer_seconds] * n
    records: list[SegmentRecord] = []

    for t in range(config.horizon):
        if isinstance(policy, Proposed):
            observed = tuple(
                map_bandwidth_to_state(channel.bandwidth_of(int(paths[u, t])), channel)
                for u in range(n)
            )
            action = policy.decide(t, SystemState(prev_rates, observed))
        elif isinstance(policy, Myopic):
            action = policy.decide([est.value for est in estimators])
        else:
            action = policy.decide(t)
        if action.num_users != n:
            raise ValueError(f"policy returned {action.num_users} rates for {n} users")

        rates = action.rates_kbps(ladder)
        raw_next = tuple(channel.bandwidth_of(int(s)) for s in paths[:, t + 1])
        effective = effective_bandwidth(
            rates, raw_next, params.total_rate_cap_kbps, config.sharing_mode
        )

        downloads, rebuffers, levels = [], [], []
        for u in range(n):
            download = rates[u] * config.segment_seconds / effective[u]
            buffers[u], stall = step_buffer(
                buffers[u], config.segment_seconds, download
            )
            downloads.append(download)
            rebuffers.append(stall)
            levels.append(buffers[u])

        incomes, buf_costs, var_costs = [], [], []
        for u in range(n):
            prev_kbps = ladder.rates[prev_rates[u]]
            incomes.append(
                economics.playback_income(rates[u], effective[u], params, consts)
            )
            buf_costs.append(
                economics.buffering_cost(rates[u], effective[u], params, consts)
            )
            var_costs.append(
                economics.smoothness_cost(prev_kbps, rates[u], params, consts)
            )
        if charge_overload:
            charge = economics.bottleneck_cost(rates, params)
        else:
            charge = 0.0  # infinite price: the cap is rationed, never billed
        profit = (
            sum(
                params.user_priorities[u]
                * (incomes[u] - buf_costs[u] - var_costs[u])
                for u in range(n)
            )
            - charge
        )

        if estimators is not None:
            for u in range(n):
                estimators[u].add(effective[u])

        records.append(SegmentRecord(
            epoch=t,
            rate_kbps=rates,
            channel_state=tuple(int(s) for s in paths[:, t + 1]),
            effective_bw_kbps=effective,
            download_s=tuple(downloads),
            rebuffer_s=tuple(rebuffers),
            buffer_s=tuple(levels),
            income=tuple(incomes),
            buffering_cost=tuple(buf_costs),
            variation_cost=tuple(var_costs),
            bottleneck_cost=charge,
            stage_profit=profit,
        ))
        prev_rates = action.rate_indices

    return records
