"""Finite-horizon solver: transition structure over joint states,
feasibility filtering under an infinite congestion price, and backward
induction producing a time-indexed policy table."""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import economics
from .economics import DerivedConstants, ProfitParams
from .model import (
    Action,
    ChannelModel,
    ConfigurationError,
    DEFAULT_STATE_SPACE_CAP,
    QualityLadder,
    SystemState,
    state_space_size,
)

POLICY_TABLE_FORMAT = "mdpstream-policy-table"
CANONICAL_ORDER_VERSION = 1


class InfeasibleModelError(RuntimeError):
    """No joint action satisfies the aggregate rate cap."""


def channel_transition_prob(
    from_states, to_states, channel: ChannelModel
) -> float:
    """Probability that every user's channel moves as given, assuming the
    per-user chains evolve independently."""
    if len(from_states) != len(to_states):
        raise ValueError("need one source and one destination state per user")
    prob = 1.0
    for f, t in zip(from_states, to_states):
        prob *= channel.transition[f, t]
    return float(prob)


def transition_prob(
    state: SystemState, action: Action, next_state: SystemState, channel: ChannelModel
) -> float:
    """Joint transition probability.  Rates move deterministically to the
    action's assignment; channels factor across users."""
    if next_state.rate_indices != action.rate_indices:
        return 0.0
    return channel_transition_prob(
        state.channel_indices, next_state.channel_indices, channel
    )


def feasible_actions(
    num_users: int, ladder: QualityLadder, params: ProfitParams
) -> list[Action]:
    """All joint rate assignments in canonical (lexicographic) order,
    filtered to the rate cap when the congestion price is infinite."""
    if num_users != params.num_users:
        raise ConfigurationError(
            f"params carry {params.num_users} priorities but {num_users} users requested"
        )
    actions = [
        Action(rate_indices=digits)
        for digits in itertools.product(range(len(ladder)), repeat=num_users)
    ]
    if math.isinf(params.congestion_price):
        actions = [
            a for a in actions
            if sum(a.rates_kbps(ladder)) <= params.total_rate_cap_kbps
        ]
        if not actions:
            raise InfeasibleModelError(
                f"no feasible action: rate cap {params.total_rate_cap_kbps} Kbps "
                f"cannot serve {num_users} users even at the minimum rate "
                f"{ladder.r_min} Kbps"
            )
    return actions


# ----------------------------- solver internals -----------------------------


class _ActionTables:
    """Per-action profit pieces shared by the solver and the hindsight planner.

    Actions are kept in tie-break order: ascending aggregate rate, then
    lexicographically ascending rate vector.  Taking the first maximizer in
    this order implements the deterministic tie-break.
    """

    def __init__(
        self,
        ladder: QualityLadder,
        channel: ChannelModel,
        params: ProfitParams,
        consts: DerivedConstants,
        num_users: int,
    ) -> None:
        m, k, n = len(ladder), channel.num_states, num_users
        self.num_rate_vectors = m ** n
        self.num_chan_vectors = k ** n

        # Per-user scalar tables, built through the economics functions.
        self.playbuf = np.array([
            [
                economics.playback_income(r, b, params, consts)
                - economics.buffering_cost(r, b, params, consts)
                for b in channel.state_bandwidth
            ]
            for r in ladder.rates
        ])
        self.variation = np.array([
            [economics.smoothness_cost(prev, nxt, params, consts) for nxt in ladder.rates]
            for prev in ladder.rates
        ])

        self.rate_digits = np.array(
            list(itertools.product(range(m), repeat=n)), dtype=np.int64
        ).reshape(self.num_rate_vectors, n)

        acts = feasible_actions(n, ladder, params)
        order = sorted(
            acts,
            key=lambda a: (sum(a.rates_kbps(ladder)), a.rate_indices),
        )
        self.actions = order
        self.action_digits = np.array(
            [a.rate_indices for a in order], dtype=np.int64
        )
        # Multi-index of each action's rate vector, base-m digits.
        weights = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
        self.action_multi = self.action_digits @ weights

        charges = []
        for a in order:
            c = economics.bottleneck_cost(a.rates_kbps(ladder), params)
            if isinstance(c, economics.Infeasible):
                raise AssertionError("feasible_actions let an infeasible action through")
            charges.append(c)
        self.bottleneck = np.array(charges)

        prio = np.array(params.user_priorities)
        # Priority-weighted variation penalty for each (rate vector, action).
        shape_r = (m,) * n
        self.variation_by_action = np.empty(
            (len(order), self.num_rate_vectors)
        )
        for pos, digits in enumerate(self.action_digits):
            acc = np.zeros(shape_r)
            for u in range(n):
                axis_shape = [1] * n
                axis_shape[u] = m
                acc = acc + prio[u] * self.variation[:, digits[u]].reshape(axis_shape)
            self.variation_by_action[pos] = acc.reshape(-1)


class _SolverTables(_ActionTables):
    """Adds the expectation and joint-channel machinery used by the sweep."""

    def __init__(self, ladder, channel, params, consts, num_users):
        super().__init__(ladder, channel, params, consts, num_users)
        m, k, n = len(ladder), channel.num_states, num_users

        # Expected income-minus-buffering for each (chosen rate, current
        # channel state), taken over the next channel state.
        exp_playbuf = self.playbuf @ channel.transition.T

        prio = np.array(params.user_priorities)
        shape_c = (k,) * n
        self.expected_playbuf_by_action = np.empty(
            (len(self.actions), self.num_chan_vectors)
        )
        for pos, digits in enumerate(self.action_digits):
            acc = np.zeros(shape_c)
            for u in range(n):
                axis_shape = [1] * n
                axis_shape[u] = k
                acc = acc + prio[u] * exp_playbuf[digits[u]].reshape(axis_shape)
            self.expected_playbuf_by_action[pos] = acc.reshape(-1)

        self.joint_channel = reduce(np.kron, [channel.transition] * n)

        # Canonical state index for each (rate vector, channel vector) pair.
        chan_digits = np.array(
            list(itertools.product(range(k), repeat=n)), dtype=np.int64
        ).reshape(self.num_chan_vectors, n)
        digit = (
            self.rate_digits[:, None, :] * k + chan_digits[None, :, :]
        )  # (R, C, n)
        place = (m * k) ** np.arange(n - 1, -1, -1, dtype=np.int64)
        self.canonical_index = digit @ place


def _backup(tables: _SolverTables, v_next: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One backward sweep: epoch-t values and chosen actions from epoch-t+1
    values.  ``v_next`` has shape (rate vectors, channel vectors); reads and
    writes touch separate buffers, so within-sweep updates cannot leak."""
    num_actions = len(tables.actions)
    q = np.empty((num_actions, tables.num_rate_vectors, tables.num_chan_vectors))
    for pos in range(num_actions):
        future = tables.joint_channel @ v_next[tables.action_multi[pos]]
        q[pos] = (
            (tables.expected_playbuf_by_action[pos] + future)[None, :]
            - tables.variation_by_action[pos][:, None]
            - tables.bottleneck[pos]
        )
    values = q.max(axis=0)
    choice = q.argmax(axis=0)  # first maximizer wins, i.e. the tie-break order
    return values, choice


def backward_induction(
    ladder: QualityLadder,
    channel: ChannelModel,
    params: ProfitParams,
    consts: DerivedConstants,
    horizon: int,
    *,
    state_space_cap: int = DEFAULT_STATE_SPACE_CAP,
) -> PolicyTable:
    """Solve the finite-horizon adaptation problem by backward induction.

    Terminal values are zero.  Each sweep computes epoch t from epoch t+1
    only, then the buffers swap.  Ties between equally valued actions
    resolve to the smallest aggregate rate and then the lexicographically
    smallest rate vector, so solves are fully deterministic.
    """
    if horizon < 1:
        raise ConfigurationError(f"horizon must be at least 1, got {horizon}")
    n = params.num_users
    size = state_space_size(ladder, channel, n)
    if size > state_space_cap:
        raise ConfigurationError(
            f"state space has {size} states, exceeding the cap of {state_space_cap}"
        )

    tables = _SolverTables(ladder, channel, params, consts, n)
    values = np.zeros((horizon + 1, size))
    actions = np.zeros((horizon, size, n), dtype=np.int64)

    v_next = np.zeros((tables.num_rate_vectors, tables.num_chan_vectors))
    for t in range(horizon - 1, -1, -1):
        v_now, choice = _backup(tables, v_next)
        values[t][tables.canonical_index] = v_now
        actions[t][tables.canonical_index] = tables.action_digits[choice]
        v_next = v_now

    values.setflags(write=False)
    actions.setflags(write=False)
    return PolicyTable(
        ladder_size=len(ladder),
        num_channel_states=channel.num_states,
        num_users=n,
        horizon=horizon,
        values=values,
        action_rate_indices=actions,
    )


# ----------------------------- policy table -----------------------------


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Optimal decisions and values for every (epoch, state), stored densely
    in canonical state order."""

    ladder_size: int
    num_channel_states: int
    num_users: int
    horizon: int
    values: np.ndarray  # (horizon + 1, states); terminal row is all zero
    action_rate_indices: np.ndarray  # (horizon, states, users)

    def __post_init__(self) -> None:
        size = (self.ladder_size * self.num_channel_states) ** self.num_users
        if self.values.shape != (self.horizon + 1, size):
            raise ValueError(
                f"values shaped {self.values.shape}, expected {(self.horizon + 1, size)}"
            )
        if self.action_rate_indices.shape != (self.horizon, size, self.num_users):
            raise ValueError(
                f"actions shaped {self.action_rate_indices.shape}, "
                f"expected {(self.horizon, size, self.num_users)}"
            )

    @property
    def num_states(self) -> int:
        return (self.ladder_size * self.num_channel_states) ** self.num_users

    def state_index(self, state: SystemState) -> int:
        if state.num_users != self.num_users:
            raise ValueError(
                f"table solved for {self.num_users} users, state has {state.num_users}"
            )
        idx = 0
        for r, c in zip(state.rate_indices, state.channel_indices):
            if r >= self.ladder_size or c >= self.num_channel_states:
                raise ValueError(f"state {state} out of range for this table")
            idx = idx * (self.ladder_size * self.num_channel_states) + (
                r * self.num_channel_states + c
            )
        return idx

    def value(self, t: int, state: SystemState) -> float:
        if not 0 <= t <= self.horizon:
            raise ValueError(f"epoch {t} outside [0, {self.horizon}]")
        return float(self.values[t, self.state_index(state)])

    def action(self, t: int, state: SystemState) -> Action:
        if not 0 <= t < self.horizon:
            raise ValueError(f"decision epoch {t} outside [0, {self.horizon})")
        digits = self.action_rate_indices[t, self.state_index(state)]
        return Action(rate_indices=tuple(int(d) for d in digits))

    def save(self, path: str) -> None:
        """Write the table as a documented flat text file.

        Header: format name with the canonical ordering version, then the
        dimensions.  Body: one record per (epoch, state) holding the
        per-user rate indices and the state's value, in canonical order.
        Floats are written with repr and round-trip exactly.
        """
        lines = [
            f"{POLICY_TABLE_FORMAT} ordering={CANONICAL_ORDER_VERSION}",
            (
                f"ladder_size={self.ladder_size} "
                f"channel_states={self.num_channel_states} "
                f"users={self.num_users} horizon={self.horizon}"
            ),
            "# record: epoch state_index rate_index_per_user... value",
        ]
        for t in range(self.horizon):
            rows = self.action_rate_indices[t]
            vals = self.values[t]
            for s in range(self.num_states):
                digits = " ".join(str(int(d)) for d in rows[s])
                lines.append(f"{t} {s} {digits} {float(vals[s])!r}")
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "PolicyTable":
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().split()
            if not header or header[0] != POLICY_TABLE_FORMAT:
                raise ConfigurationError(f"{path}: not a policy table file")
            if header[1:] != [f"ordering={CANONICAL_ORDER_VERSION}"]:
                raise ConfigurationError(
                    f"{path}: unsupported ordering version (have {header[1:]})"
                )
            dims = dict(item.split("=") for item in fh.readline().split())
            try:
                m = int(dims["ladder_size"])
                k = int(dims["channel_states"])
                n = int(dims["users"])
                horizon = int(dims["horizon"])
            except KeyError as missing:
                raise ConfigurationError(f"{path}: header missing {missing}") from None
            size = (m * k) ** n
            values = np.zeros((horizon + 1, size))
            actions = np.zeros((horizon, size, n), dtype=np.int64)
            seen = 0
            for line in fh:
                if line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2 + n + 1:
                    raise ConfigurationError(f"{path}: malformed record {line!r}")
                try:
                    t, s = int(parts[0]), int(parts[1])
                    digits = [int(d) for d in parts[2:2 + n]]
                    value = float(parts[-1])
                except ValueError:
                    raise ConfigurationError(
                        f"{path}: malformed record {line!r}"
                    ) from None
                if not (0 <= t < horizon and 0 <= s < size):
                    raise ConfigurationError(f"{path}: record out of range {line!r}")
                actions[t, s] = digits
                values[t, s] = value
                seen += 1
            if seen != horizon * size:
                raise ConfigurationError(
                    f"{path}: expected {horizon * size} records, found {seen}"
                )
        values.setflags(write=False)
        actions.setflags(write=False)
        return cls(
            ladder_size=m,
            num_channel_states=k,
            num_users=n,
            horizon=horizon,
            values=values,
            action_rate_indices=actions,
        )


def extract_policy(table: PolicyTable, t: int, state: SystemState) -> Action:
    """Optimal action at decision epoch ``t`` in ``state``."""
    return table.action(t, state)
