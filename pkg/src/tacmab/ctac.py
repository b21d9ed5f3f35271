"""Centralized threshold-search coordinator.

Each task runs a small phase machine: SEARCH probes a growing threshold
hypothesis under a consecutive-failure budget, the first positive observation
freezes the hypothesis and moves the task to MONITOR (pure value estimation),
and a hypothesis climbing past the team size marks the task INFEASIBLE and
removes it from planning. Planning each round is an exact knapsack over the
active tasks with UCB indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

from .planner import KnapsackItem, Plan, solve_knapsack, ucb_index


class Phase(IntEnum):
    """Per-task learning phase.

    Integer order doubles as the fusion precedence used by the decentralized
    protocol: MONITOR beats INFEASIBLE beats SEARCH.
    """

    SEARCH = 0
    INFEASIBLE = 1
    MONITOR = 2


def theoretical_nmax(T: int, p_min: float) -> int:
    """Failure budget that keeps wrongful infeasibility marks unlikely.

    ceil(2 ln T / ln(1 / (1 - p_min))), clamped to at least 1. With p_min = 1
    a single probe is conclusive.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not 0.0 < p_min <= 1.0:
        raise ValueError(f"p_min must be in (0, 1], got {p_min}")
    if p_min == 1.0:
        return 1
    budget = math.ceil(2.0 * math.log(T) / math.log(1.0 / (1.0 - p_min)))
    return max(1, budget)


@dataclass
class CtacTaskState:
    """Coordinator-side state for one task.

    mu_hat is the empirical mean over counted (feasible) executions only;
    y_sum keeps the bookkeeping exact. n_fail counts consecutive zero
    observations at the current hypothesis and resets on every advance.
    """

    tau_hat: int = 1
    phase: Phase = Phase.SEARCH
    n_fail: int = 0
    mu_hat: float = 0.0
    n: int = 0
    y_sum: float = 0.0

    def _record(self, y: float) -> None:
        self.n += 1
        self.y_sum += y
        self.mu_hat = self.y_sum / self.n


def update_task(
    state: CtacTaskState, coalition: int, y: float, *, n_max: int, team_size: int
) -> CtacTaskState:
    """Apply one observation made at coalition >= tau_hat; mutates in place.

    SEARCH: a positive outcome confirms feasibility (freeze tau_hat, start
    monitoring); a zero spends failure budget and, once exhausted, advances
    the hypothesis, marking the task INFEASIBLE past the team size.
    MONITOR: every execution feeds the mean, zeros included.
    """
    if state.phase is Phase.SEARCH:
        if y > 0.0:
            state.phase = Phase.MONITOR
            state.n_fail = 0
            state._record(y)
        else:
            state.n_fail += 1
            if state.n_fail >= n_max:
                state.tau_hat += 1
                state.n_fail = 0
                if state.tau_hat > team_size:
                    state.phase = Phase.INFEASIBLE
    elif state.phase is Phase.MONITOR:
        state._record(y)
    return state


def select_plan(
    states: Sequence[CtacTaskState],
    t: int,
    values: Sequence[float],
    c_ucb: float,
    capacity: int,
) -> Plan:
    """Knapsack over non-INFEASIBLE tasks: weight tau_hat, value UCB index."""
    items = [
        KnapsackItem(
            task_id=k,
            weight=s.tau_hat,
            value=ucb_index(s.mu_hat, s.n, t, values[k], c_ucb),
        )
        for k, s in enumerate(states)
        if s.phase is not Phase.INFEASIBLE
    ]
    return solve_knapsack(items, capacity, n_tasks=len(states))


class CtacCoordinator:
    """Drives the per-task states across a trial; sees only (counts, y)."""

    def __init__(
        self,
        n_tasks: int,
        team_size: int,
        values: Sequence[float],
        n_max: int,
        c_ucb: float,
    ):
        self.team_size = team_size
        self.values = tuple(values)
        self.n_max = n_max
        self.c_ucb = c_ucb
        self.states = [CtacTaskState() for _ in range(n_tasks)]

    def plan(self, t: int) -> Plan:
        return select_plan(self.states, t, self.values, self.c_ucb, self.team_size)

    def observe(self, counts: Sequence[int], y: Sequence[float]) -> None:
        """Update every task executed at or above its current hypothesis."""
        for k, state in enumerate(self.states):
            if counts[k] >= state.tau_hat:
                update_task(
                    state,
                    counts[k],
                    float(y[k]),
                    n_max=self.n_max,
                    team_size=self.team_size,
                )
