"""Censored coalition-threshold task environment.

A task pays out only in rounds where the coalition assigned to it reaches a
hidden integer threshold; below the threshold the observation is exactly zero,
indistinguishable from a stochastic failure. Success draws are generated from
per-task substreams derived from the trial seed alone, so every policy run on
the same seed faces identical randomness (paired comparisons are exact).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .planner import KnapsackItem, Plan, solve_knapsack


@dataclass(frozen=True)
class TaskSpec:
    """Hidden parameters of one task.

    tau: minimum feasible coalition size (may exceed the team size, in which
         case the task is structurally infeasible).
    p:   per-round success probability once the coalition is feasible.
    v:   reward paid on a successful, feasible execution.
    """

    tau: int
    p: float
    v: float

    def __post_init__(self) -> None:
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.v < 0.0:
            raise ValueError(f"v must be >= 0, got {self.v}")

    @property
    def mu(self) -> float:
        """Expected per-round reward of a feasible execution: p * v."""
        return self.p * self.v


@dataclass(frozen=True)
class Instance:
    """A full problem instance: tasks plus team size, horizon and p floor.

    Requires more tasks than agents (K > M, the regime where the team cannot
    probe everything in parallel) and p >= p_min for every feasible task (the
    identifiability condition that makes finite failure budgets sound).
    """

    tasks: tuple[TaskSpec, ...]
    M: int
    T: int
    p_min: float

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if not 0.0 < self.p_min <= 1.0:
            raise ValueError(f"p_min must be in (0, 1], got {self.p_min}")
        if len(self.tasks) <= self.M:
            raise ValueError(
                f"need more tasks than agents, got K={len(self.tasks)} M={self.M}"
            )
        for k, task in enumerate(self.tasks):
            if task.tau <= self.M and task.p < self.p_min:
                raise ValueError(
                    f"feasible task {k} has p={task.p} below p_min={self.p_min}"
                )

    @property
    def K(self) -> int:
        return len(self.tasks)


@dataclass(frozen=True)
class Allocation:
    """Agents-per-task vector for one round; validated against an instance."""

    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class RoundOutcome:
    """One round of environment feedback.

    `y` and `activated` are observable; `success_draw` is the hidden Bernoulli
    realization, exposed for metrics only and never shown to learners.
    """

    y: np.ndarray
    activated: np.ndarray
    success_draw: np.ndarray


class Environment:
    """Owns one trial's draw streams and adjudicates censoring round by round.

    Success indicators are pre-realized for the whole horizon from substreams
    keyed by (seed, task index): they do not depend on what any policy does,
    so the k-th task's draw sequence is identical whether or not its
    coalitions ever meet threshold.
    """

    def __init__(self, instance: Instance, seed: int):
        self.instance = instance
        self.seed = seed
        self._taus = np.array([t.tau for t in instance.tasks], dtype=np.int64)
        self._values = np.array([t.v for t in instance.tasks], dtype=np.float64)
        uniforms = np.empty((instance.K, instance.T), dtype=np.float64)
        for k, task in enumerate(instance.tasks):
            rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
            uniforms[k] = rng.random(instance.T)
        probs = np.array([t.p for t in instance.tasks], dtype=np.float64)
        self._draws = uniforms < probs[:, None]
        self._checksum = hashlib.sha256(uniforms.tobytes()).hexdigest()
        self._round = 0

    @property
    def draw_checksum(self) -> str:
        """Digest of the underlying uniform streams; equal across policies."""
        return self._checksum

    @property
    def rounds_played(self) -> int:
        return self._round

    def step(self, alloc: Allocation) -> RoundOutcome:
        """Play one round: censor below threshold, pay v on feasible success."""
        counts = alloc.counts
        inst = self.instance
        if len(counts) != inst.K:
            raise ValueError(f"allocation length {len(counts)} != K={inst.K}")
        if any(c < 0 or c > inst.M for c in counts):
            raise ValueError(f"per-task counts must lie in 0..{inst.M}: {counts}")
        if sum(counts) > inst.M:
            raise ValueError(f"allocation uses {sum(counts)} agents > M={inst.M}")
        if self._round >= inst.T:
            raise RuntimeError(f"horizon T={inst.T} exhausted")

        draws = self._draws[:, self._round].copy()
        self._round += 1
        activated = np.asarray(counts, dtype=np.int64) >= self._taus
        y = np.where(activated & draws, self._values, 0.0)
        return RoundOutcome(y=y, activated=activated, success_draw=draws)


def oracle_allocation(instance: Instance) -> tuple[Allocation, float]:
    """Best fixed allocation under full information.

    Solves the knapsack with weight tau and value p*v over feasible tasks;
    each selected task receives exactly tau agents, excess agents idle. Ties
    resolve by the planner's deterministic rule.
    """
    items = [
        KnapsackItem(task_id=k, weight=task.tau, value=task.mu)
        for k, task in enumerate(instance.tasks)
        if task.tau <= instance.M
    ]
    plan = solve_knapsack(items, instance.M, n_tasks=instance.K)
    return Allocation(counts=plan.counts), plan.planned_value


def pseudo_regret(instance: Instance, alloc: Allocation, oracle_value: float) -> float:
    """Per-round conditional-expectation regret: mu* minus activated mu mass.

    Zero exactly when the allocation activates an optimal task set; always
    nonnegative. The realized counterpart (success draws included) is logged
    separately by the harness.
    """
    activated_mu = 0.0
    for task, c in zip(instance.tasks, alloc.counts):
        if c >= task.tau:
            activated_mu += task.mu
    return oracle_value - activated_mu


def expected_plan_value(instance: Instance, alloc: Allocation) -> float:
    """Expected per-round reward of an allocation: sum of activated p*v."""
    return sum(t.mu for t, c in zip(instance.tasks, alloc.counts) if c >= t.tau)
