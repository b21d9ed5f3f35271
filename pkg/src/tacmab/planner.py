"""Exact 0/1 knapsack planning over tasks, plus the UCB index used to value them.

The solver is shared by the oracle benchmark, the centralized coordinator, and
every agent's virtual coordinator, so it must be strictly deterministic:
identical inputs always yield the identical plan. Never-sampled tasks carry an
infinite index and cannot enter the dynamic program directly; they are packed
greedily first (see solve_knapsack).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INFINITE_INDEX = math.inf


@dataclass(frozen=True)
class KnapsackItem:
    """One plannable task: spending `weight` agents buys `value` per round."""

    task_id: int
    weight: int
    value: float

    def __post_init__(self) -> None:
        if self.weight < 1:
            raise ValueError(f"item weight must be >= 1, got {self.weight}")
        if not (self.value >= 0.0):
            raise ValueError(f"item value must be >= 0 or infinite, got {self.value}")


@dataclass(frozen=True)
class Plan:
    """A knapsack solution.

    `counts` has one entry per task (weight agents on each selected task,
    zero elsewhere); `planned_value` is infinite whenever a never-sampled
    task was packed.
    """

    selected: tuple[int, ...]
    counts: tuple[int, ...]
    planned_value: float

    @property
    def total_agents(self) -> int:
        return sum(self.counts)


def ucb_index(mu_hat: float, n: int, t: int, v: float, c: float) -> float:
    """UCB1-style optimistic index: mu_hat + v * sqrt(c * ln(t) / n).

    An unsampled task (n = 0) gets the infinite sentinel so it is always
    preferred over any sampled one. Requires t >= 1 (ln is natural).
    """
    if n == 0:
        return INFINITE_INDEX
    return mu_hat + v * math.sqrt(c * math.log(t) / n)


def solve_knapsack(
    items: list[KnapsackItem], capacity: int, n_tasks: int | None = None
) -> Plan:
    """Maximize total value subject to total weight <= capacity, exactly.

    Tie-breaking is part of the contract: among value-ties prefer the smaller
    total weight, then the lexicographically smallest task-id set. Items with
    the infinite sentinel are handled in a separate first phase: they are
    packed greedily in ascending (weight, task_id) order while they fit, and
    the dynamic program then runs over the finite-valued items on the residual
    capacity. An empty item list yields the empty plan.
    """
    if capacity < 0:
        raise ValueError(f"capacity must be >= 0, got {capacity}")
    if n_tasks is None:
        n_tasks = max((it.task_id for it in items), default=-1) + 1

    sentinel = sorted(
        (it for it in items if math.isinf(it.value)),
        key=lambda it: (it.weight, it.task_id),
    )
    finite = sorted(
        (it for it in items if not math.isinf(it.value)),
        key=lambda it: it.task_id,
    )

    chosen: dict[int, int] = {}
    remaining = capacity
    for it in sentinel:
        if it.weight <= remaining:
            chosen[it.task_id] = it.weight
            remaining -= it.weight

    value, dp_ids = _dp_max_value(finite, remaining)
    finite_weights = {it.task_id: it.weight for it in finite}
    for tid in dp_ids:
        chosen[tid] = finite_weights[tid]

    selected = tuple(sorted(chosen))
    counts = [0] * n_tasks
    for tid, w in chosen.items():
        counts[tid] = w
    planned_value = INFINITE_INDEX if chosen.keys() - set(dp_ids) else value
    return Plan(selected=selected, counts=tuple(counts), planned_value=planned_value)


def _dp_max_value(
    items: list[KnapsackItem], capacity: int
) -> tuple[float, tuple[int, ...]]:
    """Exact-weight DP; cells hold (value, id-tuple) and ties resolve in-sweep.

    Items must be sorted by ascending task_id so candidate id-tuples are built
    sorted and value sums accumulate in id order (this keeps float value ties
    bit-identical with a brute-force sum over the same ordering).
    """
    # dp[w] = best (value, ids) using total weight exactly w, or None.
    dp: list[tuple[float, tuple[int, ...]] | None] = [None] * (capacity + 1)
    dp[0] = (0.0, ())
    for it in items:
        if it.weight > capacity:
            continue
        for w in range(capacity, it.weight - 1, -1):
            prev = dp[w - it.weight]
            if prev is None:
                continue
            cand = (prev[0] + it.value, prev[1] + (it.task_id,))
            cur = dp[w]
            if cur is None or cand[0] > cur[0] or (cand[0] == cur[0] and cand[1] < cur[1]):
                dp[w] = cand

    best_value, best_ids = 0.0, ()
    for w in range(capacity + 1):
        cell = dp[w]
        if cell is not None and cell[0] > best_value:
            best_value, best_ids = cell
    return best_value, best_ids
