"""Comparison policies: independent UCB agents and the full-information oracle.

Independent agents never communicate; each runs plain UCB over the tasks using
its own observed reward shares. Coalitions only emerge when several agents
happen to pick the same task, which is exactly the failure mode censored
feedback is meant to expose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .planner import ucb_index


@dataclass
class IndUcbAgentState:
    """Per-agent statistics: mean of the agent's own observed shares.

    tie_order optionally gives each task a preference rank used only to break
    exact index ties (including the unsampled +inf sentinel). Without it, ties
    go to the lowest task id, which makes agents with identical histories move
    in lockstep; the harness seeds a per-agent permutation so that agents
    lacking any shared convention explore in genuinely independent orders.
    """

    agent_id: int
    mu_hat: list[float]
    n: list[int]
    tie_order: tuple[int, ...] | None = None

    @classmethod
    def fresh(
        cls, agent_id: int, n_tasks: int, tie_order: tuple[int, ...] | None = None
    ) -> "IndUcbAgentState":
        return cls(
            agent_id=agent_id,
            mu_hat=[0.0] * n_tasks,
            n=[0] * n_tasks,
            tie_order=tie_order,
        )


def ind_ucb_select(
    state: IndUcbAgentState, t: int, values: Sequence[float], c_ucb: float
) -> int:
    """Argmax of the UCB index; ties and unsampled tasks break by rank.

    The default rank is the task id itself (lowest id wins).
    """
    best_id, best_key = 0, None
    for k in range(len(state.n)):
        index = ucb_index(state.mu_hat[k], state.n[k], t, values[k], c_ucb)
        rank = state.tie_order[k] if state.tie_order is not None else k
        key = (index, -rank)
        if best_key is None or key > best_key:
            best_id, best_key = k, key
    return best_id


def ind_ucb_update(state: IndUcbAgentState, task_id: int, share: float) -> None:
    """Record the observed share (zero when censored or failed; the agent
    cannot tell which)."""
    state.n[task_id] += 1
    n = state.n[task_id]
    state.mu_hat[task_id] += (share - state.mu_hat[task_id]) / n
