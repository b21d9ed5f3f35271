"""Threshold-activated cooperative multi-armed bandit simulation suite.

Tasks reward coalitions only above a hidden size threshold and observations
below it are censored to zero. The package provides the environment, an exact
knapsack planner with UCB indices, a centralized threshold-search coordinator,
a decentralized event-triggered protocol with conservative belief fusion,
independent-UCB and oracle baselines, and a batch experiment harness (CSV,
SVG, CLI).
"""

from .baselines import IndUcbAgentState, ind_ucb_select, ind_ucb_update
from .ctac import (
    CtacCoordinator,
    CtacTaskState,
    Phase,
    select_plan,
    theoretical_nmax,
    update_task,
)
from .dtac import (
    DtacAgent,
    DtacTeam,
    SyncMessage,
    SyncTrigger,
    TaskBelief,
    assign_agents,
    plan_from_beliefs,
)
from .env import (
    Allocation,
    Environment,
    Instance,
    RoundOutcome,
    TaskSpec,
    expected_plan_value,
    oracle_allocation,
    pseudo_regret,
)
from .errors import ConfigError, InvariantViolation, SyncProtocolError, TrialError
from .planner import INFINITE_INDEX, KnapsackItem, Plan, solve_knapsack, ucb_index

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ConfigError",
    "CtacCoordinator",
    "CtacTaskState",
    "DtacAgent",
    "DtacTeam",
    "Environment",
    "INFINITE_INDEX",
    "IndUcbAgentState",
    "Instance",
    "InvariantViolation",
    "KnapsackItem",
    "Phase",
    "Plan",
    "RoundOutcome",
    "SyncMessage",
    "SyncProtocolError",
    "SyncTrigger",
    "TaskBelief",
    "TaskSpec",
    "TrialError",
    "assign_agents",
    "expected_plan_value",
    "ind_ucb_select",
    "ind_ucb_update",
    "oracle_allocation",
    "plan_from_beliefs",
    "pseudo_regret",
    "select_plan",
    "solve_knapsack",
    "theoretical_nmax",
    "ucb_index",
    "update_task",
]
