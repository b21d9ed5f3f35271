"""Trial execution and aggregation.

A trial is fully determined by (config, seed): the environment pre-realizes
its success draws from the seed alone, so different policies replayed on the
same seed face identical randomness. Learners are driven through a narrow
policy interface and only ever see observable outcomes (y and coalition
sizes), never the hidden success draws.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..baselines import IndUcbAgentState, ind_ucb_select, ind_ucb_update
from ..ctac import CtacCoordinator, Phase
from ..dtac import DtacTeam
from ..env import Allocation, Environment, Instance, TaskSpec, oracle_allocation, pseudo_regret
from ..errors import InvariantViolation, TrialError
from .config import ALGORITHMS, ExperimentConfig, with_instance

SYNC_NONE = "none"

# structural sync events per trial may not exceed STRUCTURAL_BOUND_FACTOR*K*M
STRUCTURAL_BOUND_FACTOR = 2


@dataclass
class TrialRecord:
    """Per-round time series plus trial totals for one (config, seed) run."""

    algorithm: str
    seed: int
    pseudo: np.ndarray
    realized: np.ndarray
    cum_pseudo: np.ndarray
    cum_realized: np.ndarray
    messages: np.ndarray
    cum_messages: np.ndarray
    sync_types: list[str]
    allocations: np.ndarray
    draw_checksum: str
    structural_syncs: int
    total_messages: int
    final_cum_pseudo: float
    final_cum_realized: float
    final_mu_hat: tuple[float, ...] | None = None
    final_phases: tuple[Phase, ...] | None = None


@dataclass
class AggregateStats:
    """Across-seed mean and standard error of the cumulative series."""

    algorithm: str
    n_seeds: int
    rounds: np.ndarray
    mean_cum_pseudo: np.ndarray
    se_cum_pseudo: np.ndarray
    mean_cum_realized: np.ndarray
    se_cum_realized: np.ndarray
    mean_cum_messages: np.ndarray
    mean_total_messages: float

    @property
    def final_mean_pseudo(self) -> float:
        return float(self.mean_cum_pseudo[-1]) if len(self.rounds) else 0.0

    @property
    def final_se_pseudo(self) -> float:
        return float(self.se_cum_pseudo[-1]) if len(self.rounds) else 0.0

    def mean_pseudo_at(self, t: int) -> float:
        """Mean cumulative pseudo-regret after round t (1-based)."""
        return float(self.mean_cum_pseudo[t - 1])


class _OraclePolicy:
    """Plays the optimal fixed allocation every round; no messages."""

    def __init__(self, config: ExperimentConfig, seed: int):
        self.alloc, _ = oracle_allocation(config.instance)

    def act(self, t: int) -> tuple[tuple[int, ...], str, int]:
        return self.alloc.counts, SYNC_NONE, 0

    def observe(self, counts, y) -> None:
        pass

    def structural_syncs(self) -> int:
        return 0

    def final_state(self):
        return None, None


class _IndUcbPolicy:
    """M independent UCB agents; coalitions emerge only by coincidence.

    Each agent draws a private tie-break permutation from the trial seed:
    without one, identically initialized agents would pick identical tasks,
    see identical shares and move as a single block forever, which is not
    independent behavior. The stream is salted so it never overlaps the
    environment's draw substreams.
    """

    TIE_BREAK_SALT = 104_729

    def __init__(self, config: ExperimentConfig, seed: int):
        inst = config.instance
        self.values = tuple(task.v for task in inst.tasks)
        self.c_ucb = config.c_ucb
        self.n_tasks = inst.K
        self.agents = []
        for i in range(inst.M):
            rng = np.random.default_rng(
                np.random.SeedSequence([seed, self.TIE_BREAK_SALT, i])
            )
            perm = rng.permutation(inst.K)
            rank = np.empty(inst.K, dtype=np.int64)
            rank[perm] = np.arange(inst.K)
            self.agents.append(
                IndUcbAgentState.fresh(i, inst.K, tie_order=tuple(int(r) for r in rank))
            )
        self._picks: list[int] = []

    def act(self, t: int) -> tuple[tuple[int, ...], str, int]:
        self._picks = [
            ind_ucb_select(a, t, self.values, self.c_ucb) for a in self.agents
        ]
        counts = [0] * self.n_tasks
        for k in self._picks:
            counts[k] += 1
        return tuple(counts), SYNC_NONE, 0

    def observe(self, counts, y) -> None:
        for agent, k in zip(self.agents, self._picks):
            share = float(y[k]) / counts[k] if counts[k] else 0.0
            ind_ucb_update(agent, k, share)

    def structural_syncs(self) -> int:
        return 0

    def final_state(self):
        return None, None


class _CtacPolicy:
    def __init__(self, config: ExperimentConfig, seed: int):
        inst = config.instance
        self.coordinator = CtacCoordinator(
            n_tasks=inst.K,
            team_size=inst.M,
            values=[task.v for task in inst.tasks],
            n_max=config.n_max,
            c_ucb=config.c_ucb,
        )
        self.round_messages = config.ctac_round_messages()

    def act(self, t: int) -> tuple[tuple[int, ...], str, int]:
        plan = self.coordinator.plan(t)
        return plan.counts, SYNC_NONE, self.round_messages

    def observe(self, counts, y) -> None:
        self.coordinator.observe(counts, y)

    def structural_syncs(self) -> int:
        return 0

    def final_state(self):
        states = self.coordinator.states
        return (
            tuple(s.mu_hat for s in states),
            tuple(s.phase for s in states),
        )


class _DtacPolicy:
    def __init__(self, config: ExperimentConfig, seed: int):
        inst = config.instance
        self.team = DtacTeam(
            n_tasks=inst.K,
            team_size=inst.M,
            values=[task.v for task in inst.tasks],
            n_max=config.n_max,
            c_ucb=config.c_ucb,
            heartbeat=config.heartbeat,
        )
        self.sync_messages = config.messages_per_sync()
        self.n_tasks = inst.K
        self._assignments: list[int | None] = []

    def act(self, t: int) -> tuple[tuple[int, ...], str, int]:
        sync_type, assignments = self.team.begin_round(t)
        self._assignments = assignments
        counts = [0] * self.n_tasks
        for task in assignments:
            if task is not None:
                counts[task] += 1
        messages = self.sync_messages if sync_type is not None else 0
        return tuple(counts), sync_type or SYNC_NONE, messages

    def observe(self, counts, y) -> None:
        self.team.observe(self._assignments, counts, y)

    def structural_syncs(self) -> int:
        return self.team.structural_syncs

    def final_state(self):
        beliefs = self.team.agents[0].beliefs
        return (
            tuple(b.mu_hat for b in beliefs),
            tuple(b.phase for b in beliefs),
        )


_POLICIES = {
    "oracle": _OraclePolicy,
    "ind_ucb": _IndUcbPolicy,
    "ctac": _CtacPolicy,
    "dtac": _DtacPolicy,
}


def run_trial(config: ExperimentConfig, seed: int) -> TrialRecord:
    """Execute one algorithm for T rounds against a freshly seeded environment."""
    algorithm = config.algorithm
    if algorithm not in _POLICIES:
        raise TrialError(seed, f"unknown algorithm {algorithm!r}")
    inst = config.instance
    env = Environment(inst, seed)
    _, mu_star = oracle_allocation(inst)
    policy = _POLICIES[algorithm](config, seed)

    T = inst.T
    pseudo = np.empty(T)
    realized = np.empty(T)
    messages = np.zeros(T, dtype=np.int64)
    sync_types: list[str] = []
    allocations = np.zeros((T, inst.K), dtype=np.int16)

    for t in range(1, T + 1):
        counts, sync_type, round_messages = policy.act(t)
        alloc = Allocation(counts=counts)
        outcome = env.step(alloc)
        policy.observe(counts, outcome.y)
        i = t - 1
        pseudo[i] = pseudo_regret(inst, alloc, mu_star)
        realized[i] = mu_star - float(outcome.y.sum())
        messages[i] = round_messages
        sync_types.append(sync_type)
        allocations[i] = counts

    structural = policy.structural_syncs()
    bound = STRUCTURAL_BOUND_FACTOR * inst.K * inst.M
    if structural > bound:
        raise InvariantViolation(
            f"structural syncs {structural} exceed bound {bound} "
            f"(K={inst.K}, M={inst.M}, seed={seed})"
        )

    cum_pseudo = np.cumsum(pseudo)
    cum_realized = np.cumsum(realized)
    cum_messages = np.cumsum(messages)
    final_mu_hat, final_phases = policy.final_state()
    return TrialRecord(
        algorithm=algorithm,
        seed=seed,
        pseudo=pseudo,
        realized=realized,
        cum_pseudo=cum_pseudo,
        cum_realized=cum_realized,
        messages=messages,
        cum_messages=cum_messages,
        sync_types=sync_types,
        allocations=allocations,
        draw_checksum=env.draw_checksum,
        structural_syncs=structural,
        total_messages=int(cum_messages[-1]),
        final_cum_pseudo=float(cum_pseudo[-1]),
        final_cum_realized=float(cum_realized[-1]),
        final_mu_hat=final_mu_hat,
        final_phases=final_phases,
    )


def aggregate(records: Sequence[TrialRecord]) -> AggregateStats:
    """Mean and standard error (sd/sqrt(N)) over seeds; SE is 0 for N=1."""
    if not records:
        return AggregateStats(
            algorithm="",
            n_seeds=0,
            rounds=np.empty(0, dtype=np.int64),
            mean_cum_pseudo=np.empty(0),
            se_cum_pseudo=np.empty(0),
            mean_cum_realized=np.empty(0),
            se_cum_realized=np.empty(0),
            mean_cum_messages=np.empty(0),
            mean_total_messages=0.0,
        )
    n = len(records)
    cum_pseudo = np.stack([r.cum_pseudo for r in records])
    cum_realized = np.stack([r.cum_realized for r in records])
    cum_messages = np.stack([r.cum_messages for r in records])

    def se(stack: np.ndarray) -> np.ndarray:
        if n == 1:
            return np.zeros(stack.shape[1])
        return stack.std(axis=0, ddof=1) / np.sqrt(n)

    return AggregateStats(
        algorithm=records[0].algorithm,
        n_seeds=n,
        rounds=np.arange(1, cum_pseudo.shape[1] + 1, dtype=np.int64),
        mean_cum_pseudo=cum_pseudo.mean(axis=0),
        se_cum_pseudo=se(cum_pseudo),
        mean_cum_realized=cum_realized.mean(axis=0),
        se_cum_realized=se(cum_realized),
        mean_cum_messages=cum_messages.mean(axis=0),
        mean_total_messages=float(cum_messages[:, -1].mean()),
    )


@dataclass
class BatchResult:
    stats: AggregateStats
    records: list[TrialRecord]


def run_batch(config: ExperimentConfig, algorithm: str | None = None) -> BatchResult:
    """Run seeds base_seed .. base_seed + n_seeds - 1 and aggregate."""
    if algorithm is not None:
        config = replace(config, algorithm=algorithm)
    if config.algorithm is None:
        raise TrialError(config.base_seed, "no algorithm configured")
    records = []
    for seed in range(config.base_seed, config.base_seed + config.n_seeds):
        try:
            records.append(run_trial(config, seed))
        except InvariantViolation:
            raise
        except Exception as exc:  # attribute the failing seed
            raise TrialError(seed, str(exc)) from exc
    return BatchResult(stats=aggregate(records), records=records)


def compare_all(
    config: ExperimentConfig, algorithms: Sequence[str] = ALGORITHMS
) -> dict[str, BatchResult]:
    """Run every algorithm on the same instance and seed range."""
    return {name: run_batch(config, algorithm=name) for name in algorithms}


def scale_instance(instance: Instance, tau_max: int) -> Instance:
    """Build a sweep variant whose hardest feasible task requires tau_max agents.

    The feasible task with the largest threshold (ties to the lowest id) gets
    its threshold replaced by tau_max; every other task, including the
    structurally infeasible decoys, keeps its parameters, so agent count,
    task count, rewards and success probabilities are all held fixed across
    the sweep.
    """
    if tau_max < 1:
        raise ValueError(f"tau_max must be >= 1, got {tau_max}")
    if tau_max > instance.M:
        raise ValueError(f"tau_max {tau_max} exceeds team size {instance.M}")
    feasible = [k for k, task in enumerate(instance.tasks) if task.tau <= instance.M]
    if not feasible:
        raise ValueError("instance has no feasible task to rescale")
    target = max(feasible, key=lambda k: (instance.tasks[k].tau, -k))
    tasks = tuple(
        TaskSpec(tau=tau_max, p=task.p, v=task.v) if k == target else task
        for k, task in enumerate(instance.tasks)
    )
    return Instance(tasks=tasks, M=instance.M, T=instance.T, p_min=instance.p_min)


@dataclass(frozen=True)
class SweepRow:
    tau_max: int
    algorithm: str
    mean_final_regret: float
    se_final_regret: float


def sweep_tau(
    config: ExperimentConfig,
    tau_values: Sequence[int],
    algorithms: Sequence[str] = ALGORITHMS,
) -> list[SweepRow]:
    """Final-regret table over environments with rescaled threshold ceilings."""
    rows = []
    for tau_max in tau_values:
        variant = with_instance(config, scale_instance(config.instance, tau_max))
        for name in algorithms:
            result = run_batch(variant, algorithm=name)
            rows.append(
                SweepRow(
                    tau_max=tau_max,
                    algorithm=name,
                    mean_final_regret=result.stats.final_mean_pseudo,
                    se_final_regret=result.stats.final_se_pseudo,
                )
            )
    return rows
