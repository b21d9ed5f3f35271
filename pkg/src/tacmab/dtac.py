"""Decentralized event-triggered coordination.

Every agent keeps a private belief per task (threshold bounds, phase, reward
stats) and runs a virtual coordinator: the same deterministic planner as the
centralized algorithm, applied to its own beliefs, so that identical beliefs
yield identical joint plans with no negotiation. Agents act silently on the
last agreed plan ("sticky execution") and synchronize only when a structural
event fires or a heartbeat comes due:

  Type I  - a success refutes the team's synced hypothesis (observed below the
            synced lower bound, or at a task the team had written off);
  Type II - the consecutive-failure budget is exhausted at the current lower
            bound, advancing it;
  heartbeat - every `heartbeat` rounds, bounding drift of reward estimates.

A sync is a barrier: every agent broadcasts its beliefs, fuses all peers'
conservatively (max of lower bounds, min of upper bounds, phase precedence
MONITOR > INFEASIBLE > SEARCH, count-weighted pooling of per-agent deltas so
each sample is folded exactly once), refreshes its synced snapshots, and
replans. Fusion is idempotent and invariant to peer ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .ctac import Phase
from .errors import InvariantViolation, SyncProtocolError
from .planner import KnapsackItem, Plan, solve_knapsack, ucb_index


class SyncTrigger(Enum):
    TYPE_I = "typeI"
    TYPE_II = "typeII"


@dataclass
class TaskBelief:
    """One agent's belief about one task.

    tau_lo only advances on exhausted failure budgets (or drops to 1 on a
    refuting success); tau_hi only tightens, on an observed success at that
    coalition size. Reward stats split into a base shared by the whole team at
    the last sync plus local deltas accumulated since, which is what makes
    count-weighted fusion double-count free.
    """

    tau_lo: int = 1
    tau_hi: int = 1
    phase: Phase = Phase.SEARCH
    n_fail: int = 0
    base_n: int = 0
    base_sum: float = 0.0
    delta_n: int = 0
    delta_sum: float = 0.0

    @property
    def n(self) -> int:
        return self.base_n + self.delta_n

    @property
    def mu_hat(self) -> float:
        n = self.n
        return (self.base_sum + self.delta_sum) / n if n else 0.0


@dataclass(frozen=True)
class SyncMessage:
    """Faithful snapshot of a sender's beliefs at broadcast time."""

    sender: int
    tau_lo: tuple[int, ...]
    tau_hi: tuple[int, ...]
    phase: tuple[Phase, ...]
    delta_n: tuple[int, ...]
    delta_sum: tuple[float, ...]
    mu_hat: tuple[float, ...]
    n: tuple[int, ...]


def assign_agents(plan: Plan, team_size: int) -> list[int | None]:
    """Deterministic rank-based assignment: a pure function of the plan.

    Agents in id order fill each selected task (ascending task id) up to its
    planned count; agents beyond the plan's total idle (None).
    """
    assignments: list[int | None] = [None] * team_size
    agent = 0
    for task_id in plan.selected:
        for _ in range(plan.counts[task_id]):
            if agent >= team_size:
                raise ValueError("plan allocates more agents than the team has")
            assignments[agent] = task_id
            agent += 1
    return assignments


def plan_from_beliefs(
    beliefs: Sequence[TaskBelief],
    t: int,
    values: Sequence[float],
    c_ucb: float,
    capacity: int,
) -> Plan:
    """Virtual coordinator: knapsack over non-INFEASIBLE tasks.

    The coalition-size weight is tau_hi, the smallest empirically confirmed
    feasible size (still the initial team-size bound for unconfirmed tasks).
    """
    items = [
        KnapsackItem(
            task_id=k,
            weight=b.tau_hi,
            value=ucb_index(b.mu_hat, b.n, t, values[k], c_ucb),
        )
        for k, b in enumerate(beliefs)
        if b.phase is not Phase.INFEASIBLE
    ]
    return solve_knapsack(items, capacity, n_tasks=len(beliefs))


class DtacAgent:
    """One agent: private beliefs, synced snapshots, sticky plan, triggers."""

    def __init__(
        self,
        agent_id: int,
        n_tasks: int,
        team_size: int,
        values: Sequence[float],
        n_max: int,
        c_ucb: float,
    ):
        self.agent_id = agent_id
        self.n_tasks = n_tasks
        self.team_size = team_size
        self.values = tuple(values)
        self.n_max = n_max
        self.c_ucb = c_ucb
        self.beliefs = [TaskBelief(tau_hi=team_size) for _ in range(n_tasks)]
        self.synced_tau_lo = [1] * n_tasks
        self.synced_phase = [Phase.SEARCH] * n_tasks
        self.pending: SyncTrigger | None = None
        self.current_plan = plan_from_beliefs(
            self.beliefs, 1, self.values, self.c_ucb, self.team_size
        )

    def assigned_task(self) -> int | None:
        return assign_agents(self.current_plan, self.team_size)[self.agent_id]

    def should_sync(self, t: int, heartbeat: int) -> bool:
        """True when a structural trigger is pending or the heartbeat is due."""
        return self.pending is not None or t % heartbeat == 0

    def _flag(self, trigger: SyncTrigger) -> None:
        # earliest trigger since the last sync wins; either kind forces a sync
        if self.pending is None:
            self.pending = trigger

    def local_update(self, task: int, coalition: int, y: float) -> None:
        """Fold one own-task observation into the belief state.

        A success tightens tau_hi, refutes tau_lo back to 1 if observed below
        it, feeds the reward stats and confirms MONITOR; it raises Type I when
        it contradicts the synced hypothesis. A zero in SEARCH at or above
        tau_lo spends failure budget and advances the bound (Type II) once the
        budget is gone; a zero below tau_lo is uninformative. MONITOR records
        zeros as ordinary samples and INFEASIBLE ignores them.
        """
        b = self.beliefs[task]
        if y > 0.0:
            b.tau_hi = min(b.tau_hi, coalition)
            if coalition < b.tau_lo:
                b.tau_lo = 1
                b.n_fail = 0
            b.delta_n += 1
            b.delta_sum += y
            if b.phase is not Phase.MONITOR:
                b.phase = Phase.MONITOR
                b.n_fail = 0
            if (
                coalition < self.synced_tau_lo[task]
                or self.synced_phase[task] is Phase.INFEASIBLE
            ):
                self._flag(SyncTrigger.TYPE_I)
        elif b.phase is Phase.MONITOR:
            b.delta_n += 1
        elif b.phase is Phase.SEARCH and coalition >= b.tau_lo:
            b.n_fail += 1
            if b.n_fail >= self.n_max:
                b.tau_lo += 1
                b.n_fail = 0
                self._flag(SyncTrigger.TYPE_II)
                if b.tau_lo > self.team_size:
                    b.phase = Phase.INFEASIBLE

    def sync_message(self) -> SyncMessage:
        return SyncMessage(
            sender=self.agent_id,
            tau_lo=tuple(b.tau_lo for b in self.beliefs),
            tau_hi=tuple(b.tau_hi for b in self.beliefs),
            phase=tuple(b.phase for b in self.beliefs),
            delta_n=tuple(b.delta_n for b in self.beliefs),
            delta_sum=tuple(b.delta_sum for b in self.beliefs),
            mu_hat=tuple(b.mu_hat for b in self.beliefs),
            n=tuple(b.n for b in self.beliefs),
        )

    def fuse(self, peers: Sequence[SyncMessage], t: int) -> None:
        """Merge one message from every other agent and replan.

        Peers are folded in sender order so the result is exactly invariant to
        the order messages arrive in. When max-fused tau_lo overshoots
        min-fused tau_hi, the confirmed bound wins (tau_lo clamps down). The
        failure counter resets whenever fusion moved the hypothesis.
        """
        expected = set(range(self.team_size)) - {self.agent_id}
        got = [m.sender for m in peers]
        if sorted(got) != sorted(expected):
            raise SyncProtocolError(
                f"agent {self.agent_id} expected peers {sorted(expected)}, "
                f"got {sorted(got)}"
            )
        # fold every party (self included) in sender order so all agents
        # accumulate the float sums in the identical sequence
        ordered = sorted([self.sync_message(), *peers], key=lambda m: m.sender)
        for k, b in enumerate(self.beliefs):
            old_lo = b.tau_lo
            lo = max(m.tau_lo[k] for m in ordered)
            hi = min(m.tau_hi[k] for m in ordered)
            ph = max(m.phase[k] for m in ordered)
            base_n = b.base_n
            base_sum = b.base_sum
            for m in ordered:
                base_n += m.delta_n[k]
                base_sum += m.delta_sum[k]
            if lo > hi:
                lo = hi
            b.tau_lo, b.tau_hi, b.phase = lo, hi, ph
            b.base_n, b.base_sum = base_n, base_sum
            b.delta_n, b.delta_sum = 0, 0.0
            if b.tau_lo != old_lo:
                b.n_fail = 0
            self.synced_tau_lo[k] = b.tau_lo
            self.synced_phase[k] = b.phase
        self.pending = None
        self.current_plan = plan_from_beliefs(
            self.beliefs, t, self.values, self.c_ucb, self.team_size
        )


class DtacTeam:
    """Simulates all agents plus the shared-medium sync barrier.

    Rounds 1..K are the warmup: every agent probes task t-1 together, and one
    unconditional full sync pools the warmup observations at round K+1. After
    that a sync fires whenever any agent holds a pending trigger or the
    heartbeat divides the round index; coinciding causes count once, labeled
    with the structural type.
    """

    def __init__(
        self,
        n_tasks: int,
        team_size: int,
        values: Sequence[float],
        n_max: int,
        c_ucb: float,
        heartbeat: int,
    ):
        self.n_tasks = n_tasks
        self.team_size = team_size
        self.heartbeat = heartbeat
        self.agents = [
            DtacAgent(i, n_tasks, team_size, values, n_max, c_ucb)
            for i in range(team_size)
        ]
        self.structural_syncs = 0
        self.total_syncs = 0

    def begin_round(self, t: int) -> tuple[str | None, list[int | None]]:
        """Run the sync phase for round t and return (sync_type, assignments)."""
        if t <= self.n_tasks:
            return None, [t - 1] * self.team_size

        sync_type: str | None = None
        if t == self.n_tasks + 1:
            sync_type = "warmup"
        else:
            pendings = [a.pending for a in self.agents if a.pending is not None]
            if pendings:
                sync_type = (
                    "typeI" if SyncTrigger.TYPE_I in pendings else "typeII"
                )
            elif t % self.heartbeat == 0:
                sync_type = "heartbeat"
        if sync_type is not None:
            self._sync(t, sync_type)
        return sync_type, [a.assigned_task() for a in self.agents]

    def observe(
        self,
        assignments: Sequence[int | None],
        counts: Sequence[int],
        y: Sequence[float],
    ) -> None:
        """Deliver each acting agent its own task's outcome; idle agents skip."""
        for agent, task in zip(self.agents, assignments):
            if task is not None:
                agent.local_update(task, counts[task], float(y[task]))

    def _sync(self, t: int, sync_type: str) -> None:
        messages = [a.sync_message() for a in self.agents]
        for agent in self.agents:
            agent.fuse([m for m in messages if m.sender != agent.agent_id], t)
        plans = {a.current_plan for a in self.agents}
        if len(plans) != 1:
            raise InvariantViolation(
                f"post-sync plan consensus violated at round {t}: {plans}"
            )
        self.total_syncs += 1
        if sync_type in ("typeI", "typeII"):
            self.structural_syncs += 1
