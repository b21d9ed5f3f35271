import math
import random

import numpy as np
import pytest

from tacmab import (
    Allocation,
    Environment,
    Instance,
    TaskSpec,
    oracle_allocation,
    pseudo_regret,
)
from reference import brute_force_oracle_value


def make_instance(tasks, M=5, T=100, p_min=0.1):
    return Instance(tasks=tuple(tasks), M=M, T=T, p_min=p_min)


def single_task_instance(tau, p, v, M, **kw):
    # pad with infeasible tasks to satisfy K > M
    pad = [TaskSpec(tau=M + 1, p=0.5, v=0.0)] * M
    return make_instance([TaskSpec(tau=tau, p=p, v=v)] + pad, M=M, **kw)


# ---------------------------------------------------------------------------
# type invariants
# ---------------------------------------------------------------------------

def test_task_spec_validation():
    with pytest.raises(ValueError):
        TaskSpec(tau=0, p=0.5, v=1.0)
    with pytest.raises(ValueError):
        TaskSpec(tau=1, p=1.5, v=1.0)
    with pytest.raises(ValueError):
        TaskSpec(tau=1, p=0.5, v=-1.0)
    assert TaskSpec(tau=2, p=0.5, v=4.0).mu == 2.0


def test_instance_requires_more_tasks_than_agents():
    tasks = [TaskSpec(tau=1, p=0.9, v=1.0)] * 3
    with pytest.raises(ValueError):
        make_instance(tasks, M=3)
    make_instance(tasks, M=2)  # K=3 > M=2 is fine


def test_instance_identifiability_condition():
    # feasible task below p_min rejected; infeasible task exempt
    with pytest.raises(ValueError):
        make_instance(
            [TaskSpec(tau=1, p=0.05, v=1.0), TaskSpec(tau=1, p=0.9, v=1.0)],
            M=1,
            p_min=0.5,
        )
    make_instance(
        [TaskSpec(tau=9, p=0.05, v=1.0), TaskSpec(tau=1, p=0.9, v=1.0)],
        M=1,
        p_min=0.5,
    )


# ---------------------------------------------------------------------------
# step
# ---------------------------------------------------------------------------

def test_step_censors_below_threshold_regardless_of_draw():
    inst = single_task_instance(tau=3, p=1.0, v=5.0, M=4)
    env = Environment(inst, seed=1)
    out = env.step(Allocation(counts=(2, 0, 0, 0, 0)))
    assert out.y[0] == 0.0
    assert not out.activated[0]
    assert out.success_draw[0]  # p=1 forces the hidden draw to succeed


def test_step_pays_value_on_feasible_success():
    inst = single_task_instance(tau=1, p=1.0, v=2.0, M=1)
    env = Environment(inst, seed=1)
    out = env.step(Allocation(counts=(1, 0)))
    assert out.y[0] == 2.0
    assert out.activated[0]


def test_step_stochastic_failure_looks_like_censoring():
    inst = single_task_instance(tau=2, p=0.5, v=4.0, M=2, T=50)
    # find a seed whose first draw for task 0 fails
    seed = next(
        s for s in range(100)
        if not Environment(inst, seed=s).step(Allocation((2, 0, 0))).success_draw[0]
    )
    env = Environment(inst, seed=seed)
    out = env.step(Allocation(counts=(2, 0, 0)))
    assert out.activated[0]
    assert out.y[0] == 0.0  # indistinguishable from the censored case above


def test_step_rejects_bad_allocations():
    inst = single_task_instance(tau=1, p=0.9, v=1.0, M=2)
    env = Environment(inst, seed=0)
    with pytest.raises(ValueError):
        env.step(Allocation(counts=(1,)))  # wrong length
    with pytest.raises(ValueError):
        env.step(Allocation(counts=(2, 1, 0)))  # over budget
    with pytest.raises(ValueError):
        env.step(Allocation(counts=(3, 0, 0)))  # single count above M
    with pytest.raises(ValueError):
        env.step(Allocation(counts=(-1, 1, 0)))


def test_step_exhausts_horizon():
    inst = single_task_instance(tau=1, p=0.9, v=1.0, M=1, T=2)
    env = Environment(inst, seed=0)
    alloc = Allocation(counts=(1, 0))
    env.step(alloc)
    env.step(alloc)
    with pytest.raises(RuntimeError):
        env.step(alloc)


def test_draws_are_policy_invariant():
    inst = make_instance(
        [TaskSpec(tau=k + 1, p=0.6, v=1.0) for k in range(4)], M=3, T=60, p_min=0.5
    )
    env_a = Environment(inst, seed=9)
    env_b = Environment(inst, seed=9)
    rng = random.Random(0)
    draws_a, draws_b = [], []
    for _ in range(60):
        draws_a.append(env_a.step(Allocation(counts=(1, 1, 1, 0))).success_draw.copy())
        # a totally different (random) policy sees the same hidden draws
        counts = [0, 0, 0, 0]
        counts[rng.randrange(4)] = 3
        draws_b.append(env_b.step(Allocation(counts=tuple(counts))).success_draw.copy())
    assert np.array_equal(np.array(draws_a), np.array(draws_b))
    assert env_a.draw_checksum == env_b.draw_checksum


def test_checksum_differs_across_seeds():
    inst = single_task_instance(tau=1, p=0.5, v=1.0, M=1)
    assert Environment(inst, 1).draw_checksum != Environment(inst, 2).draw_checksum


def test_censoring_determinism_on_random_allocations():
    rng = random.Random(31)
    tasks = [
        TaskSpec(tau=rng.randint(1, 5), p=rng.uniform(0.3, 1.0), v=rng.random() * 4)
        for _ in range(6)
    ]
    inst = make_instance(tasks, M=4, T=300, p_min=0.3)
    env = Environment(inst, seed=2)
    for _ in range(inst.T):
        counts = [0] * inst.K
        for _ in range(4):
            counts[rng.randrange(inst.K)] += 1
        out = env.step(Allocation(counts=tuple(counts)))
        for k, task in enumerate(inst.tasks):
            if counts[k] < task.tau:
                assert out.y[k] == 0.0
                assert not out.activated[k]
            else:
                assert out.activated[k]
                assert out.y[k] == (task.v if out.success_draw[k] else 0.0)


# ---------------------------------------------------------------------------
# oracle_allocation
# ---------------------------------------------------------------------------

def test_oracle_example_full_team_task_beats_combo():
    # mu/tau: (9.5/5),(4/2),(4/2),(1/1); brute force over all 2^4 subsets
    tasks = [
        TaskSpec(tau=5, p=0.95, v=10.0),
        TaskSpec(tau=2, p=0.8, v=5.0),
        TaskSpec(tau=2, p=0.8, v=5.0),
        TaskSpec(tau=1, p=1.0, v=1.0),
        TaskSpec(tau=9, p=0.5, v=1.0),  # padding to keep K > M
        TaskSpec(tau=9, p=0.5, v=1.0),
    ]
    inst = make_instance(tasks, M=5)
    assert brute_force_oracle_value(inst) == pytest.approx(9.5)
    alloc, value = oracle_allocation(inst)
    assert value == pytest.approx(9.5)
    assert alloc.counts == (5, 0, 0, 0, 0, 0)


def test_oracle_example_infeasible_task_left_out():
    inst = single_task_instance(tau=7, p=0.5, v=6.0, M=5)
    alloc, value = oracle_allocation(inst)
    assert value == 0.0
    assert alloc.counts == (0,) * 6


def test_oracle_example_all_unit_tasks_fit():
    tasks = [TaskSpec(tau=1, p=1.0, v=2.0)] * 3 + [TaskSpec(tau=9, p=0.5, v=9.0)]
    inst = make_instance(tasks, M=3)
    alloc, value = oracle_allocation(inst)
    assert value == pytest.approx(6.0)
    assert alloc.counts == (1, 1, 1, 0)


def test_oracle_matches_exhaustive_search_on_random_instances():
    rng = random.Random(424242)
    for _ in range(1000):
        M = rng.randint(1, 5)
        K = rng.randint(M + 1, 12)
        tasks = []
        for _ in range(K):
            tau = rng.randint(1, M + 2)
            tasks.append(
                TaskSpec(tau=tau, p=rng.uniform(0.1, 1.0), v=rng.uniform(0.0, 5.0))
            )
        inst = make_instance(tasks, M=M, p_min=0.1)
        _, value = oracle_allocation(inst)
        assert value == pytest.approx(brute_force_oracle_value(inst), abs=1e-12)


def test_oracle_assigns_exactly_tau_per_selected_task():
    rng = random.Random(5)
    for _ in range(100):
        M = rng.randint(2, 6)
        K = rng.randint(M + 1, 10)
        tasks = [
            TaskSpec(tau=rng.randint(1, M + 1), p=rng.uniform(0.2, 1.0), v=rng.random())
            for _ in range(K)
        ]
        inst = make_instance(tasks, M=M, p_min=0.2)
        alloc, _ = oracle_allocation(inst)
        for task, c in zip(inst.tasks, alloc.counts):
            assert c in (0, task.tau)
        assert alloc.total <= M


# ---------------------------------------------------------------------------
# pseudo_regret
# ---------------------------------------------------------------------------

def test_pseudo_regret_zero_at_oracle_allocation():
    tasks = [TaskSpec(tau=k % 3 + 1, p=0.8, v=float(k + 1)) for k in range(6)]
    inst = make_instance(tasks, M=4, p_min=0.5)
    alloc, value = oracle_allocation(inst)
    assert pseudo_regret(inst, alloc, value) == 0.0


def test_pseudo_regret_is_activation_gap():
    # mu* = 9.5; activating tasks worth 9.0 leaves 0.5
    tasks = [
        TaskSpec(tau=5, p=0.95, v=10.0),
        TaskSpec(tau=2, p=0.8, v=5.0),
        TaskSpec(tau=2, p=0.8, v=5.0),
        TaskSpec(tau=1, p=1.0, v=1.0),
        TaskSpec(tau=9, p=0.5, v=1.0),
        TaskSpec(tau=9, p=0.5, v=1.0),
    ]
    inst = make_instance(tasks, M=5)
    _, mu_star = oracle_allocation(inst)
    alloc = Allocation(counts=(0, 2, 2, 1, 0, 0))
    assert pseudo_regret(inst, alloc, mu_star) == pytest.approx(0.5)


def test_pseudo_regret_total_censoring_equals_oracle_value():
    inst = single_task_instance(tau=3, p=0.8, v=5.0, M=3)
    _, mu_star = oracle_allocation(inst)
    assert mu_star == pytest.approx(4.0)
    alloc = Allocation(counts=(2, 0, 0, 0))  # below threshold: nothing activates
    assert pseudo_regret(inst, alloc, mu_star) == pytest.approx(mu_star)


def test_pseudo_regret_nonnegative_on_random_allocations():
    rng = random.Random(77)
    tasks = [
        TaskSpec(tau=rng.randint(1, 4), p=rng.uniform(0.3, 1.0), v=rng.random() * 3)
        for _ in range(8)
    ]
    inst = make_instance(tasks, M=4, p_min=0.3)
    _, mu_star = oracle_allocation(inst)
    for _ in range(500):
        counts = [0] * 8
        for _ in range(4):
            counts[rng.randrange(8)] += 1
        assert pseudo_regret(inst, Allocation(tuple(counts)), mu_star) >= 0.0


def test_mean_realized_regret_tracks_pseudo_regret():
    # fixed suboptimal policy, 40 seeds: realized mean within 3 SE of pseudo
    tasks = [
        TaskSpec(tau=2, p=0.6, v=3.0),
        TaskSpec(tau=1, p=0.9, v=1.0),
        TaskSpec(tau=4, p=0.5, v=4.0),
    ]
    inst = make_instance(tasks, M=2, T=400, p_min=0.5)
    _, mu_star = oracle_allocation(inst)
    alloc = Allocation(counts=(0, 1, 0))
    pseudo_total = pseudo_regret(inst, alloc, mu_star) * inst.T
    totals = []
    for seed in range(40):
        env = Environment(inst, seed=seed)
        total = 0.0
        for _ in range(inst.T):
            out = env.step(alloc)
            total += mu_star - float(out.y.sum())
        totals.append(total)
    mean = float(np.mean(totals))
    se = float(np.std(totals, ddof=1) / math.sqrt(len(totals)))
    assert abs(mean - pseudo_total) <= 3 * se
