"""Delimited output and figure rendering.

CSV output is byte-deterministic: fixed column order, fixed six-decimal float
formatting, RFC-4180 dialect (CRLF line endings, quoting only when needed).
Figures are rendered with matplotlib straight to self-contained static SVG
files, one per chart, written alongside the CSV they visualize; every series
carries a stable SVG gid so output structure is machine-checkable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.figure import Figure

from .runner import AggregateStats, SweepRow, TrialRecord

STATS_HEADER = [
    "round",
    "mean_cum_pseudo_regret",
    "se_pseudo",
    "mean_cum_realized_regret",
    "se_realized",
    "mean_cum_messages",
]

TRIAL_HEADER = [
    "round",
    "pseudo_regret",
    "realized_regret",
    "cum_pseudo_regret",
    "cum_realized_regret",
    "messages",
    "sync_type",
    "allocation",
]

SWEEP_HEADER = ["tau_max", "algorithm", "mean_final_regret", "se_final_regret"]

COMMUNICATION_HEADER = [
    "algorithm",
    "mean_total_messages",
    "mean_final_pseudo_regret",
    "se_final_pseudo_regret",
]


def _fmt(x: float) -> str:
    return f"{float(x):.6f}"


def write_csv(stats: AggregateStats, path: str | Path) -> None:
    """Per-round aggregate series; header-only when the stats are empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STATS_HEADER)
        for i, t in enumerate(stats.rounds):
            writer.writerow(
                [
                    int(t),
                    _fmt(stats.mean_cum_pseudo[i]),
                    _fmt(stats.se_cum_pseudo[i]),
                    _fmt(stats.mean_cum_realized[i]),
                    _fmt(stats.se_cum_realized[i]),
                    _fmt(stats.mean_cum_messages[i]),
                ]
            )


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read a stats CSV back into column arrays keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns: list[list[float]] = [[] for _ in header]
        for row in reader:
            for i, cell in enumerate(row):
                columns[i].append(float(cell))
    return {name: np.asarray(col) for name, col in zip(header, columns)}


def write_trial_csv(record: TrialRecord, path: str | Path) -> None:
    """Per-round detail of a single trial, allocation as ;-joined counts."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_HEADER)
        for i in range(len(record.pseudo)):
            writer.writerow(
                [
                    i + 1,
                    _fmt(record.pseudo[i]),
                    _fmt(record.realized[i]),
                    _fmt(record.cum_pseudo[i]),
                    _fmt(record.cum_realized[i]),
                    int(record.messages[i]),
                    record.sync_types[i],
                    ";".join(str(c) for c in record.allocations[i]),
                ]
            )


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.tau_max,
                    row.algorithm,
                    _fmt(row.mean_final_regret),
                    _fmt(row.se_final_regret),
                ]
            )


def write_communication_csv(
    stats_by_algorithm: dict[str, AggregateStats], path: str | Path
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMMUNICATION_HEADER)
        for name, stats in stats_by_algorithm.items():
            writer.writerow(
                [
                    name,
                    _fmt(stats.mean_total_messages),
                    _fmt(stats.final_mean_pseudo),
                    _fmt(stats.final_se_pseudo),
                ]
            )


@dataclass(frozen=True)
class RegretSeries:
    """One plottable series: mean cumulative regret with its SE band."""

    label: str
    rounds: np.ndarray
    mean: np.ndarray
    se: np.ndarray

    @classmethod
    def from_stats(cls, stats: AggregateStats, label: str | None = None) -> "RegretSeries":
        return cls(
            label=label or stats.algorithm,
            rounds=stats.rounds,
            mean=stats.mean_cum_pseudo,
            se=stats.se_cum_pseudo,
        )


def plot_regret(series: Sequence[RegretSeries], path: str | Path) -> None:
    """Regret-over-time SVG: one line plus one +-1 SE band per series."""
    if not series:
        raise ValueError("no series to plot")
    fig = Figure(figsize=(8.0, 5.0))
    ax = fig.add_subplot()
    for s in series:
        (line,) = ax.plot(s.rounds, s.mean, label=s.label, linewidth=1.4)
        line.set_gid(f"series-{s.label}-line")
        band = ax.fill_between(
            s.rounds, s.mean - s.se, s.mean + s.se, alpha=0.25,
            color=line.get_color(), linewidth=0,
        )
        band.set_gid(f"series-{s.label}-band")
    ax.set_xlabel("round")
    ax.set_ylabel("mean cumulative pseudo-regret")
    ax.legend(loc="upper left")
    ax.margins(x=0)
    _save_svg(fig, path)


def plot_tau_sweep(rows: Sequence[SweepRow], path: str | Path) -> None:
    """Final regret versus threshold ceiling, one error-bar series per algorithm."""
    if not rows:
        raise ValueError("no series to plot")
    by_algo: dict[str, list[SweepRow]] = {}
    for row in rows:
        by_algo.setdefault(row.algorithm, []).append(row)
    fig = Figure(figsize=(8.0, 5.0))
    ax = fig.add_subplot()
    for name, algo_rows in by_algo.items():
        algo_rows = sorted(algo_rows, key=lambda r: r.tau_max)
        xs = [r.tau_max for r in algo_rows]
        ys = [r.mean_final_regret for r in algo_rows]
        es = [r.se_final_regret for r in algo_rows]
        container = ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=name)
        container.lines[0].set_gid(f"series-{name}-line")
    ax.set_xlabel("maximum feasibility threshold")
    ax.set_ylabel("mean final cumulative pseudo-regret")
    ax.set_xticks(sorted({r.tau_max for r in rows}))
    ax.legend(loc="upper left")
    _save_svg(fig, path)


def _save_svg(fig: Figure, path: str | Path) -> None:
    fig.savefig(str(path), format="svg", metadata={"Date": None})
