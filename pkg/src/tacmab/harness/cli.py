"""Command line interface.

Subcommands:
    run      one algorithm, one config; per-round CSV + regret SVG
    compare  all four algorithms; per-algorithm CSVs, combined regret SVG,
             communication table
    sweep    threshold-ceiling sweep; table CSV + error-bar SVG
    plot     render stats CSVs to an SVG without rerunning anything

Exit codes: 0 success, 1 config error, 2 runtime invariant violation,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InvariantViolation, SyncProtocolError
from .config import ALGORITHMS, ExperimentConfig, load_config, write_config
from .report import (
    RegretSeries,
    plot_regret,
    plot_tau_sweep,
    read_csv,
    write_communication_csv,
    write_csv,
    write_sweep_csv,
)
from .runner import SweepRow, compare_all, run_batch, sweep_tau

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; 2 is reserved here
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tacmab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out-dir", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        p.add_argument(
            "--n-seeds", type=int, default=None, help="override batch n_seeds"
        )

    p_run = sub.add_parser("run", help="run one configured algorithm")
    add_common(p_run)
    p_run.add_argument(
        "--algorithm", choices=ALGORITHMS, default=None,
        help="override the config's algorithm",
    )

    p_cmp = sub.add_parser("compare", help="run all four algorithms")
    add_common(p_cmp)

    p_sweep = sub.add_parser("sweep", help="threshold-ceiling sweep")
    add_common(p_sweep)
    p_sweep.add_argument(
        "--tau-max", default="1,2,3,4,5",
        help="comma-separated ceilings (default 1,2,3,4,5)",
    )

    p_plot = sub.add_parser("plot", help="render stats CSVs to SVG")
    p_plot.add_argument("csvs", nargs="+", help="stats CSV files to plot")
    p_plot.add_argument("--out", required=True, help="output SVG path")
    return parser


def _resolve(args) -> ExperimentConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, base_seed=args.seed)
    if args.n_seeds is not None:
        if args.n_seeds < 1:
            raise ConfigError("batch.n_seeds", f"must be >= 1, got {args.n_seeds}")
        config = replace(config, n_seeds=args.n_seeds)
    config = replace(config, out_dir=str(args.out_dir))
    return config


def _prepare_out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_config(config, out / "resolved_config.cfg")
    return out


def _cmd_run(args) -> int:
    config = _resolve(args)
    if args.algorithm is not None:
        config = replace(config, algorithm=args.algorithm)
    if config.algorithm is None:
        raise ConfigError("algorithm.name", "no algorithm configured or given")
    out = _prepare_out_dir(config)
    result = run_batch(config)
    csv_path = out / f"regret_{config.algorithm}.csv"
    write_csv(result.stats, csv_path)
    plot_regret([RegretSeries.from_stats(result.stats)], out / f"regret_{config.algorithm}.svg")
    print(
        f"{config.algorithm}: final mean cumulative pseudo-regret "
        f"{result.stats.final_mean_pseudo:.2f} "
        f"(se {result.stats.final_se_pseudo:.2f}), "
        f"mean total messages {result.stats.mean_total_messages:.1f}"
    )
    print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    config = _resolve(args)
    out = _prepare_out_dir(config)
    results = compare_all(config)
    series = []
    stats_by_algo = {}
    for name, result in results.items():
        write_csv(result.stats, out / f"regret_{name}.csv")
        series.append(RegretSeries.from_stats(result.stats))
        stats_by_algo[name] = result.stats
    plot_regret(series, out / "regret_comparison.svg")
    write_communication_csv(stats_by_algo, out / "communication.csv")
    for name, stats in stats_by_algo.items():
        print(
            f"{name:8s} final regret {stats.final_mean_pseudo:10.2f} "
            f"(se {stats.final_se_pseudo:.2f})  "
            f"messages {stats.mean_total_messages:10.1f}"
        )
    ctac_msgs = stats_by_algo["ctac"].mean_total_messages
    dtac_msgs = stats_by_algo["dtac"].mean_total_messages
    if dtac_msgs > 0:
        print(f"communication reduction: {ctac_msgs / dtac_msgs:.1f}x")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _resolve(args)
    try:
        tau_values = [int(v) for v in args.tau_max.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError("tau_max", f"bad sweep values {args.tau_max!r}") from exc
    if not tau_values or any(v < 1 for v in tau_values):
        raise ConfigError("tau_max", f"ceilings must be >= 1, got {args.tau_max!r}")
    out = _prepare_out_dir(config)
    rows = sweep_tau(config, tau_values)
    write_sweep_csv(rows, out / "sweep.csv")
    plot_tau_sweep(rows, out / "sweep.svg")
    for row in rows:
        print(
            f"tau_max={row.tau_max} {row.algorithm:8s} "
            f"final regret {row.mean_final_regret:10.2f} (se {row.se_final_regret:.2f})"
        )
    return EXIT_OK


def _cmd_plot(args) -> int:
    series = []
    for path in args.csvs:
        columns = read_csv(path)
        label = Path(path).stem.removeprefix("regret_")
        series.append(
            RegretSeries(
                label=label,
                rounds=columns["round"].astype(np.int64),
                mean=columns["mean_cum_pseudo_regret"],
                se=columns["se_pseudo"],
            )
        )
    plot_regret(series, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "plot": _cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantViolation, SyncProtocolError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
