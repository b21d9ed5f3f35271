"""Experiment harness: configs, batch runner, CSV and SVG reporting, CLI."""

from .config import (
    ALGORITHMS,
    CONFIG_HEADER,
    ExperimentConfig,
    canonical_config,
    canonical_instance,
    dump_config,
    load_config,
    with_instance,
    write_config,
)
from .report import (
    RegretSeries,
    plot_regret,
    plot_tau_sweep,
    read_csv,
    write_communication_csv,
    write_csv,
    write_sweep_csv,
    write_trial_csv,
)
from .runner import (
    AggregateStats,
    BatchResult,
    SweepRow,
    TrialRecord,
    aggregate,
    compare_all,
    run_batch,
    run_trial,
    scale_instance,
    sweep_tau,
)

__all__ = [
    "ALGORITHMS",
    "CONFIG_HEADER",
    "AggregateStats",
    "BatchResult",
    "ExperimentConfig",
    "RegretSeries",
    "SweepRow",
    "TrialRecord",
    "aggregate",
    "canonical_config",
    "canonical_instance",
    "compare_all",
    "dump_config",
    "load_config",
    "plot_regret",
    "plot_tau_sweep",
    "read_csv",
    "run_batch",
    "run_trial",
    "scale_instance",
    "sweep_tau",
    "with_instance",
    "write_communication_csv",
    "write_config",
    "write_csv",
    "write_sweep_csv",
    "write_trial_csv",
]
