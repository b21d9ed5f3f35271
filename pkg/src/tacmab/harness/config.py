"""Experiment configuration: schema, file format, canonical defaults.

Config files are line-oriented INI-style text with a mandatory versioned
header line. Example:

    # tacmab-config v1

    [instance]
    M = 5
    T = 10000
    p_min = 0.5
    tasks =
        tau=7 p=0.5 v=20
        tau=1 p=0.9 v=1
        ...

    [algorithm]
    name = dtac

    [parameters]
    n_max = 5            ; integer, or "theoretical" to derive from T, p_min
    c_ucb = 2.0
    heartbeat = 50
    message_model = broadcast

    [batch]
    n_seeds = 40
    base_seed = 1

Every run writes its resolved configuration next to its outputs so results
stay reproducible from the output directory alone.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from pathlib import Path

from ..ctac import theoretical_nmax
from ..env import Instance, TaskSpec
from ..errors import ConfigError

CONFIG_HEADER = "# tacmab-config v1"

ALGORITHMS = ("oracle", "ind_ucb", "ctac", "dtac")

# messages charged per sync event, as a function of team size
MESSAGE_MODELS = {
    "broadcast": lambda m: m,
    "unicast": lambda m: m * (m - 1),
    "all_to_all": lambda m: m * m,
}

_TASK_LINE = re.compile(
    r"^tau=(?P<tau>\d+)\s+p=(?P<p>[0-9.eE+-]+)\s+v=(?P<v>[0-9.eE+-]+)$"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved knobs for one experiment."""

    instance: Instance
    algorithm: str | None
    n_max: int
    c_ucb: float
    heartbeat: int
    message_model: str
    ctac_messages_per_round: int | None
    n_seeds: int
    base_seed: int
    out_dir: str | None = None

    def messages_per_sync(self) -> int:
        return MESSAGE_MODELS[self.message_model](self.instance.M)

    def ctac_round_messages(self) -> int:
        # default accounting: M uplink reports plus M downlink assignments
        if self.ctac_messages_per_round is not None:
            return self.ctac_messages_per_round
        return 2 * self.instance.M


def canonical_instance(T: int = 10_000) -> Instance:
    """The default benchmark environment (K=10, M=5).

    Two high-value infeasibility decoys, one full-team task holding the
    unique optimum, mid-coordination tasks, and low-threshold distractors.
    The v and p levels are implementation defaults chosen so the optimum is
    unique and dominated by the coordination task, and so filler values stay
    small relative to it (keeping the oracle value nearly flat across the
    threshold-ceiling sweep variants).
    """
    tasks = (
        TaskSpec(tau=7, p=0.5, v=20.0),
        TaskSpec(tau=7, p=0.5, v=20.0),
        TaskSpec(tau=5, p=0.9, v=10.0),
        TaskSpec(tau=3, p=0.8, v=1.0),
        TaskSpec(tau=3, p=0.8, v=1.0),
        TaskSpec(tau=3, p=0.8, v=1.0),
        TaskSpec(tau=2, p=0.8, v=0.75),
        TaskSpec(tau=2, p=0.8, v=0.75),
        TaskSpec(tau=1, p=0.9, v=0.25),
        TaskSpec(tau=1, p=0.9, v=0.25),
    )
    return Instance(tasks=tasks, M=5, T=T, p_min=0.5)


def canonical_config(
    algorithm: str | None = None, T: int = 10_000, n_seeds: int = 40
) -> ExperimentConfig:
    """Defaults used throughout: N_max=5, c=2, heartbeat 50, 40 seeds."""
    return ExperimentConfig(
        instance=canonical_instance(T=T),
        algorithm=algorithm,
        n_max=5,
        c_ucb=2.0,
        heartbeat=50,
        message_model="broadcast",
        ctac_messages_per_round=None,
        n_seeds=n_seeds,
        base_seed=1,
    )


def with_instance(config: ExperimentConfig, instance: Instance) -> ExperimentConfig:
    return replace(config, instance=instance)


def _get(parser: configparser.ConfigParser, section: str, key: str, cast, required=True, default=None):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}.{key}", f"cannot parse {raw!r}: {exc}") from exc


def _parse_tasks(raw: str) -> tuple[TaskSpec, ...]:
    tasks = []
    for lineno, line in enumerate(raw.strip().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        m = _TASK_LINE.match(line)
        if m is None:
            raise ConfigError(
                "instance.tasks", f"bad task line {lineno}: {line!r}"
            )
        tasks.append(
            TaskSpec(tau=int(m["tau"]), p=float(m["p"]), v=float(m["v"]))
        )
    if not tasks:
        raise ConfigError("instance.tasks", "no task lines")
    return tuple(tasks)


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a config file; raises ConfigError naming the field."""
    path = Path(path)
    text = path.read_text()
    first = next((ln.strip() for ln in text.splitlines() if ln.strip()), "")
    if first != CONFIG_HEADER:
        raise ConfigError("header", f"first line must be {CONFIG_HEADER!r}")

    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("file", f"cannot parse {path}: {exc}") from exc

    for section in ("instance", "batch"):
        if not parser.has_section(section):
            raise ConfigError(section, "missing section")

    M = _get(parser, "instance", "M", int)
    T = _get(parser, "instance", "T", int)
    p_min = _get(parser, "instance", "p_min", float)
    tasks = _parse_tasks(_get(parser, "instance", "tasks", str))
    try:
        instance = Instance(tasks=tasks, M=M, T=T, p_min=p_min)
    except ValueError as exc:
        raise ConfigError("instance", str(exc)) from exc

    algorithm = None
    if parser.has_option("algorithm", "name"):
        algorithm = parser.get("algorithm", "name").strip()
        if algorithm not in ALGORITHMS:
            raise ConfigError(
                "algorithm.name", f"must be one of {ALGORITHMS}, got {algorithm!r}"
            )

    raw_n_max = _get(parser, "parameters", "n_max", str, required=False, default="5")
    if raw_n_max.strip() == "theoretical":
        n_max = theoretical_nmax(T, p_min)
    else:
        try:
            n_max = int(raw_n_max)
        except ValueError as exc:
            raise ConfigError(
                "parameters.n_max", f"expected integer or 'theoretical': {raw_n_max!r}"
            ) from exc
    if n_max < 1:
        raise ConfigError("parameters.n_max", f"must be >= 1, got {n_max}")

    c_ucb = _get(parser, "parameters", "c_ucb", float, required=False, default=2.0)
    if not c_ucb > 0:
        raise ConfigError("parameters.c_ucb", f"must be > 0, got {c_ucb}")
    heartbeat = _get(parser, "parameters", "heartbeat", int, required=False, default=50)
    if heartbeat < 1:
        raise ConfigError("parameters.heartbeat", f"must be >= 1, got {heartbeat}")
    message_model = _get(
        parser, "parameters", "message_model", str, required=False, default="broadcast"
    ).strip()
    if message_model not in MESSAGE_MODELS:
        raise ConfigError(
            "parameters.message_model",
            f"must be one of {sorted(MESSAGE_MODELS)}, got {message_model!r}",
        )
    ctac_mpr = _get(
        parser, "parameters", "ctac_messages_per_round", int, required=False, default=None
    )
    if ctac_mpr is not None and ctac_mpr < 0:
        raise ConfigError(
            "parameters.ctac_messages_per_round", f"must be >= 0, got {ctac_mpr}"
        )

    n_seeds = _get(parser, "batch", "n_seeds", int)
    if n_seeds < 1:
        raise ConfigError("batch.n_seeds", f"must be >= 1, got {n_seeds}")
    base_seed = _get(parser, "batch", "base_seed", int)

    out_dir = _get(parser, "output", "dir", str, required=False, default=None) \
        if parser.has_section("output") else None

    return ExperimentConfig(
        instance=instance,
        algorithm=algorithm,
        n_max=n_max,
        c_ucb=c_ucb,
        heartbeat=heartbeat,
        message_model=message_model,
        ctac_messages_per_round=ctac_mpr,
        n_seeds=n_seeds,
        base_seed=base_seed,
        out_dir=out_dir,
    )


def dump_config(config: ExperimentConfig) -> str:
    """Serialize a config in canonical form (stable key order)."""
    inst = config.instance
    lines = [CONFIG_HEADER, "", "[instance]"]
    lines.append(f"M = {inst.M}")
    lines.append(f"T = {inst.T}")
    lines.append(f"p_min = {inst.p_min!r}")
    lines.append("tasks =")
    for task in inst.tasks:
        lines.append(f"    tau={task.tau} p={task.p!r} v={task.v!r}")
    lines.append("")
    if config.algorithm is not None:
        lines += ["[algorithm]", f"name = {config.algorithm}", ""]
    lines += [
        "[parameters]",
        f"n_max = {config.n_max}",
        f"c_ucb = {config.c_ucb!r}",
        f"heartbeat = {config.heartbeat}",
        f"message_model = {config.message_model}",
    ]
    if config.ctac_messages_per_round is not None:
        lines.append(f"ctac_messages_per_round = {config.ctac_messages_per_round}")
    lines += [
        "",
        "[batch]",
        f"n_seeds = {config.n_seeds}",
        f"base_seed = {config.base_seed}",
    ]
    if config.out_dir is not None:
        lines += ["", "[output]", f"dir = {config.out_dir}"]
    return "\n".join(lines) + "\n"


def write_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(config))
