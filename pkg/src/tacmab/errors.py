"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(Exception):
    """Invalid experiment configuration; `field` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class TrialError(RuntimeError):
    """A trial failed; carries the seed for attribution."""

    def __init__(self, seed: int, message: str):
        self.seed = seed
        super().__init__(f"trial with seed {seed} failed: {message}")


class SyncProtocolError(RuntimeError):
    """A synchronization exchange was incomplete (missing or duplicate peer)."""


class InvariantViolation(RuntimeError):
    """A runtime invariant failed (structural sync bound, plan consensus)."""
