"""Exception types shared across the simulator.

Three failure families map onto the three CLI exit codes: bad
configuration (2), bad input data (3), and runtime simulation failures
such as quadrature breakdown or an empty post-selection window (4).
"""

from __future__ import annotations


class ConfigError(ValueError):
    """A configuration key is unknown, ill-typed, or out of range."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class DataError(ValueError):
    """An input dataset or query point violates the data contract."""


class SimulationError(RuntimeError):
    """A simulation stage failed at runtime.

    ``stage`` names the pipeline stage (e.g. ``"homodyne"``) so the CLI
    can report where a run died.
    """

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage
