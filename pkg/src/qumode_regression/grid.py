"""Discretized phase-space grid for a single qumode.

A qumode wavefunction is stored on ``points`` momentum samples spanning
``[-extent, extent)``.  The conjugate position grid is fixed by the
discrete Fourier transform: ``dq = pi / extent`` independent of the
number of points, and ``dp * dq * points = 2 * pi`` exactly.  Both axes
contain 0 at index ``points // 2``, which keeps the centered-transform
conventions in :mod:`.circuit` simple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QumodeGrid", "make_grid"]


@dataclass(frozen=True)
class QumodeGrid:
    """Sampling geometry shared by all qumodes in a simulation."""

    points: int
    extent: float

    def __post_init__(self):
        if self.points < 8 or (self.points & (self.points - 1)) != 0:
            raise ValueError(
                f"grid points must be a power of two >= 8, got {self.points}"
            )
        if not (np.isfinite(self.extent) and self.extent > 0):
            raise ValueError(f"grid extent must be > 0, got {self.extent}")

    @property
    def dp(self) -> float:
        """Momentum step ``2 * extent / points``."""
        return 2.0 * self.extent / self.points

    @property
    def dq(self) -> float:
        """Position step ``pi / extent`` (independent of points)."""
        return float(np.pi / self.extent)

    def momentum_axis(self) -> np.ndarray:
        """Samples ``-extent, ..., 0, ..., extent - dp`` (0 at points//2)."""
        return (np.arange(self.points) - self.points // 2) * self.dp

    def position_axis(self) -> np.ndarray:
        """Conjugate samples with step ``dq`` (0 at points//2)."""
        return (np.arange(self.points) - self.points // 2) * self.dq


def make_grid(points: int = 256, extent: float = 8.0) -> QumodeGrid:
    """Build a grid, validating the power-of-two and positivity rules."""
    return QumodeGrid(points=int(points), extent=float(extent))
