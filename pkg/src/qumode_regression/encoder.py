"""Explicit gate-level amplitude encoder for a 4-row, 2-column dataset.

Three qubits: two sample qubits index the row, one feature qubit indexes
the column (basis order ``|s1 s0 f>``).  Hadamards put the sample
register in an even superposition, then one doubly-controlled rotation
per row turns the feature qubit into that row's direction:

    R(theta_m) |0> = cos(theta_m) |0> + sin(theta_m) |1>,
    theta_m = atan2(a_m1, a_m0).

When all rows share the same norm, the output equals the flattened
feature matrix normalized to unit Frobenius norm — the same qubit state
the dense simulator prepares.  Rows of unequal norm cannot be reached by
rotations alone, so they are rejected (normalize rows first).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DataError

__all__ = ["EncoderCircuit", "amplitude_encoder_4x2"]

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class EncoderCircuit:
    """Gate list realizing the 4x2 amplitude encoding.

    ``gates`` holds ``("h", qubit)`` and
    ``("controlled_rotation", row, theta)`` descriptors in application
    order; ``thetas`` are the per-row feature angles.
    """

    thetas: np.ndarray
    gates: tuple[tuple, ...]

    def unitary(self) -> np.ndarray:
        """Compose the gate list into the full 8x8 matrix."""
        u = np.eye(8)
        for gate in self.gates:
            u = self._gate_matrix(gate) @ u
        return u

    def output_state(self) -> np.ndarray:
        """Apply the circuit to ``|000>``; flattened row-major (row, col)."""
        return self.unitary()[:, 0]

    @staticmethod
    def _gate_matrix(gate: tuple) -> np.ndarray:
        kind = gate[0]
        if kind == "h":
            _, qubit = gate
            ops = [np.eye(2)] * 3
            ops[qubit] = _H
            return np.kron(np.kron(ops[0], ops[1]), ops[2])
        if kind == "controlled_rotation":
            _, row, theta = gate
            u = np.eye(8)
            block = _rotation(theta)
            u[2 * row : 2 * row + 2, 2 * row : 2 * row + 2] = block
            return u
        raise ValueError(f"unknown gate {gate!r}")


def amplitude_encoder_4x2(dataset: Dataset) -> EncoderCircuit:
    """Build the explicit encoder circuit for a 4x2 feature matrix.

    Requires exactly 4 rows and 2 columns (pad first if needed) and
    equal positive row norms.
    """
    a = dataset.features
    if a.shape != (4, 2):
        raise DataError(
            f"explicit encoder handles a 4x2 feature matrix, got {a.shape}"
        )
    norms = np.linalg.norm(a, axis=1)
    if np.any(norms <= 0):
        raise DataError("every row must have positive norm")
    if (norms.max() - norms.min()) > 1e-9 * norms.max():
        raise DataError(
            "rows must share a common norm (normalize rows before encoding)"
        )
    thetas = np.arctan2(a[:, 1], a[:, 0])
    gates: list[tuple] = [("h", 0), ("h", 1)]
    gates += [
        ("controlled_rotation", m, float(thetas[m])) for m in range(4)
    ]
    thetas = thetas.copy()
    thetas.setflags(write=False)
    return EncoderCircuit(thetas=thetas, gates=tuple(gates))
