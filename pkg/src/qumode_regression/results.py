"""Run results and their serialized forms.

A :class:`RunResult` is fully deterministic for a given config, dataset,
and seed, except for ``wall_time_s``; JSON serialization preserves key
order and float reprs, so two identical runs produce byte-identical
output once the wall time is set aside.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

__all__ = ["RunResult", "result_to_json", "save_result", "write_sweep_csv"]

SCHEMA_VERSION = 1

# Columns exported for parameter sweeps, in order.
SWEEP_COLUMNS = (
    "prediction",
    "raw_overlap",
    "overlap_magnitude",
    "calibration",
    "success_probability",
    "residual_entanglement",
    "fidelity_vs_ideal",
    "condition_number",
)


@dataclass(frozen=True)
class RunResult:
    """Everything one simulation run reports.

    ``raw_overlap`` is the signed interference readout;
    ``prediction = calibration * raw_overlap`` is in target units.
    ``calibration_target_ratio`` is the naive target/raw estimator kept
    for comparison with the oracle-referenced ``calibration``.
    """

    mode: str
    prediction: float
    raw_overlap: float
    overlap_magnitude: float
    calibration: float
    calibration_rows_used: int
    calibration_target_ratio: float
    success_probability: float
    residual_entanglement: float
    condition_number: float
    singular_values: list[float]
    fidelity_vs_ideal: float | None
    config: dict[str, Any]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    wall_time_s: float = 0.0
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        out = {"schema_version": self.schema_version}
        body = asdict(self)
        body.pop("schema_version")
        out.update(body)
        return out


def result_to_json(result: RunResult | list[RunResult]) -> str:
    if isinstance(result, list):
        payload: Any = [r.to_dict() for r in result]
    else:
        payload = result.to_dict()
    return json.dumps(payload, indent=2) + "\n"


def save_result(path: str | Path, result: RunResult | list[RunResult]) -> None:
    Path(path).write_text(result_to_json(result))


def write_sweep_csv(
    path: str | Path,
    param: str,
    values: list[float],
    results: list[RunResult],
) -> None:
    """Tabulate a sweep, one row per parameter value."""
    if len(values) != len(results):
        raise ValueError("one result per sweep value required")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([param, *SWEEP_COLUMNS])
        for value, res in zip(values, results):
            row = [repr(float(value))]
            for col in SWEEP_COLUMNS:
                cell = getattr(res, col)
                row.append("" if cell is None else repr(float(cell)))
            writer.writerow(row)
