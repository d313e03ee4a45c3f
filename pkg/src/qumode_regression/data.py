"""Datasets and query points for the regression simulator.

A dataset is a real feature matrix with one target value per row.  The
quantum encodings downstream index rows and columns with qubit
registers, so both dimensions must be powers of two before a dataset
enters a circuit; :func:`pad_to_pow2` appends zero rows/columns as
needed and the originals keep their indices.

All containers are frozen dataclasses and their arrays are marked
read-only: every operation in this package returns a new object rather
than mutating its inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

__all__ = ["Dataset", "QueryPoint", "load_dataset", "load_query", "pad_to_pow2"]


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def _next_pow2(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


@dataclass(frozen=True)
class Dataset:
    """A feature matrix with per-row targets.

    ``original_rows`` / ``original_cols`` track the pre-padding shape so
    padded rows (all zeros, target zero) can be told apart from data.
    """

    features: np.ndarray
    targets: np.ndarray
    original_rows: int = -1
    original_cols: int = -1

    def __post_init__(self):
        feats = np.atleast_2d(np.asarray(self.features, dtype=float))
        targs = np.asarray(self.targets, dtype=float).ravel()
        if feats.ndim != 2 or feats.size == 0:
            raise DataError("features must be a non-empty 2-D matrix")
        if targs.shape[0] != feats.shape[0]:
            raise DataError(
                f"got {targs.shape[0]} targets for {feats.shape[0]} feature rows"
            )
        if not np.all(np.isfinite(feats)):
            raise DataError("features contain non-finite entries")
        if not np.all(np.isfinite(targs)):
            raise DataError("targets contain non-finite entries")
        object.__setattr__(self, "features", _readonly(feats))
        object.__setattr__(self, "targets", _readonly(targs))
        if self.original_rows < 0:
            object.__setattr__(self, "original_rows", feats.shape[0])
        if self.original_cols < 0:
            object.__setattr__(self, "original_cols", feats.shape[1])
        if self.original_rows > feats.shape[0] or self.original_cols > feats.shape[1]:
            raise DataError("original shape cannot exceed the padded shape")

    @property
    def rows(self) -> int:
        return self.features.shape[0]

    @property
    def cols(self) -> int:
        return self.features.shape[1]

    @property
    def is_padded(self) -> bool:
        return (self.original_rows, self.original_cols) != (self.rows, self.cols)

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.features, axis=1)


@dataclass(frozen=True)
class QueryPoint:
    """A single feature vector to predict on."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size == 0:
            raise DataError("query point is empty")
        if not np.all(np.isfinite(vals)):
            raise DataError("query point contains non-finite entries")
        object.__setattr__(self, "values", _readonly(vals))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def padded_to(self, n: int) -> "QueryPoint":
        """Zero-pad to ``n`` components (no-op if already that long)."""
        if n < self.dim:
            raise DataError(f"cannot pad a {self.dim}-dim query down to {n}")
        if n == self.dim:
            return self
        out = np.zeros(n)
        out[: self.dim] = self.values
        return QueryPoint(out)


def load_dataset(path: str | Path, target_column: str = "y") -> Dataset:
    """Read a dataset from a headed CSV file.

    Every column except ``target_column`` is taken as a feature, in file
    order.  Raises :class:`DataError` on a missing file, missing target
    column, ragged rows, or non-numeric cells (naming the offending
    row/column).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"dataset file is empty: {path}") from None
        header = [h.strip() for h in header]
        if target_column not in header:
            raise DataError(
                f"target column {target_column!r} not in header {header}"
            )
        tcol = header.index(target_column)
        feat_rows: list[list[float]] = []
        targ_rows: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"row {lineno} has {len(row)} cells, header has {len(header)}"
                )
            parsed = []
            for name, cell in zip(header, row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"non-numeric value {cell!r} in column {name!r}, row {lineno}"
                    ) from None
            targ_rows.append(parsed[tcol])
            feat_rows.append([v for i, v in enumerate(parsed) if i != tcol])
    if not feat_rows:
        raise DataError(f"dataset has no data rows: {path}")
    if len(feat_rows[0]) == 0:
        raise DataError("dataset has no feature columns")
    return Dataset(np.array(feat_rows), np.array(targ_rows))


def load_query(path: str | Path, target_column: str = "y") -> QueryPoint:
    """Read a single query point from a headed CSV file.

    The file must contain exactly one data row; a ``target_column``
    column, if present, is ignored so query files can share the
    dataset's header layout.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"query file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"query file is empty: {path}") from None
        rows = [
            row for row in reader if row and any(c.strip() for c in row)
        ]
    if len(rows) != 1:
        raise DataError(
            f"query file must contain exactly one data row, got {len(rows)}: {path}"
        )
    row = rows[0]
    if len(row) != len(header):
        raise DataError(
            f"query row has {len(row)} cells, header has {len(header)}"
        )
    values = []
    for name, cell in zip(header, row):
        if name == target_column:
            continue
        try:
            values.append(float(cell))
        except ValueError:
            raise DataError(
                f"non-numeric value {cell!r} in column {name!r}"
            ) from None
    if not values:
        raise DataError("query file has no feature columns")
    return QueryPoint(np.array(values))


def pad_to_pow2(dataset: Dataset) -> Dataset:
    """Zero-pad rows and columns up to the next powers of two.

    Original entries keep their indices; appended rows get target zero.
    A dataset whose shape is already a power of two in both dimensions
    is returned unchanged.
    """
    m, n = dataset.rows, dataset.cols
    m2, n2 = _next_pow2(m), _next_pow2(n)
    if (m2, n2) == (m, n):
        return dataset
    feats = np.zeros((m2, n2))
    feats[:m, :n] = dataset.features
    targs = np.zeros(m2)
    targs[:m] = dataset.targets
    return Dataset(
        feats,
        targs,
        original_rows=dataset.original_rows,
        original_cols=dataset.original_cols,
    )
