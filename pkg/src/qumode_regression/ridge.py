"""Classical ridge-regression reference built on the SVD.

This is the exact oracle the quantum layers are measured against.  With
the singular value decomposition ``A = U diag(lam) V^T`` the regularized
prediction at a query ``a`` is::

    y_hat = sum_i  lam_i / (lam_i**2 + chi) * (u_i . y) * (a . v_i)

summed over the retained triples.  At ``chi = 0`` this is the truncated
pseudoinverse solution; singular values at or below ``rank_tol`` times
the largest are dropped for every ``chi`` so the two regimes agree as
``chi -> 0``.

Sign convention: each right singular vector is flipped so its first
non-negligible component is positive (the matching left vector flips
with it), which makes decompositions reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, QueryPoint
from .errors import DataError

__all__ = [
    "SvdModel",
    "RidgeSolution",
    "CalibrationResult",
    "svd_decompose",
    "ridge_solve",
    "ridge_predict",
    "calibrate_scale",
]

DEFAULT_RANK_TOL = 1e-12
_SIGN_TOL = 1e-12


@dataclass(frozen=True)
class SvdModel:
    """SVD of a feature matrix, restricted to the retained triples.

    ``singular_values`` are descending and strictly above the rank
    cutoff; ``left_vectors`` (rows space) and ``right_vectors`` (feature
    space) hold the matching singular vectors as columns.
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    condition_number: float

    @property
    def rank(self) -> int:
        return self.singular_values.shape[0]


@dataclass(frozen=True)
class RidgeSolution:
    """Weight vector solving the regularized least-squares problem."""

    weights: np.ndarray
    chi: float


@dataclass(frozen=True)
class CalibrationResult:
    """Multiplicative scale aligning raw overlaps with target values."""

    scale: float
    rows_used: int


def svd_decompose(dataset: Dataset, rank_tol: float = DEFAULT_RANK_TOL) -> SvdModel:
    """Decompose the feature matrix, dropping near-null directions.

    Singular values ``lam_i <= rank_tol * lam_max`` are discarded along
    with their vectors.  The condition number reported is
    ``lam_max**2 / lam_min**2`` over what remains (the squared-spectrum
    spread that controls the quantum algorithm's difficulty).
    """
    if rank_tol < 0:
        raise ValueError(f"rank_tol must be non-negative, got {rank_tol}")
    a = dataset.features
    u, lam, vt = np.linalg.svd(a, full_matrices=False)
    if lam[0] <= 0.0:
        raise DataError("feature matrix is identically zero")
    keep = lam > rank_tol * lam[0]
    u, lam, vt = u[:, keep], lam[keep], vt[keep]
    # Fix signs: first non-negligible component of each right vector positive.
    for i in range(lam.shape[0]):
        v = vt[i]
        idx = np.flatnonzero(np.abs(v) > _SIGN_TOL)
        lead = idx[0] if idx.size else int(np.argmax(np.abs(v)))
        if v[lead] < 0:
            vt[i] = -v
            u[:, i] = -u[:, i]
    cond = float(lam[0] ** 2 / lam[-1] ** 2)
    return SvdModel(
        singular_values=lam,
        left_vectors=u,
        right_vectors=vt.T,
        condition_number=cond,
    )


def _check_chi(chi: float) -> float:
    chi = float(chi)
    if not np.isfinite(chi) or chi < 0:
        raise ValueError(f"regularization strength must be >= 0, got {chi}")
    return chi


def ridge_solve(
    dataset: Dataset, chi: float, rank_tol: float = DEFAULT_RANK_TOL
) -> RidgeSolution:
    """Solve for the ridge weight vector through the SVD path."""
    chi = _check_chi(chi)
    model = svd_decompose(dataset, rank_tol=rank_tol)
    lam = model.singular_values
    coeffs = lam / (lam**2 + chi) * (model.left_vectors.T @ dataset.targets)
    return RidgeSolution(weights=model.right_vectors @ coeffs, chi=chi)


def ridge_predict(
    dataset: Dataset,
    query: QueryPoint,
    chi: float,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> float:
    """Exact regularized prediction at a query point."""
    chi = _check_chi(chi)
    if query.dim != dataset.cols:
        raise DataError(
            f"query has {query.dim} features, dataset has {dataset.cols}"
        )
    model = svd_decompose(dataset, rank_tol=rank_tol)
    lam = model.singular_values
    uy = model.left_vectors.T @ dataset.targets
    va = model.right_vectors.T @ query.values
    return float(np.sum(lam / (lam**2 + chi) * uy * va))


def calibrate_scale(
    dataset: Dataset,
    raw_predictions: np.ndarray,
    tolerance: float = 1e-12,
) -> CalibrationResult:
    """Average the per-row ratio target / raw prediction.

    Rows whose raw prediction has magnitude at or below ``tolerance``
    are excluded (this silently drops zero-padded rows).  Raises
    :class:`DataError` if no usable rows remain.
    """
    raw = np.asarray(raw_predictions, dtype=float).ravel()
    if raw.shape[0] != dataset.rows:
        raise DataError(
            f"got {raw.shape[0]} raw predictions for {dataset.rows} rows"
        )
    if not np.all(np.isfinite(raw)):
        raise DataError("raw predictions contain non-finite entries")
    usable = np.abs(raw) > tolerance
    if not np.any(usable):
        raise DataError("no rows with usable raw predictions to calibrate on")
    ratios = dataset.targets[usable] / raw[usable]
    return CalibrationResult(scale=float(np.mean(ratios)), rows_used=int(usable.sum()))
