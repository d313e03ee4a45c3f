"""Closed-form figures of merit and fitted scaling experiments.

Fidelity of the finite-squeezing algorithm.  Averaging the retention of
a spectral component ``lam`` over a flat spectrum on
``[delta0, 1]`` gives the spectrum-integrated fidelity measure

    F(s, chi) = 2 eta * integral_{delta0}^{1}
                exp(-eps_q / (2 eta**2 (lam + chi)**2 s**2))
                / (eta * (lam + chi))  d lam,

where ``eps_q`` is the squared half-width of the accepted readout
window.  Substituting ``t = eps_q / (2 eta**2 s**2 (lam + chi)**2)``
turns this into a difference of exponential integrals,

    F = Ei(-t(delta0)) - Ei(-t(1)),

which is the closed form checked against direct quadrature.  As
``s -> infinity`` it saturates at ``2 * log((1 + chi) / (delta0 + chi))``;
it increases with squeezing, decreases with regularization, and decays
more slowly (relative to its ceiling) at larger ``chi``.

Success-rate scaling.  Post-selecting a window of radius
``sqrt(alpha * eps_q)`` while squeezing as ``s = (alpha**2 * eps_q)**(-1/4)``
keeps the distortion budget fixed and makes the acceptance probability
scale as ``eps_q**1.5``; squeezing held fixed gives slope 1 instead.
Both slopes come out of :func:`success_scaling_experiment` by log-log
fitting actual window quadratures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import SimulationError
from .ridge import SvdModel
from .spectral import SpectralState, SqueezeParams, success_probability

__all__ = [
    "FidelityParams",
    "PowerLawFit",
    "ScalingResult",
    "ShrinkageEntry",
    "fidelity_ceiling",
    "fidelity_closed_form",
    "fidelity_numeric",
    "fit_power_law",
    "success_scaling_experiment",
    "shrinkage_profile",
    "db_to_squeezing",
]


@dataclass(frozen=True)
class FidelityParams:
    """Inputs of the spectrum-integrated fidelity measure.

    ``eps_q`` readout-window budget (squared half-width), ``delta0``
    lower edge of the normalized singular spectrum.
    """

    eps_q: float
    eta: float
    chi: float
    s: float
    delta0: float = 0.01

    def __post_init__(self):
        if not (np.isfinite(self.eps_q) and self.eps_q >= 0):
            raise ValueError(f"eps_q must be >= 0, got {self.eps_q}")
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not (np.isfinite(self.chi) and self.chi >= 0):
            raise ValueError(f"chi must be >= 0, got {self.chi}")
        if not (np.isfinite(self.s) and self.s > 0):
            raise ValueError(f"s must be > 0, got {self.s}")
        if not (0 < self.delta0 < 1):
            raise ValueError(
                f"delta0 must lie strictly between 0 and 1, got {self.delta0}"
            )


def fidelity_ceiling(params: FidelityParams) -> float:
    """Infinite-squeezing saturation value of the fidelity measure."""
    return float(
        2.0 * np.log((1.0 + params.chi) / (params.delta0 + params.chi))
    )


def fidelity_closed_form(params: FidelityParams, normalized: bool = False) -> float:
    """Exponential-integral closed form of the fidelity measure.

    With ``normalized=True`` the value is divided by its
    infinite-squeezing ceiling, giving a figure in ``(0, 1]`` that is
    comparable across regularization strengths.
    """
    if params.eps_q == 0:
        raw = fidelity_ceiling(params)
    else:
        c = params.eps_q / (2.0 * params.eta**2 * params.s**2)
        t0 = c / (params.delta0 + params.chi) ** 2
        t1 = c / (1.0 + params.chi) ** 2
        raw = float(special.expi(-t0) - special.expi(-t1))
    return raw / fidelity_ceiling(params) if normalized else raw


def fidelity_numeric(params: FidelityParams, normalized: bool = False) -> float:
    """Direct quadrature of the defining spectral integral."""
    c = params.eps_q / (2.0 * params.eta**2 * params.s**2)

    def integrand(lam: float) -> float:
        shifted = lam + params.chi
        return np.exp(-c / shifted**2) / (params.eta * shifted)

    val, err = integrate.quad(
        integrand, params.delta0, 1.0, epsabs=1e-13, epsrel=1e-12
    )
    if err > max(1e-10, 1e-8 * abs(val)):
        raise SimulationError(
            f"fidelity quadrature error estimate too large: {err:g}",
            stage="fidelity",
        )
    raw = float(2.0 * params.eta * val)
    return raw / fidelity_ceiling(params) if normalized else raw


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of ``y = prefactor * x**exponent`` in log-log."""

    exponent: float
    prefactor: float
    r_squared: float


def fit_power_law(x: np.ndarray, y: np.ndarray) -> PowerLawFit:
    """Fit a power law through positive samples (at least three)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    if x.shape[0] < 3:
        raise ValueError(f"need at least 3 points, got {x.shape[0]}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fits need strictly positive samples")
    lx, ly = np.log(x), np.log(y)
    coeffs, residuals, *_ = np.polyfit(lx, ly, 1, full=True)
    slope, intercept = float(coeffs[0]), float(coeffs[1])
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(residuals[0]) if residuals.size else 0.0
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(exponent=slope, prefactor=float(np.exp(intercept)), r_squared=r2)


@dataclass(frozen=True)
class ScalingResult:
    """Window-budget sweep with its fitted acceptance power law."""

    eps_q: np.ndarray
    probabilities: np.ndarray
    fit: PowerLawFit


def _rank_one_state(singular_value: float) -> SpectralState:
    model = SvdModel(
        singular_values=np.array([float(singular_value)]),
        left_vectors=np.array([[1.0]]),
        right_vectors=np.array([[1.0]]),
        condition_number=1.0,
    )
    return SpectralState(np.array([1.0 + 0.0j]), model)


def success_scaling_experiment(
    eps_values: np.ndarray | None = None,
    eta: float = 1.0,
    chi: float = 0.0,
    singular_value: float = 1.0,
    coupled: bool = True,
    fixed_s: float = 2.0,
) -> ScalingResult:
    """Measure how acceptance probability scales with the window budget.

    For each ``eps_q`` the window radius is ``sqrt(alpha * eps_q)`` with
    ``alpha`` the branch phase coefficient.  With ``coupled=True`` the
    squeezing follows ``s = (alpha**2 * eps_q)**(-1/4)`` (fixed
    distortion budget, expected exponent 1.5); otherwise ``s`` stays at
    ``fixed_s`` (expected exponent 1).  Probabilities come from the
    spectral window quadrature on a single-branch state.
    """
    if eps_values is None:
        eps_values = np.geomspace(1e-3, 1e-2, 6)
    eps_values = np.asarray(eps_values, dtype=float).ravel()
    if eps_values.shape[0] < 4:
        raise ValueError(
            f"need at least 4 window budgets, got {eps_values.shape[0]}"
        )
    if np.any(eps_values <= 0):
        raise ValueError("window budgets must be positive")
    state = _rank_one_state(singular_value)
    alpha = eta * (singular_value**2 + chi)
    probs = np.empty_like(eps_values)
    for i, eps in enumerate(eps_values):
        s = float((alpha**2 * eps) ** -0.25) if coupled else float(fixed_s)
        params = SqueezeParams(
            s=s, eta=eta, chi=chi, window_radius=float(np.sqrt(alpha * eps))
        )
        probs[i] = success_probability(state, params)
    return ScalingResult(
        eps_q=eps_values,
        probabilities=probs,
        fit=fit_power_law(eps_values, probs),
    )


@dataclass(frozen=True)
class ShrinkageEntry:
    """Component-wise attenuation of one singular direction.

    ``ridge_factor``   lam**2 / (lam**2 + chi) — the regularizer's own
                       shrinkage relative to the plain inverse.
    ``squeeze_factor`` extra attenuation from finite squeezing,
                       1 / sqrt(1 + 1 / (s**4 alpha**2)); tends to 1 as
                       squeezing grows.
    ``total_factor``   product of the two.
    """

    singular_value: float
    ridge_factor: float
    squeeze_factor: float
    total_factor: float


def shrinkage_profile(
    model: SvdModel,
    params: SqueezeParams,
    infinite_squeezing: bool = False,
) -> list[ShrinkageEntry]:
    """Attenuation factors for every retained singular direction.

    The squeeze factor equals the origin branch amplitude relative to
    the sharp spectral filter, and is non-decreasing in the singular
    value: finite squeezing always hits the small-``lam`` directions
    hardest.
    """
    entries = []
    for lam in model.singular_values:
        lam = float(lam)
        ridge = lam**2 / (lam**2 + params.chi)
        if infinite_squeezing:
            squeeze = 1.0
        else:
            a = params.phase_coefficient(lam)
            squeeze = 1.0 / np.sqrt(1.0 + 1.0 / (params.s**4 * a**2))
        entries.append(
            ShrinkageEntry(
                singular_value=lam,
                ridge_factor=float(ridge),
                squeeze_factor=float(squeeze),
                total_factor=float(ridge * squeeze),
            )
        )
    return entries


def db_to_squeezing(db: float) -> float:
    """Convert a squeezing level in decibels to the linear scale ``s``.

    Ten dB per decade of variance suppression: ``s = 10**(db / 10)``.
    """
    db = float(db)
    if not np.isfinite(db):
        raise ValueError(f"squeezing level must be finite, got {db}")
    return float(10.0 ** (db / 10.0))
