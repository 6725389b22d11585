import logging
import math
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import interpolate, optimize

from aom_dpd.config import Config
from aom_dpd.exceptions import (
    InsufficientLowAmplitudeData,
    InsufficientRangeCoverage,
    InvalidCalibrationData,
    KindMismatch,
    NonMonotonicFit,
    NonMonotonicTransfer,
)
from aom_dpd.models.transfer import (
    AMPLITUDE,
    PHASE,
    CalibrationDataset,
    PolynomialTransfer,
    PredistortionMap,
    StabilityReport,
)
from aom_dpd.utils.validators import validate_calibration_data

logger = logging.getLogger(__name__)


def _check_dataset(dataset: CalibrationDataset, kind: str):
    error = validate_calibration_data(dataset.drives, dataset.values, dataset.kind)
    if error:
        raise InvalidCalibrationData(error)
    if dataset.kind != kind:
        raise KindMismatch(f"Expected {kind} calibration data, got {dataset.kind}")


def _check_kind(transfer: PolynomialTransfer, kind: str):
    if transfer.kind != kind:
        raise KindMismatch(f"Expected {kind} transfer, got {transfer.kind}")


def _as_output(values):
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


def _lstsq_no_constant(drives, values, powers) -> np.ndarray:
    """Least squares on columns A^k for the given powers, columns scaled to unit norm"""
    basis = np.power.outer(drives, np.asarray(powers, dtype=float))
    scale = np.linalg.norm(basis, axis=0)
    scale[scale == 0] = 1.0
    solution, *_ = np.linalg.lstsq(basis / scale, values, rcond=None)
    return solution / scale


def origin_slope(dataset: CalibrationDataset, limit: float = Config.ORIGIN_SLOPE_LIMIT,
                 min_points: int = Config.ORIGIN_SLOPE_MIN_POINTS) -> float:
    """Slope at the origin from the low-amplitude points"""
    mask = dataset.drives < limit
    if mask.sum() < min_points:
        raise InsufficientLowAmplitudeData(
            f"Need at least {min_points} points below A={limit}, got {int(mask.sum())}"
        )

    # cubic through the origin absorbs the compressive curvature of the response
    coefficients = _lstsq_no_constant(dataset.drives[mask], dataset.values[mask], [1, 2, 3])
    return float(coefficients[0])


def normalize_unit_slope(dataset: CalibrationDataset) -> CalibrationDataset:
    """Rescale amplitude samples so the response has unit slope at the origin"""
    _check_dataset(dataset, AMPLITUDE)

    slope = origin_slope(dataset)
    if slope <= 0:
        raise InvalidCalibrationData(f"Origin slope must be positive, got {slope:.6g}")

    logger.debug(f"Normalizing calibration by origin slope {slope:.9g}")
    return dataset.with_values(dataset.values / slope)


def is_monotone(transfer: PolynomialTransfer,
                n_points: int = Config.MONOTONE_GRID_POINTS) -> bool:
    """True when f'(A) > 0 at every point of a uniform grid on [0, 1]"""
    slopes = transfer.derivative(np.linspace(0.0, 1.0, n_points))
    return bool(np.all(slopes > 0))


def fit_amplitude(dataset: CalibrationDataset,
                  order: int = Config.AMPLITUDE_ORDER) -> PolynomialTransfer:
    """Fit the amplitude response y(A) = sum a_k A^k"""
    _check_dataset(dataset, AMPLITUDE)
    if len(dataset) < order + 2:
        raise InvalidCalibrationData(
            f"Order {order} fit needs at least {order + 2} points, got {len(dataset)}"
        )

    coefficients = _lstsq_no_constant(dataset.drives, dataset.values, range(1, order + 1))
    transfer = PolynomialTransfer(coefficients, AMPLITUDE)
    residuals = dataset.values - transfer.raw(dataset.drives)
    transfer.residual_rms = float(np.sqrt(np.mean(residuals ** 2)))

    if not is_monotone(transfer):
        raise NonMonotonicFit(
            "Fitted amplitude response is not strictly increasing on [0, 1]; "
            "inversion is impossible"
        )

    logger.info(f"Fitted order-{order} amplitude response, residual rms {transfer.residual_rms:.3g}")
    return transfer


def fit_phase(dataset: CalibrationDataset, order: int = Config.PHASE_ORDER,
              fit_range: Tuple[float, float] = Config.PHASE_FIT_RANGE) -> PolynomialTransfer:
    """Fit the phase response phi(A) = sum b_k A^k on the restricted drive range"""
    _check_dataset(dataset, PHASE)
    if not (np.any(dataset.drives > 0.9) and np.any(dataset.drives < 0.3)):
        raise InsufficientRangeCoverage(
            "Phase calibration needs points above A=0.9 and below A=0.3"
        )

    low, high = fit_range
    mask = (dataset.drives >= low) & (dataset.drives <= high)
    if mask.sum() < order:
        raise InsufficientRangeCoverage(
            f"Only {int(mask.sum())} points inside the fit range {low}-{high}"
        )

    drives, values = dataset.drives[mask], dataset.values[mask]
    coefficients = _lstsq_no_constant(drives, values, range(1, order + 1))
    transfer = PolynomialTransfer(coefficients, PHASE)
    residuals = values - transfer.raw(drives)
    transfer.residual_rms = float(np.sqrt(np.mean(residuals ** 2)))

    logger.info(f"Fitted order-{order} phase response, residual rms {transfer.residual_rms:.3g}")
    return transfer


def evaluate(transfer: PolynomialTransfer, x):
    """Odd (amplitude) or even (phase) extension of f with |x| clipped to 1"""
    x = np.asarray(x, dtype=float)
    response = transfer.raw(np.minimum(np.abs(x), 1.0))
    if transfer.kind == AMPLITUDE:
        response = np.sign(x) * response
    return _as_output(response)


def compute_a_corr(transfer: PolynomialTransfer) -> float:
    """Largest correctable output amplitude, y(1) for a unit-slope response"""
    _check_kind(transfer, AMPLITUDE)
    return float(transfer.raw(1.0))


def _bisect_inverse(transfer: PolynomialTransfer, targets: np.ndarray,
                    tolerance: float) -> np.ndarray:
    """Vectorized bisection for f(g) = u on [0, 1]"""
    lo = np.zeros_like(targets)
    hi = np.ones_like(targets)
    for _ in range(max(1, math.ceil(math.log2(1.0 / tolerance)) + 1)):
        mid = 0.5 * (lo + hi)
        above = transfer.raw(mid) > targets
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def invert(transfer: PolynomialTransfer, tolerance: float = Config.INVERSION_TOLERANCE,
           grid_points: Optional[int] = None) -> PredistortionMap:
    """Numerically invert a monotone amplitude response

    Scalars are solved with Brent's method and arrays with a fixed-depth
    bisection, both to `tolerance` in drive. With `grid_points` the inverse is
    instead tabulated once and read through a Hermite spline whose knot slopes
    are the exact 1/f'(g).
    """
    _check_kind(transfer, AMPLITUDE)
    if not is_monotone(transfer):
        raise NonMonotonicTransfer("Amplitude transfer is not strictly increasing on [0, 1]")

    a_corr = compute_a_corr(transfer)

    def solve_scalar(u: float) -> float:
        if u <= 0:
            return 0.0
        if u >= a_corr:
            return 1.0
        return optimize.brentq(lambda g: transfer.raw(g) - u, 0.0, 1.0, xtol=tolerance)

    table = None
    if grid_points:
        knots = np.linspace(0.0, 1.0, grid_points)
        table = interpolate.CubicHermiteSpline(
            transfer.raw(knots), knots, 1.0 / transfer.derivative(knots)
        )

    def clamped(u: np.ndarray) -> np.ndarray:
        targets = np.clip(u, 0.0, a_corr)
        if table is not None:
            g = np.clip(table(targets), 0.0, 1.0)
        else:
            g = _bisect_inverse(transfer, targets, tolerance)
        g[u <= 0] = 0.0
        g[u >= a_corr] = 1.0
        return g

    def inverse(u):
        u = np.asarray(u, dtype=float)
        magnitude = np.abs(u)
        if u.ndim == 0 and not grid_points:
            return math.copysign(solve_scalar(float(magnitude)), float(u)) if u else 0.0
        g = clamped(np.atleast_1d(magnitude))
        return _as_output(np.sign(u) * g.reshape(u.shape))

    logger.debug(f"Built predistortion map with a_corr={a_corr:.6f}")
    return PredistortionMap(inverse, a_corr, transfer)


def predistortion_curve(dpd_map: PredistortionMap, n_points: int = 101) -> pd.DataFrame:
    """Tabulate target u, predistorted drive g(u) and linearized output f(g(u))"""
    targets = np.linspace(0.0, 1.0, n_points)
    drives = np.asarray(dpd_map(targets))
    outputs = evaluate(dpd_map.source, drives)
    return pd.DataFrame({'target': targets, 'drive': drives, 'output': outputs})


@lru_cache(maxsize=None)
def reference_gamma(a_corr: float = Config.REFERENCE_A_CORR) -> float:
    """Saturation constant with tanh(gamma)/gamma = a_corr"""
    return optimize.brentq(lambda g: math.tanh(g) / g - a_corr, 1e-3, 20.0, xtol=1e-15)


def reference_amplitude(a, a_corr: float = Config.REFERENCE_A_CORR):
    """Generating curve of the reference modulator, y(A) = tanh(gamma A) / gamma"""
    gamma = reference_gamma(a_corr)
    return np.tanh(gamma * np.asarray(a, dtype=float)) / gamma


@lru_cache(maxsize=None)
def reference_model(a_corr: float = Config.REFERENCE_A_CORR,
                    phase_at_full_drive: float = Config.REFERENCE_PHASE_AT_FULL_DRIVE,
                    ) -> Tuple[PolynomialTransfer, PolynomialTransfer]:
    """Synthetic AOM with the calibration-run mean endpoints

    The amplitude is a saturating tanh response fitted with unit slope held
    fixed at the origin; the phase is quadratic in the drive.
    """
    drives = np.linspace(0.0, 1.0, Config.REFERENCE_FIT_POINTS)
    target = reference_amplitude(drives, a_corr)

    order = Config.AMPLITUDE_ORDER
    higher = _lstsq_no_constant(drives, target - drives, range(2, order + 1))
    amplitude = PolynomialTransfer(np.r_[1.0, higher], AMPLITUDE)
    amplitude.residual_rms = float(np.sqrt(np.mean((target - amplitude.raw(drives)) ** 2)))

    phase_data = CalibrationDataset(drives, phase_at_full_drive * drives ** 2, PHASE)
    phase = fit_phase(phase_data)
    return amplitude, phase


def sample_calibration(transfer: PolynomialTransfer, drives: Sequence[float],
                       noise: float = 0.0,
                       rng: Optional[np.random.Generator] = None) -> CalibrationDataset:
    """Synthetic calibration samples of a transfer model with Gaussian noise"""
    drives = np.asarray(drives, dtype=float)
    values = np.asarray(evaluate(transfer, drives), dtype=float)
    if noise > 0:
        if rng is None:
            raise InvalidCalibrationData("A seeded generator is required for noisy samples")
        values = values + rng.normal(0.0, noise, size=values.shape)
    if transfer.kind == AMPLITUDE:
        values = np.maximum(values, 0.0)
    return CalibrationDataset(drives, values, transfer.kind)


def fit_calibration(dataset: CalibrationDataset, order: Optional[int] = None) -> PolynomialTransfer:
    """Normalize and fit amplitude data, or fit phase data, by dataset kind"""
    if dataset.kind == AMPLITUDE:
        return fit_amplitude(normalize_unit_slope(dataset), order or Config.AMPLITUDE_ORDER)
    return fit_phase(dataset, order or Config.PHASE_ORDER)


def stability_stats(runs: List[PolynomialTransfer], summary: Optional[str] = None,
                    n_points: int = Config.STABILITY_GRID_POINTS) -> StabilityReport:
    """Mean and spread of y(1) or phi(1) across repeated calibration runs"""
    if len(runs) < 2:
        raise InvalidCalibrationData("Stability statistics need at least two runs")

    kind = runs[0].kind
    if any(run.kind != kind for run in runs):
        raise KindMismatch("All calibration runs must share one kind")
    expected = 'y(1)' if kind == AMPLITUDE else 'phi(1)'
    if summary is not None and summary != expected:
        raise KindMismatch(f"Summary {summary} does not match {kind} runs")

    grid = np.linspace(0.0, 1.0, n_points)
    curves = np.array([evaluate(run, grid) for run in runs])
    mean_curve = curves.mean(axis=0)
    spread = curves.std(axis=0, ddof=1)

    report = StabilityReport(
        per_run=[float(run.raw(1.0)) for run in runs],
        grid=grid,
        lower=mean_curve - spread,
        upper=mean_curve + spread,
        summary=expected
    )
    logger.info(f"{report.n_runs} runs: {expected} = {report.mean:.4f} +/- {report.sigma:.4f}")
    return report
