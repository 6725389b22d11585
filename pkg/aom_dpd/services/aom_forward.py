import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import interpolate

from aom_dpd.config import Config
from aom_dpd.exceptions import ConfigError, KindMismatch
from aom_dpd.models.transfer import AMPLITUDE, PHASE, PolynomialTransfer, PredistortionMap
from aom_dpd.models.waveform import EfficiencyCurve, GateSpec, IQWaveform, OpticalWaveform
from aom_dpd.services.transfer_model import compute_a_corr, evaluate
from aom_dpd.services.waveform_synth import predistort, synth_cardioid

logger = logging.getLogger(__name__)


def forward(waveform: IQWaveform, amp: PolynomialTransfer,
            phase: Optional[PolynomialTransfer] = None) -> OpticalWaveform:
    """Memoryless AOM: y = f_AM(|x|) exp[i(arg x + f_PM(|x|))], |x| clipped to 1"""
    if amp.kind != AMPLITUDE:
        raise KindMismatch(f"Amplitude model has kind {amp.kind}")
    if phase is not None and phase.kind != PHASE:
        raise KindMismatch(f"Phase model has kind {phase.kind}")

    x = waveform.samples
    magnitude = np.minimum(np.abs(x), 1.0)
    argument = np.angle(x)
    if phase is not None:
        argument = argument + phase.raw(magnitude)

    samples = amp.raw(magnitude) * np.exp(1j * argument)
    models = {'amplitude': amp.to_dict(), 'phase': phase.to_dict() if phase else None}
    return OpticalWaveform(waveform.sample_rate, samples, waveform.spec, waveform.dpd, models)


def eta_instant(a, amp: PolynomialTransfer, eta_ref: float = Config.ETA_REF):
    """Static diffraction efficiency eta_ref y(A)^2 / y(1)^2"""
    reference = compute_a_corr(amp)
    value = eta_ref * np.square(evaluate(amp, a)) / reference ** 2
    return float(value) if np.ndim(value) == 0 else value


def eta_instant_curve(amp: PolynomialTransfer, drives: Sequence[float],
                      eta_ref: float = Config.ETA_REF) -> pd.DataFrame:
    drives = np.asarray(drives, dtype=float)
    return pd.DataFrame({'a': drives, 'eta': eta_instant(drives, amp, eta_ref)})


def eta_bar(waveform: IQWaveform, amp: PolynomialTransfer,
            eta_ref: float = Config.ETA_REF) -> float:
    """Time-averaged efficiency eta_ref mean|f_AM(w)|^2 / |f_AM(1)|^2"""
    if waveform.spec is not None:
        periods = len(waveform) * waveform.spec.xi0 / waveform.sample_rate
        if abs(periods - round(periods)) > 1e-6 or round(periods) < 1:
            raise ConfigError(f"Waveform covers {periods:.6g} gate periods, not an integer")

    p_gate = np.mean(np.square(evaluate(amp, np.abs(waveform.samples))))
    p_ref = compute_a_corr(amp) ** 2
    return float(eta_ref * p_gate / p_ref)


def _interpolator(drives: np.ndarray, values: np.ndarray, label: str):
    spline = interpolate.CubicSpline(drives, values, bc_type='natural')
    fine = np.linspace(drives[0], drives[-1], 10 * len(drives))
    if np.all(np.diff(spline(fine)) >= 0):
        return spline, 'cubic-spline'

    logger.warning(f"Cubic spline of the {label} efficiency curve is not monotone; using PCHIP")
    return interpolate.PchipInterpolator(drives, values), 'pchip'


def eta_bar_grid(amp: PolynomialTransfer, dpd_map: PredistortionMap,
                 drives: Optional[Sequence[float]] = None, spec: Optional[GateSpec] = None,
                 sample_rate: float = Config.ETA_SAMPLE_RATE,
                 n_points: int = Config.ETA_GRID_POINTS,
                 eta_ref: float = Config.ETA_REF) -> EfficiencyCurve:
    """Tabulate eta_bar(A) with and without predistortion over a drive grid"""
    drives = np.linspace(0.0, 1.0, n_points) if drives is None else np.asarray(drives, dtype=float)
    spec = spec or GateSpec.cardioid()

    # the normalized envelope is linear in A, so one unit-peak period serves every grid point
    unit = synth_cardioid(spec.with_changes(drive_amplitude=1.0), sample_rate, n_periods=1)

    nodpd, dpd = [], []
    for a in drives:
        target = unit.replace(unit.samples * a)
        nodpd.append(eta_bar(target, amp, eta_ref))
        dpd.append(eta_bar(predistort(target, dpd_map), amp, eta_ref))

    nodpd, dpd = np.array(nodpd), np.array(dpd)
    spline_off, method_off = _interpolator(drives, nodpd, 'uncorrected')
    spline_on, method_on = _interpolator(drives, dpd, 'predistorted')
    method = method_off if method_off == method_on else 'mixed'

    logger.debug(f"Tabulated eta_bar on {len(drives)} drive amplitudes ({method})")
    return EfficiencyCurve(drives, nodpd, dpd, {False: spline_off, True: spline_on}, method)


def eta_corr(curve: EfficiencyCurve, a_corr: float) -> Tuple[float, float]:
    """Efficiencies at the maximum correctable amplitude (no DPD, DPD)"""
    return curve(a_corr, dpd=False), curve(a_corr, dpd=True)
