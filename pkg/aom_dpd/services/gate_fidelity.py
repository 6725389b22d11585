"""Phase-space description of a multi-tone Molmer-Sorensen gate.

Time enters through s = xi0 t, so one gate period is s in [0, 1]. For a tone
(n, r, phi) with n >= 1 and K = sqrt(2) eta Omega / (2 pi xi0):

    F(s) = -K sum (r/n) sin(2 pi n s + phi)
    G(s) =  K sum (r/n) [1 - cos(2 pi n s + phi)]

and an n = 0 tone adds the linearly growing F0 = -sqrt(2) eta Omega r0 cos(phi0) t.
"""
import logging
import math
from typing import Dict, Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import integrate, optimize

from aom_dpd.config import Config
from aom_dpd.exceptions import (
    ConfigError,
    InvalidGateTones,
    ThresholdNotBracketed,
    UncalibratedSpectrum,
)
from aom_dpd.models.fidelity import DriveSpectrum, FidelityEstimate, PhaseSpaceOutcome
from aom_dpd.models.spectrum import ToneReport
from aom_dpd.models.waveform import Tone

logger = logging.getLogger(__name__)

INFIDELITY_FLOOR = 1e-300


def calibrate_omega(spectrum: DriveSpectrum) -> float:
    """Rabi frequency that gives a maximally entangling gate from the designed tones only"""
    present = {tone.n for tone in spectrum.gate_tones}
    if present != {1, 2}:
        raise InvalidGateTones("Gate tones n=1 and n=2 are both required to calibrate Omega")
    norm = spectrum.gate_norm
    if norm <= 0:
        raise InvalidGateTones("Gate tones carry no power")
    return math.pi * spectrum.xi0 / spectrum.eta_ld / math.sqrt(norm)


def _require_omega(spectrum: DriveSpectrum):
    if not spectrum.is_calibrated:
        raise UncalibratedSpectrum("Calibrate Omega before evaluating the trajectory")


def _coupling(spectrum: DriveSpectrum) -> float:
    return math.sqrt(2) * spectrum.eta_ld * spectrum.omega / (2 * math.pi * spectrum.xi0)


def _trajectory_s(spectrum: DriveSpectrum, s):
    """(F, G) at normalized time s"""
    s = np.asarray(s, dtype=float)
    k = _coupling(spectrum)
    f = np.zeros_like(s)
    g = np.zeros_like(s)
    for tone in spectrum.tones:
        if tone.n == 0:
            f = f - k * 2 * math.pi * tone.r * math.cos(tone.phase) * s
            continue
        angle = 2 * math.pi * tone.n * s + tone.phase
        f = f - k * tone.r / tone.n * np.sin(angle)
        g = g + k * tone.r / tone.n * (1 - np.cos(angle))
    return f, g


def _g_rate(spectrum: DriveSpectrum, s):
    """dG/ds"""
    k = _coupling(spectrum)
    rate = np.zeros_like(np.asarray(s, dtype=float))
    for tone in spectrum.tones:
        if tone.n:
            rate = rate + k * 2 * math.pi * tone.r * np.sin(2 * math.pi * tone.n * s + tone.phase)
    return rate


def trajectory(spectrum: DriveSpectrum, t):
    """Phase-space coordinates (F(t), G(t))"""
    _require_omega(spectrum)
    f, g = _trajectory_s(spectrum, np.asarray(t, dtype=float) * spectrum.xi0)
    if np.ndim(f) == 0:
        return float(f), float(g)
    return f, g


def geometric_phase(spectrum: DriveSpectrum, t_gate: Optional[float] = None,
                    rtol: float = Config.QUADRATURE_RTOL) -> float:
    """Phi = -integral of F dG from 0 to t_gate by adaptive quadrature"""
    _require_omega(spectrum)
    end = spectrum.xi0 * (t_gate if t_gate is not None else spectrum.gate_period)
    if not any(tone.r for tone in spectrum.tones):
        return 0.0

    def integrand(s):
        return -_trajectory_s(spectrum, s)[0] * _g_rate(spectrum, s)

    # the integrand is a trigonometric polynomial; subdivide at whole periods
    points = np.arange(1, math.ceil(end))
    value, _ = integrate.quad(integrand, 0.0, end, epsabs=1e-14, epsrel=rtol, limit=500,
                              points=points if len(points) else None)
    return float(value)


def closed_form_phase(spectrum: DriveSpectrum) -> float:
    """Phi(T_g) = K^2 pi sum over equal-harmonic pairs r_i r_j cos(phi_i - phi_j) / n"""
    _require_omega(spectrum)
    if any(tone.n == 0 for tone in spectrum.tones):
        raise ConfigError("The closed form covers integer harmonics n >= 1 only")

    k = _coupling(spectrum)
    total = 0.0
    for first in spectrum.tones:
        for second in spectrum.tones:
            if first.n == second.n:
                total += first.r * second.r * math.cos(first.phase - second.phase) / first.n
    return k ** 2 * math.pi * total


def outcome(spectrum: DriveSpectrum) -> PhaseSpaceOutcome:
    """F, G and Phi at the end of one gate period"""
    f, g = trajectory(spectrum, spectrum.gate_period)
    return PhaseSpaceOutcome(f, g, geometric_phase(spectrum))


def phase_space_trace(spectrum: DriveSpectrum,
                      n_samples: int = Config.TRACE_SAMPLES) -> PhaseSpaceOutcome:
    """Uniformly sampled trajectory over one gate period"""
    _require_omega(spectrum)
    times = np.linspace(0.0, spectrum.gate_period, n_samples)
    f_trace, g_trace = _trajectory_s(spectrum, np.linspace(0.0, 1.0, n_samples))
    end = outcome(spectrum)
    # the last sample is the exact endpoint
    f_trace[-1], g_trace[-1] = end.f, end.g
    return PhaseSpaceOutcome(end.f, end.g, end.phi, times, f_trace, g_trace)


def fidelity(result: PhaseSpaceOutcome, nbar: float = Config.NBAR) -> FidelityEstimate:
    """Bell-state fidelity for a thermal mode with mean phonon number nbar"""
    weight = (nbar + 0.5) * (result.f ** 2 + result.g ** 2)
    value = ((3 + math.exp(-4 * weight)) / 8
             + math.exp(-weight) / 2 * math.sin(result.phi + result.f * result.g / 2) ** 2)
    return FidelityEstimate(min(max(value, 0.0), 1.0), nbar, inputs=result)


def spectrum_from_tones(powers_db: Dict[int, float], xi0: float = Config.XI0,
                        eta_ld: float = Config.ETA_LD,
                        im_phases: Optional[Dict[int, float]] = None) -> DriveSpectrum:
    """Calibrated drive spectrum from per-harmonic tone powers

    Amplitudes are scaled so |r1| = 1 and the Cardioid signs are applied;
    the gate tones are then renormalized to sum r^2/n = 1 while the IM
    tones keep their size relative to |r1|. IM phases follow the
    compressive cubic unless overridden.
    """
    im_phases = Config.IM_PHASES if im_phases is None else im_phases
    for n in (1, 2):
        if n not in powers_db or not math.isfinite(powers_db[n]):
            raise InvalidGateTones(f"Gate tone n={n} is missing")

    amplitudes = {n: math.sqrt(10 ** (p / 10)) if math.isfinite(p) else 0.0
                  for n, p in powers_db.items()}
    r1 = amplitudes[1]
    if r1 <= 0:
        raise InvalidGateTones("Gate tone n=1 carries no power")

    gate = [Tone(1, 1.0, 0.0), Tone(2, -amplitudes[2] / r1, 0.0)]
    scale = math.sqrt(sum(tone.r ** 2 / tone.n for tone in gate))
    tones = [Tone(tone.n, tone.r / scale, tone.phase) for tone in gate]
    for n, amplitude in sorted(amplitudes.items()):
        if n not in (1, 2) and amplitude > 0:
            tones.append(Tone(n, amplitude / r1, im_phases.get(n, 0.0)))

    spectrum = DriveSpectrum(tones, xi0, eta_ld)
    return spectrum.calibrated(calibrate_omega(spectrum))


def _report_fidelity(report: ToneReport, nbar: float, im_phases, xi0: float,
                     eta_ld: float) -> float:
    for n in (1, 2):
        if n not in report.tones or not report[n].valid:
            raise InvalidGateTones(f"{report.sideband} gate tone n={n} failed validation")
    powers = {n: tone.power_db for n, tone in report.tones.items()}
    spectrum = spectrum_from_tones(powers, xi0, eta_ld, im_phases)
    return fidelity(outcome(spectrum), nbar).value


def estimate_from_tones(reports: Union[ToneReport, Iterable[ToneReport]],
                        nbar: float = Config.NBAR,
                        im_phases: Optional[Dict[int, float]] = None,
                        xi0: float = Config.XI0,
                        eta_ld: float = Config.ETA_LD) -> FidelityEstimate:
    """Predicted gate fidelity from measured tone powers, averaged over sidebands"""
    if isinstance(reports, ToneReport):
        reports = [reports]
    reports = list(reports)
    if not reports:
        raise InvalidGateTones("No tone reports supplied")

    per_sideband = {report.sideband: _report_fidelity(report, nbar, im_phases, xi0, eta_ld)
                    for report in reports}
    value = float(np.mean(list(per_sideband.values())))
    return FidelityEstimate(value, nbar, per_sideband, inputs=reports)


def im_infidelity(ratio_db: float, n: int, nbar: float = Config.THRESHOLD_NBAR,
                  im_phases: Optional[Dict[int, float]] = None) -> float:
    """Infidelity of the Cardioid gate with one IM tone ratio_db below a gate tone"""
    spectrum = spectrum_from_tones({1: 0.0, 2: 0.0, n: -ratio_db}, im_phases=im_phases)
    return fidelity(outcome(spectrum), nbar).infidelity


def required_ratio(target: float, n: int, nbar: float = Config.THRESHOLD_NBAR,
                   bracket=Config.THRESHOLD_BRACKET_DB, im_phases=None,
                   scan_points: int = 41) -> float:
    """Smallest P_gate/P_IM (dB) keeping the infidelity at or below target"""
    low, high = bracket
    scan = np.linspace(low, high, scan_points)
    curve = np.array([im_infidelity(x, n, nbar, im_phases) for x in scan])
    if np.any(np.diff(curve) > 1e-12 * np.maximum(curve[:-1], 1.0)):
        raise ThresholdNotBracketed(f"Infidelity is not monotone in the n={n} IM power")
    if not curve[0] > target > curve[-1]:
        raise ThresholdNotBracketed(
            f"Target {target:g} outside [{curve[-1]:.3g}, {curve[0]:.3g}] for n={n}"
        )

    def gap(x):
        # the infidelity underflows to exactly zero for phase-cancelling IM tones
        value = max(im_infidelity(x, n, nbar, im_phases), INFIDELITY_FLOOR)
        return math.log10(value) - math.log10(target)

    return optimize.bisect(gap, low, high, xtol=1e-6)


def im_threshold_table(targets: Sequence[float] = Config.THRESHOLD_TARGETS,
                       nbar: float = Config.THRESHOLD_NBAR,
                       im_phases: Optional[Dict[int, float]] = None) -> pd.DataFrame:
    """Required gate-tone-to-IM power ratios for the n=0 and n=3 products"""
    rows = []
    for target in targets:
        rows.append({
            'infidelity': float(target),
            'n0_db': required_ratio(target, 0, nbar, im_phases=im_phases),
            'n3_db': required_ratio(target, 3, nbar, im_phases=im_phases)
        })
        logger.debug(f"Thresholds at {target:g}: {rows[-1]['n0_db']:.2f} / {rows[-1]['n3_db']:.2f} dB")
    return pd.DataFrame(rows, columns=['infidelity', 'n0_db', 'n3_db'])
