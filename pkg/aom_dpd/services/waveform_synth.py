import logging

import numpy as np

from aom_dpd.config import Config
from aom_dpd.exceptions import (
    ComplexEnvelopeUnsupported,
    ConfigError,
    InvalidRecord,
    UndersampledSpec,
)
from aom_dpd.models.transfer import PredistortionMap
from aom_dpd.models.waveform import GateSpec, IQWaveform
from aom_dpd.utils.validators import validate_gate_parameters, validate_tones

logger = logging.getLogger(__name__)


def sample_count(spec: GateSpec, sample_rate: float, n_periods: int) -> int:
    """Number of samples covering n_periods gate periods"""
    return int(round(n_periods * sample_rate / spec.xi0))


def tone_phase(frequency: float, n_samples: int, sample_rate: float) -> np.ndarray:
    """2 pi f t on sample k, reduced modulo one cycle before scaling"""
    k = np.arange(n_samples, dtype=float)
    return 2 * np.pi * (np.mod(frequency * k, sample_rate) / sample_rate)


def synth_cardioid(spec: GateSpec, sample_rate: float = Config.SAMPLE_RATE,
                   n_periods: int = 1) -> IQWaveform:
    """Sample the double-sideband multi-tone envelope of a gate

    Each tone (n, r, phi) contributes lines at +/-(nu + n xi0) carrying r e^{+/-i phi},
    so the envelope is sum 2 r cos(2 pi (nu + n xi0) t + phi) and Q is zero.
    The record is peak-normalized to the spec's drive amplitude.
    """
    error = (validate_gate_parameters(spec.nu, spec.xi0, spec.drive_amplitude)
             or validate_tones(spec.tones))
    if error:
        raise ConfigError(error)
    if n_periods < 1 or int(n_periods) != n_periods:
        raise ConfigError(f"n_periods must be a positive integer, got {n_periods}")

    highest = spec.frequency(spec.n_max)
    if sample_rate <= 4 * highest:
        raise UndersampledSpec(
            f"Sample rate {sample_rate:.4g} Hz must exceed 4 x {highest:.4g} Hz "
            "to leave room for the tones and their IM3 products"
        )

    n_samples = sample_count(spec, sample_rate, int(n_periods))
    envelope = np.zeros(n_samples)
    for tone in spec.tones:
        envelope += 2 * tone.r * np.cos(
            tone_phase(spec.frequency(tone.n), n_samples, sample_rate) + tone.phase
        )

    waveform = IQWaveform(sample_rate, envelope + 0j, spec, dpd=False)
    logger.debug(f"Synthesized {n_samples} samples over {n_periods} gate periods")
    return normalize_peak(waveform, spec.drive_amplitude)


def normalize_peak(waveform: IQWaveform, amplitude: float) -> IQWaveform:
    """Globally rescale so max |I + iQ| equals amplitude"""
    peak = waveform.peak
    if peak == 0:
        raise InvalidRecord("Cannot normalize an all-zero waveform")
    return waveform.replace(waveform.samples * (amplitude / peak))


def predistort(waveform: IQWaveform, dpd_map: PredistortionMap) -> IQWaveform:
    """Apply s -> sign(s) g(|s|) to every sample of a real envelope"""
    if not waveform.is_real():
        raise ComplexEnvelopeUnsupported(
            "Amplitude-only predistortion needs a real envelope (Q = 0)"
        )
    if waveform.peak > 1.0 + 1e-12:
        raise InvalidRecord(f"Waveform peak {waveform.peak:.6g} exceeds full drive")

    drive = np.asarray(dpd_map(waveform.i), dtype=float)
    clamped = int(np.count_nonzero(np.abs(waveform.i) >= dpd_map.a_corr))
    if clamped:
        logger.debug(f"{clamped} samples above a_corr={dpd_map.a_corr:.4f} clamped to full drive")
    return waveform.replace(drive + 0j, dpd=True)
