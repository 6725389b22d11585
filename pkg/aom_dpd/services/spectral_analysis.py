import logging
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import signal

from aom_dpd.config import Config
from aom_dpd.exceptions import (
    ConfigError,
    InvalidRecord,
    ResolutionTooCoarse,
    UndersampledBeat,
)
from aom_dpd.models.spectrum import (
    BLUE,
    DIRECT_SAMPLE,
    PEAK_SEARCH,
    RED,
    SIDEBANDS,
    PSD,
    BeatRecord,
    ToneMeasurement,
    ToneReport,
)
from aom_dpd.models.transfer import PolynomialTransfer, PredistortionMap
from aom_dpd.models.waveform import GateSpec, OpticalWaveform
from aom_dpd.services.aom_forward import forward
from aom_dpd.services.waveform_synth import predistort, synth_cardioid, tone_phase
from aom_dpd.utils.helpers import db

logger = logging.getLogger(__name__)

GATE_HARMONICS = (1, 2)
IM_HARMONICS = (0, 3)


def heterodyne_mix(opt: OpticalWaveform, f_det: float = Config.F_DET,
                   reference_amplitude: float = Config.REFERENCE_AMPLITUDE,
                   noise_power: float = 0.0,
                   rng: Optional[np.random.Generator] = None) -> BeatRecord:
    """Beat the optical envelope against a reference offset by f_det

    beat(t) = Re[y(t) e^{-i 2 pi f_det t}] * reference, so a blue tone at
    nu + n xi0 lands at f_det - (nu + n xi0) and its red partner at
    f_det + (nu + n xi0).
    """
    highest = f_det
    if opt.spec is not None:
        highest += opt.spec.frequency(3)
    if opt.sample_rate <= 2 * highest:
        raise UndersampledBeat(
            f"Sample rate {opt.sample_rate:.4g} Hz must exceed 2 x {highest:.4g} Hz"
        )

    carrier = np.exp(-1j * tone_phase(f_det, len(opt), opt.sample_rate))
    beat = np.real(opt.samples * carrier) * reference_amplitude

    if noise_power > 0:
        if rng is None:
            raise ConfigError("A seeded generator is required when noise is enabled")
        beat = beat + rng.normal(0.0, np.sqrt(noise_power), size=beat.shape)

    return BeatRecord(opt.sample_rate, beat, f_det, opt.spec)


def periodogram(record: BeatRecord,
                coefficients=Config.FLATTOP_COEFFICIENTS) -> PSD:
    """Flat-top windowed one-sided power spectrum"""
    n = len(record)
    if n < 2:
        raise InvalidRecord("Beat record is too short for a spectrum")

    window = signal.windows.general_cosine(n, coefficients, sym=False)
    frequencies, power = signal.periodogram(
        record.samples,
        fs=record.sample_rate,
        window=window,
        detrend=False,
        scaling='spectrum'
    )
    enbw_bins = n * np.sum(window ** 2) / np.sum(window) ** 2
    return PSD(frequencies, power, enbw_bins)


def expected_frequency(spec: GateSpec, n: int, f_det: float, sideband: str) -> float:
    offset = spec.frequency(n)
    return f_det - offset if sideband == BLUE else f_det + offset


def _window(psd: PSD, center: float, half_width: float) -> np.ndarray:
    return (psd.frequencies >= center - half_width) & (psd.frequencies <= center + half_width)


def noise_floor(psd: PSD, expected: Dict[int, float],
                neighborhood: float = Config.NOISE_WINDOW_HZ,
                exclusion: float = Config.NOISE_EXCLUSION_HZ) -> float:
    """Median PSD around the sideband group with the expected tones masked out"""
    center = float(np.mean(list(expected.values())))
    mask = _window(psd, center, neighborhood)
    for frequency in expected.values():
        mask &= ~_window(psd, frequency, exclusion)
    if not mask.any():
        raise ResolutionTooCoarse("No noise bins left around the sideband group")
    return float(np.median(psd.power[mask]))


def _parabolic_offset(values_db: np.ndarray, peak: int) -> float:
    """Vertex offset in bins of the parabola through three log-power bins"""
    if peak == 0 or peak == len(values_db) - 1:
        return 0.0
    alpha, beta, gamma = values_db[peak - 1:peak + 2]
    denominator = alpha - 2 * beta + gamma
    if denominator == 0:
        return 0.0
    return float(np.clip(0.5 * (alpha - gamma) / denominator, -0.5, 0.5))


def extract_tones(psd: PSD, spec: GateSpec, f_det: float = Config.F_DET,
                  sideband: str = BLUE, config=Config) -> ToneReport:
    """Read the n = 0..3 tone powers of one sideband group"""
    if sideband not in SIDEBANDS:
        raise ConfigError(f"Unknown sideband {sideband}")
    if psd.resolution > config.MAX_RESOLUTION_HZ * (1 + 1e-9):
        raise ResolutionTooCoarse(
            f"Resolution {psd.resolution:.4g} Hz exceeds {config.MAX_RESOLUTION_HZ:.4g} Hz"
        )

    floor_db = config.POWER_FLOOR_DB
    reference_db = db(np.max(psd.power), floor_db)
    power_db = db(psd.power, floor_db)

    expected = {n: expected_frequency(spec, n, f_det, sideband)
                for n in GATE_HARMONICS + IM_HARMONICS}
    noise_db = db(noise_floor(psd, expected, config.NOISE_WINDOW_HZ,
                              config.NOISE_EXCLUSION_HZ), floor_db)

    tones = {}
    for n, frequency in sorted(expected.items()):
        if n in GATE_HARMONICS:
            mask = _window(psd, frequency, config.PEAK_SEARCH_HZ)
            candidates = np.flatnonzero(mask)
            if len(candidates) == 0:
                raise ResolutionTooCoarse(f"No bins inside the search window of tone {n}")
            peak = int(candidates[np.argmax(psd.power[candidates])])
            refined = psd.frequencies[peak] + _parabolic_offset(power_db, peak) * psd.resolution
            freq_error = float(refined - frequency)
            snr = float(power_db[peak] - noise_db)
            valid = abs(freq_error) < config.MAX_FREQ_ERROR_HZ and snr > config.MIN_SNR_DB
            tones[n] = ToneMeasurement(float(power_db[peak] - reference_db), freq_error,
                                       snr, bool(valid), PEAK_SEARCH)
            if not valid:
                logger.warning(
                    f"{sideband} tone n={n} failed validation "
                    f"(freq error {freq_error:.0f} Hz, snr {snr:.1f} dB)"
                )
        else:
            index = psd.bin_of(frequency)
            snr = float(power_db[index] - noise_db)
            tones[n] = ToneMeasurement(float(power_db[index] - reference_db),
                                       float(psd.frequencies[index] - frequency),
                                       snr, snr > config.MIN_SNR_DB, DIRECT_SAMPLE)

    return ToneReport(sideband, tones, reference_db, float(noise_db - reference_db))


def power_ratios(report: ToneReport) -> Tuple[float, float]:
    """(R10, R23) = (P1 - P0, P2 - P3) in dB"""
    missing = [n for n in (0, 1, 2, 3) if n not in report.tones]
    if missing:
        raise InvalidRecord(f"Tone report lacks harmonics {missing}")
    return (report.power_db(1) - report.power_db(0),
            report.power_db(2) - report.power_db(3))


def average_sidebands(blue: ToneReport, red: ToneReport) -> Tuple[float, float]:
    """Blue/red mean of (R10, R23), averaged in dB"""
    blue_ratios = power_ratios(blue)
    red_ratios = power_ratios(red)
    return tuple(0.5 * (b + r) for b, r in zip(blue_ratios, red_ratios))


def delta_p(dpd: ToneReport, nodpd: ToneReport) -> Tuple[float, float]:
    """Gate-tone power change with predistortion, 10 log10(P_dpd / P_nodpd)"""
    if dpd.sideband != nodpd.sideband:
        raise InvalidRecord("Compare tone reports from the same sideband")
    return tuple(dpd.absolute_db(n) - nodpd.absolute_db(n) for n in GATE_HARMONICS)


def simulate_record(spec: GateSpec, amp: PolynomialTransfer,
                    phase: Optional[PolynomialTransfer] = None,
                    dpd_map: Optional[PredistortionMap] = None,
                    sample_rate: float = Config.SAMPLE_RATE,
                    n_periods: int = Config.N_PERIODS, f_det: float = Config.F_DET,
                    noise_power: float = 0.0,
                    rng: Optional[np.random.Generator] = None) -> BeatRecord:
    """Synthesize, optionally predistort, propagate and heterodyne one gate setting"""
    waveform = synth_cardioid(spec, sample_rate, n_periods)
    if spec.dpd:
        if dpd_map is None:
            raise ConfigError("Predistortion requested without a predistortion map")
        waveform = predistort(waveform, dpd_map)
    return heterodyne_mix(forward(waveform, amp, phase), f_det,
                          noise_power=noise_power, rng=rng)


def analyze_record(record: BeatRecord, spec: GateSpec, config=Config) -> Dict[str, ToneReport]:
    """Tone reports of both sideband groups of a beat record"""
    psd = periodogram(record, config.FLATTOP_COEFFICIENTS)
    return {sideband: extract_tones(psd, spec, record.f_det, sideband, config)
            for sideband in (BLUE, RED)}
