from typing import Dict, NamedTuple, Optional

import numpy as np

BLUE = 'blue'
RED = 'red'
SIDEBANDS = (BLUE, RED)

PEAK_SEARCH = 'peak-search'
DIRECT_SAMPLE = 'direct-sample'


class BeatRecord:
    """Real heterodyne beat voltage record"""

    def __init__(self, sample_rate: float, samples, f_det: float, spec=None):
        self.sample_rate = float(sample_rate)
        self.samples = np.asarray(samples, dtype=float)
        self.f_det = float(f_det)
        self.spec = spec

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def mean_square(self) -> float:
        return float(np.mean(self.samples ** 2))


class PSD:
    """One-sided power spectrum; an on-bin sinusoid of amplitude a reads a^2/2"""

    def __init__(self, frequencies, power, enbw_bins: float):
        self.frequencies = np.asarray(frequencies, dtype=float)
        self.power = np.asarray(power, dtype=float)
        self.enbw_bins = float(enbw_bins)

    @property
    def resolution(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    @property
    def total_power(self) -> float:
        """Window-corrected total power, comparable to the record's mean square"""
        return float(np.sum(self.power) / self.enbw_bins)

    def bin_of(self, frequency: float) -> int:
        return int(np.clip(np.round(frequency / self.resolution), 0, len(self.power) - 1))


class ToneMeasurement(NamedTuple):
    power_db: float
    freq_error: float
    snr_db: float
    valid: bool
    method: str

    def to_dict(self) -> Dict:
        return {
            'power_db': self.power_db,
            'freq_error_hz': self.freq_error,
            'snr_db': self.snr_db,
            'valid': self.valid,
            'method': self.method
        }


class ToneReport:
    """Per-harmonic tone powers of one sideband group

    Powers are in dB relative to the strongest tone of the record;
    `reference_db` holds that reference in absolute dB so reports from
    different records can be compared.
    """

    def __init__(self, sideband: str, tones: Dict[int, ToneMeasurement],
                 reference_db: float = 0.0, noise_floor_db: Optional[float] = None):
        self.sideband = sideband
        self.tones = dict(tones)
        self.reference_db = float(reference_db)
        self.noise_floor_db = noise_floor_db

    def __getitem__(self, n: int) -> ToneMeasurement:
        return self.tones[n]

    def power_db(self, n: int) -> float:
        return self.tones[n].power_db

    def absolute_db(self, n: int) -> float:
        return self.tones[n].power_db + self.reference_db

    def to_dict(self) -> Dict:
        return {
            'sideband': self.sideband,
            'reference_db': self.reference_db,
            'noise_floor_db': self.noise_floor_db,
            'tones': {str(n): tone.to_dict() for n, tone in sorted(self.tones.items())}
        }
