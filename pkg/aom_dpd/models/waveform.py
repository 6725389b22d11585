from typing import Callable, Dict, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from aom_dpd.config import Config


class Tone(NamedTuple):
    """One drive tone at harmonic n of the gate detuning"""
    n: int
    r: float
    phase: float = 0.0


class GateSpec:
    """Multi-tone gate definition in the carrier rotating frame"""

    def __init__(self, nu: float, xi0: float, tones: Sequence[Tone],
                 drive_amplitude: float = Config.DRIVE_AMPLITUDE, dpd: bool = False):
        self.nu = float(nu)
        self.xi0 = float(xi0)
        self.tones = [Tone(*tone) for tone in tones]
        self.drive_amplitude = float(drive_amplitude)
        self.dpd = bool(dpd)

    @classmethod
    def cardioid(cls, nu: float = Config.NU, xi0: float = Config.XI0,
                 drive_amplitude: float = Config.DRIVE_AMPLITUDE, dpd: bool = False) -> 'GateSpec':
        """Cardioid(1,2): tones at xi0 and 2 xi0 with the relative pi phase carried as a sign"""
        return cls(nu, xi0, [Tone(1, 1.0, 0.0), Tone(2, -1.0, 0.0)], drive_amplitude, dpd)

    @property
    def gate_period(self) -> float:
        return 1.0 / self.xi0

    @property
    def n_max(self) -> int:
        return max(tone.n for tone in self.tones)

    def frequency(self, n: int) -> float:
        """Upper-sideband tone frequency nu + n xi0"""
        return self.nu + n * self.xi0

    def with_changes(self, **changes) -> 'GateSpec':
        fields = {
            'nu': self.nu,
            'xi0': self.xi0,
            'tones': self.tones,
            'drive_amplitude': self.drive_amplitude,
            'dpd': self.dpd
        }
        fields.update(changes)
        return GateSpec(**fields)

    def to_dict(self) -> Dict:
        return {
            'nu': self.nu,
            'xi0': self.xi0,
            'tones': [tone._asdict() for tone in self.tones],
            'drive_amplitude': self.drive_amplitude,
            'dpd': self.dpd
        }


class IQWaveform:
    """Sampled complex envelope I + iQ of a gate"""

    def __init__(self, sample_rate: float, samples, spec: Optional[GateSpec] = None,
                 dpd: bool = False):
        self.sample_rate = float(sample_rate)
        self.samples = np.asarray(samples, dtype=complex)
        self.spec = spec
        self.dpd = bool(dpd)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate

    @property
    def i(self) -> np.ndarray:
        return self.samples.real

    @property
    def q(self) -> np.ndarray:
        return self.samples.imag

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if len(self.samples) else 0.0

    def is_real(self, tolerance: float = Config.REAL_ENVELOPE_TOLERANCE) -> bool:
        """Real-envelope test max|Q| < tolerance * max|I|"""
        return bool(np.max(np.abs(self.q), initial=0.0)
                    <= tolerance * np.max(np.abs(self.i), initial=0.0))

    def replace(self, samples, dpd: Optional[bool] = None) -> 'IQWaveform':
        return IQWaveform(self.sample_rate, samples, self.spec,
                          self.dpd if dpd is None else dpd)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.times, 'i': self.i, 'q': self.q})

    def to_dict(self) -> Dict:
        return {
            'sample_rate': self.sample_rate,
            'dpd': self.dpd,
            'spec': self.spec.to_dict() if self.spec else None,
            'samples': [[float(s.real), float(s.imag)] for s in self.samples]
        }


class OpticalWaveform:
    """Optical field-amplitude envelope leaving the modulator"""

    def __init__(self, sample_rate: float, samples, spec: Optional[GateSpec] = None,
                 dpd: bool = False, models: Optional[Dict] = None):
        self.sample_rate = float(sample_rate)
        self.samples = np.asarray(samples, dtype=complex)
        self.spec = spec
        self.dpd = bool(dpd)
        self.models = models or {}

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate

    @property
    def drive_amplitude(self) -> Optional[float]:
        return self.spec.drive_amplitude if self.spec else None

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


class EfficiencyCurve:
    """Time-averaged diffraction efficiency versus target drive amplitude"""

    def __init__(self, drives, eta_nodpd, eta_dpd, interpolators: Dict[bool, Callable],
                 method: str = 'cubic-spline'):
        self.drives = np.asarray(drives, dtype=float)
        self.eta_nodpd = np.asarray(eta_nodpd, dtype=float)
        self.eta_dpd = np.asarray(eta_dpd, dtype=float)
        self.interpolators = interpolators
        self.method = method

    def __call__(self, a, dpd: bool = False):
        value = np.asarray(self.interpolators[bool(dpd)](a), dtype=float)
        return float(value) if value.ndim == 0 else value

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'a': self.drives,
            'eta_bar_nodpd': self.eta_nodpd,
            'eta_bar_dpd': self.eta_dpd
        })
