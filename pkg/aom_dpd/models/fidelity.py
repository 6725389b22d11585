import math
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from aom_dpd.config import Config
from aom_dpd.models.waveform import Tone

GATE_HARMONICS = (1, 2)


class DriveSpectrum:
    """Tone content seen by the ions, in units where the gate tones carry sum r^2/n = 1"""

    def __init__(self, tones: Sequence[Tone], xi0: float = Config.XI0,
                 eta_ld: float = Config.ETA_LD, omega: Optional[float] = None):
        self.tones = [Tone(*tone) for tone in tones]
        self.xi0 = float(xi0)
        self.eta_ld = float(eta_ld)
        self.omega = omega

    @classmethod
    def cardioid(cls, xi0: float = Config.XI0, eta_ld: float = Config.ETA_LD,
                 normalized: bool = True) -> 'DriveSpectrum':
        r = 1 / math.sqrt(1.5) if normalized else 1.0
        return cls([Tone(1, r, 0.0), Tone(2, -r, 0.0)], xi0, eta_ld)

    @property
    def gate_period(self) -> float:
        return 1.0 / self.xi0

    @property
    def gate_tones(self):
        return [tone for tone in self.tones if tone.n in GATE_HARMONICS]

    @property
    def gate_norm(self) -> float:
        """sum over gate tones of r_n^2 / n"""
        return sum(tone.r ** 2 / tone.n for tone in self.gate_tones)

    @property
    def is_calibrated(self) -> bool:
        return self.omega is not None

    def with_tones(self, *tones: Tone) -> 'DriveSpectrum':
        return DriveSpectrum(self.tones + list(tones), self.xi0, self.eta_ld, self.omega)

    def calibrated(self, omega: float) -> 'DriveSpectrum':
        return DriveSpectrum(self.tones, self.xi0, self.eta_ld, omega)

    def scaled(self, factor: float) -> 'DriveSpectrum':
        tones = [Tone(tone.n, tone.r * factor, tone.phase) for tone in self.tones]
        return DriveSpectrum(tones, self.xi0, self.eta_ld, self.omega)

    def to_dict(self) -> Dict:
        return {
            'tones': [tone._asdict() for tone in self.tones],
            'xi0': self.xi0,
            'eta_ld': self.eta_ld,
            'omega': self.omega
        }


class PhaseSpaceOutcome:
    """Displacements F, G and geometric phase Phi at the end of the gate"""

    def __init__(self, f: float, g: float, phi: float, times=None, f_trace=None, g_trace=None):
        self.f = float(f)
        self.g = float(g)
        self.phi = float(phi)
        self.times = None if times is None else np.asarray(times, dtype=float)
        self.f_trace = None if f_trace is None else np.asarray(f_trace, dtype=float)
        self.g_trace = None if g_trace is None else np.asarray(g_trace, dtype=float)

    @property
    def has_trace(self) -> bool:
        return self.times is not None

    @property
    def displacement(self) -> float:
        return math.hypot(self.f, self.g)

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.times, 'f': self.f_trace, 'g': self.g_trace})

    def to_dict(self) -> Dict:
        return {'f': self.f, 'g': self.g, 'phi': self.phi, 'displacement': self.displacement}


class FidelityEstimate:
    """Bell-state fidelity predicted from a phase-space outcome or tone spectrum"""

    def __init__(self, value: float, nbar: float, per_sideband: Optional[Dict[str, float]] = None,
                 inputs: Any = None):
        self.value = float(value)
        self.nbar = float(nbar)
        self.per_sideband = dict(per_sideband or {})
        self.inputs = inputs

    @property
    def infidelity(self) -> float:
        return 1.0 - self.value

    def to_dict(self) -> Dict:
        return {
            'fidelity': self.value,
            'infidelity': self.infidelity,
            'nbar': self.nbar,
            'per_sideband': self.per_sideband
        }
