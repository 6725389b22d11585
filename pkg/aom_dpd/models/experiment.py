from typing import Dict, List, NamedTuple, Optional

import numpy as np
import pandas as pd


class Setting(NamedTuple):
    """Drive amplitude and predistortion flag of one experimental setting"""
    a: float
    dpd: bool

    def key(self) -> str:
        return f"A={self.a:g} {'DPD' if self.dpd else 'NoDPD'}"


class PopulationRecord:
    """Even-parity shot count out of a total"""

    def __init__(self, even_count: int, total: int, setting: Optional[Setting] = None):
        self.even_count = even_count
        self.total = total
        self.setting = setting

    @classmethod
    def from_frame(cls, df: pd.DataFrame, setting: Optional[Setting] = None) -> 'PopulationRecord':
        """Sum every row of an `even_count,total` frame"""
        return cls(df['even_count'].sum().item(), df['total'].sum().item(), setting)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'even_count': [self.even_count], 'total': [self.total]})


class ParityScan:
    """Parity counts versus analysis phase"""

    def __init__(self, phases, even_counts, totals, setting: Optional[Setting] = None):
        self.phases = np.asarray(phases, dtype=float)
        self.even_counts = np.asarray(even_counts, dtype=float)
        self.totals = np.asarray(totals, dtype=float)
        self.setting = setting

    def __len__(self) -> int:
        return len(self.phases)

    @property
    def parity(self) -> np.ndarray:
        return 2 * self.even_counts / self.totals - 1

    @classmethod
    def from_frame(cls, df: pd.DataFrame, setting: Optional[Setting] = None) -> 'ParityScan':
        return cls(df['phase_rad'].to_numpy(), df['even_count'].to_numpy(),
                   df['total'].to_numpy(), setting)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'phase_rad': self.phases,
            'even_count': self.even_counts,
            'total': self.totals
        })


class ParityFit:
    """Maximum-likelihood fringe contrast and phase offset"""

    def __init__(self, contrast: float, phase: float, sigma_contrast: Optional[float] = None,
                 sigma_phase: Optional[float] = None, nll: float = float('nan')):
        self.contrast = float(contrast)
        self.phase = float(phase)
        self.sigma_contrast = sigma_contrast
        self.sigma_phase = sigma_phase
        self.nll = float(nll)

    def to_dict(self) -> Dict:
        return {
            'contrast': self.contrast,
            'phase': self.phase,
            'sigma_contrast': self.sigma_contrast,
            'sigma_phase': self.sigma_phase
        }


class GatePoint(NamedTuple):
    """Measured gate rate and Bell fidelity at one setting (rates in kHz)"""
    setting: Setting
    xi0: float
    sigma_xi0: float
    fidelity: float
    sigma_fidelity: float


class AxisFit:
    """Rate scale alpha (kHz per unit relative rate) and fidelity offset delta"""

    def __init__(self, alpha: float, delta: float, sigma_alpha: float, sigma_delta: float,
                 residuals=None):
        self.alpha = float(alpha)
        self.delta = float(delta)
        self.sigma_alpha = float(sigma_alpha)
        self.sigma_delta = float(sigma_delta)
        self.residuals = np.asarray([] if residuals is None else residuals, dtype=float)

    @property
    def chi_square(self) -> float:
        return float(np.sum(self.residuals ** 2))

    def to_dict(self) -> Dict:
        return {
            'alpha_khz': self.alpha,
            'delta': self.delta,
            'sigma_alpha': self.sigma_alpha,
            'sigma_delta': self.sigma_delta
        }


class SettingReport(NamedTuple):
    """Pooled Bell-fidelity analysis of one setting"""
    setting: Setting
    population: PopulationRecord
    parity: ParityFit
    f_pop: float
    sigma_pop: float
    fidelity: float
    sigma: float
    n_scans: int

    def to_dict(self) -> Dict:
        return {
            'a': self.setting.a,
            'dpd': self.setting.dpd,
            'even_count': int(self.population.even_count),
            'total': int(self.population.total),
            'f_pop': self.f_pop,
            'sigma_pop': self.sigma_pop,
            'contrast': self.parity.contrast,
            'sigma_contrast': self.parity.sigma_contrast,
            'fidelity': self.fidelity,
            'sigma': self.sigma,
            'n_scans': self.n_scans
        }


def reports_frame(reports: List[SettingReport]) -> pd.DataFrame:
    return pd.DataFrame([report.to_dict() for report in reports])
