from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

AMPLITUDE = 'amplitude'
PHASE = 'phase'
KINDS = (AMPLITUDE, PHASE)


class CalibrationDataset:
    """Measured (drive, value) samples of the modulator response"""

    def __init__(self, drives: Sequence[float], values: Sequence[float], kind: str = AMPLITUDE):
        self.drives = np.asarray(drives, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.kind = kind

    def __len__(self) -> int:
        return len(self.drives)

    @classmethod
    def from_frame(cls, df: pd.DataFrame, kind: str = AMPLITUDE) -> 'CalibrationDataset':
        """Build a dataset from a `drive,value` frame"""
        return cls(df['drive'].to_numpy(), df['value'].to_numpy(), kind)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'drive': self.drives, 'value': self.values})

    def with_values(self, values) -> 'CalibrationDataset':
        return CalibrationDataset(self.drives, values, self.kind)


class PolynomialTransfer:
    """Static response f(A) = sum_k c_k A^k, k = 1..K (no constant term)"""

    def __init__(self, coefficients: Sequence[float], kind: str = AMPLITUDE,
                 residual_rms: float = 0.0):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.kind = kind
        self.residual_rms = float(residual_rms)

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def raw(self, a):
        """Evaluate the bare polynomial without clipping or symmetry"""
        # numpy polyval wants the highest power first and a zero constant term
        return np.polyval(np.r_[self.coefficients[::-1], 0.0], a)

    def derivative(self, a):
        powers = np.arange(1, self.order + 1)
        return np.polyval((powers * self.coefficients)[::-1], a)

    def to_dict(self, a_corr: Optional[float] = None) -> Dict:
        data = {
            'kind': self.kind,
            'order': self.order,
            'coefficients': [float(c) for c in self.coefficients],
            'residual_rms': self.residual_rms
        }
        if self.kind == AMPLITUDE:
            data['a_corr'] = float(self.raw(1.0)) if a_corr is None else a_corr
        return data


class PredistortionMap:
    """Inverse amplitude map g(u) clamped to full drive above a_corr"""

    def __init__(self, inverse: Callable, a_corr: float, source: PolynomialTransfer):
        self.inverse = inverse
        self.a_corr = float(a_corr)
        self.source = source

    def __call__(self, u):
        return self.inverse(u)


class StabilityReport:
    """Run-to-run spread of a calibration summary value"""

    def __init__(self, per_run: List[float], grid, lower, upper, summary: str):
        self.per_run = [float(v) for v in per_run]
        self.n_runs = len(self.per_run)
        self.mean = float(np.mean(self.per_run))
        self.sigma = float(np.std(self.per_run, ddof=1))
        self.grid = np.asarray(grid, dtype=float)
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.summary = summary

    @property
    def relative_sigma(self) -> float:
        return self.sigma / self.mean if self.mean else float('nan')

    def to_dict(self) -> Dict:
        return {
            'summary': self.summary,
            'n_runs': self.n_runs,
            'mean': self.mean,
            'sigma': self.sigma,
            'relative_sigma': self.relative_sigma,
            'per_run': self.per_run
        }

    def envelope_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'drive': self.grid, 'lower': self.lower, 'upper': self.upper})
