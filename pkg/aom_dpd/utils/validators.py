import math
from typing import Dict, Optional, Sequence

import numpy as np

from aom_dpd.models.transfer import KINDS, AMPLITUDE


def validate_calibration_data(drives: Sequence[float], values: Sequence[float],
                              kind: str) -> Optional[str]:
    """Validate calibration samples"""
    if kind not in KINDS:
        return f"Unknown calibration kind: {kind}"

    drives = np.asarray(drives, dtype=float)
    values = np.asarray(values, dtype=float)
    if drives.ndim != 1 or drives.shape != values.shape:
        return "Drives and values must be one-dimensional and of equal length"
    if len(drives) == 0:
        return "Calibration data is empty"
    if not (np.all(np.isfinite(drives)) and np.all(np.isfinite(values))):
        return "Calibration data contains non-finite values"

    if drives.min() < 0 or drives.max() > 1:
        return "Drive amplitudes must lie within [0, 1]"
    if np.any(np.diff(drives) <= 0):
        return "Drive amplitudes must be strictly increasing"

    if kind == AMPLITUDE and np.any(values < 0):
        return "Amplitude responses must be non-negative"

    return None


def validate_gate_parameters(nu: float, xi0: float, drive_amplitude: float) -> Optional[str]:
    """Validate gate frequencies and drive amplitude"""
    if xi0 <= 0:
        return "Gate detuning xi0 must be positive"
    if nu <= xi0:
        return "Motional frequency nu must exceed xi0"
    if not 0 <= drive_amplitude <= 1:
        return "Drive amplitude must lie within [0, 1]"
    return None


def validate_tones(tones: Sequence, allow_dc: bool = False) -> Optional[str]:
    """Validate (n, r, phase) tone triples"""
    if not tones:
        return "At least one tone is required"

    lowest = 0 if allow_dc else 1
    for tone in tones:
        if int(tone.n) != tone.n or tone.n < lowest:
            return f"Harmonic index must be an integer >= {lowest}, got {tone.n}"
        if not (math.isfinite(tone.r) and math.isfinite(tone.phase)):
            return f"Tone {tone.n} has a non-finite amplitude or phase"
    return None


def validate_population_counts(even_count: int, total: int) -> Optional[str]:
    """Validate a population record"""
    if total <= 0:
        return "Total shot count must be positive"
    if not 0 <= even_count <= total:
        return f"Even count {even_count} outside [0, {total}]"
    return None


def validate_parity_points(phases, even_counts, totals) -> Optional[str]:
    """Validate the points of a parity scan"""
    phases = np.asarray(phases, dtype=float)
    even_counts = np.asarray(even_counts)
    totals = np.asarray(totals)

    if not (len(phases) == len(even_counts) == len(totals)):
        return "Phase, count and total columns differ in length"
    if np.any(totals <= 0):
        return "Every phase point needs a positive shot count"
    if np.any(even_counts < 0) or np.any(even_counts > totals):
        return "Even counts must lie within [0, total]"
    if np.any(phases < 0) or np.any(phases >= 2 * np.pi):
        return "Analysis phases must lie within [0, 2pi)"
    return None


def validate_run_options(data: Dict) -> Optional[str]:
    """Cross-field checks on a loaded run configuration"""
    if data.get('noise_power', 0.0) > 0 and data.get('seed') is None:
        return "A seed is required whenever synthetic noise is enabled"
    if data.get('a_min', 0.0) >= data.get('a_max', 1.0):
        return "Sweep a_min must be below a_max"
    return None
