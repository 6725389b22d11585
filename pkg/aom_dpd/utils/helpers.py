from typing import Any, Dict

import numpy as np


def db(power, floor_db: float = -400.0):
    """Power ratio in dB, floored so zero power stays finite"""
    power = np.asarray(power, dtype=float)
    with np.errstate(divide='ignore'):
        out = 10 * np.log10(power)
    out = np.maximum(out, floor_db)
    return float(out) if out.ndim == 0 else out


def success_response(data: Any = None, message: str = None) -> Dict:
    """Create success report"""
    response = {'success': True}
    if data is not None:
        response['data'] = data
    if message:
        response['message'] = message
    return response
