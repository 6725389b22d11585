import numpy as np
import pytest
from click.testing import CliRunner

from aom_dpd import create_app
from aom_dpd.config import TestingConfig
from aom_dpd.models.waveform import GateSpec
from aom_dpd.services.transfer_model import invert, reference_model

# coherent sampling: every gate tone, IM product and beat line falls on a bin
SAMPLE_RATE = 100e6
N_PERIODS = 40
F_DET = 20e6


@pytest.fixture(scope='session')
def amp():
    return reference_model()[0]


@pytest.fixture(scope='session')
def phase():
    return reference_model()[1]


@pytest.fixture(scope='session')
def dpd_map(amp):
    return invert(amp)


@pytest.fixture
def rng():
    return np.random.default_rng(20250)


@pytest.fixture
def spec():
    return GateSpec.cardioid(drive_amplitude=0.4)


@pytest.fixture
def sweep_options():
    """Run options as RunConfigSchema would load them, sized for tests"""
    return {
        'nu': TestingConfig.NU,
        'xi0': TestingConfig.XI0,
        'drive_amplitude': 0.4,
        'dpd': False,
        'am_pm': False,
        'a_min': 0.3,
        'a_max': 0.5,
        'n_points': 3,
        'sample_rate': SAMPLE_RATE,
        'n_periods': N_PERIODS,
        'f_det': F_DET,
        'noise_power': 0.0,
        'nbar': TestingConfig.NBAR,
        'threshold_nbar': TestingConfig.THRESHOLD_NBAR,
        'eta_ld': TestingConfig.ETA_LD,
        'eta_ref': TestingConfig.ETA_REF,
        'seed': 11,
        'workers': 1
    }


@pytest.fixture
def app():
    return create_app(TestingConfig)


@pytest.fixture
def runner(monkeypatch):
    monkeypatch.delenv('AOM_DPD_SEED', raising=False)
    monkeypatch.delenv('AOM_DPD_OUTPUT_DIR', raising=False)
    return CliRunner()
