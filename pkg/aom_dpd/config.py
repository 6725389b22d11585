import math
import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    """Base configuration class"""

    # Runtime
    LOG_LEVEL = os.environ.get('LOG_LEVEL') or 'INFO'
    OUTPUT_DIR = os.environ.get('AOM_DPD_OUTPUT_DIR') or 'output'
    SEED = int(os.environ.get('AOM_DPD_SEED', 20250))
    WORKERS = int(os.environ.get('AOM_DPD_WORKERS', 4))

    # Transfer model
    AMPLITUDE_ORDER = 8
    PHASE_ORDER = 5
    PHASE_FIT_RANGE = (0.1, 1.0)
    ORIGIN_SLOPE_LIMIT = 0.2
    ORIGIN_SLOPE_MIN_POINTS = 4
    INVERSION_TOLERANCE = 1e-9
    MONOTONE_GRID_POINTS = 1001
    INVERSE_GRID_POINTS = 1001
    STABILITY_GRID_POINTS = 101

    # Reference AOM (calibration-run means)
    REFERENCE_A_CORR = 0.5655
    REFERENCE_PHASE_AT_FULL_DRIVE = 0.2776
    REFERENCE_FIT_POINTS = 2001

    # Gate waveform
    NU = 1.84e6
    XI0 = 20e3
    DRIVE_AMPLITUDE = 0.4
    SAMPLE_RATE = 1e9
    N_PERIODS = 40
    REAL_ENVELOPE_TOLERANCE = 1e-12

    # Sweep
    SWEEP_A_MIN = 0.1
    SWEEP_A_MAX = 1.0
    SWEEP_POINTS = 19
    AM_PM = True

    # Diffraction efficiency
    ETA_REF = 0.80
    ETA_GRID_POINTS = 100
    ETA_SAMPLE_RATE = 100e6

    # Heterodyne detection and tone extraction
    F_DET = 20e6
    REFERENCE_AMPLITUDE = 1.0
    # 5-term flat-top (SRS / MATLAB flattopwin coefficients)
    FLATTOP_COEFFICIENTS = (0.21557895, 0.41663158, 0.277263158, 0.083578947, 0.006947368)
    MAX_RESOLUTION_HZ = 500.0
    PEAK_SEARCH_HZ = 5e3
    MAX_FREQ_ERROR_HZ = 1e3
    MIN_SNR_DB = 20.0
    NOISE_WINDOW_HZ = 200e3
    NOISE_EXCLUSION_HZ = 2e3
    POWER_FLOOR_DB = -400.0

    # Phase-space fidelity
    NBAR = 0.1
    ETA_LD = 0.026
    THRESHOLD_NBAR = 0.0
    THRESHOLD_TARGETS = (1e-2, 1e-3, 1e-4)
    THRESHOLD_BRACKET_DB = (0.0, 80.0)
    # compressive cubic: n=0 product in phase with r1, n=3 product in antiphase
    IM_PHASES = {0: 0.0, 3: math.pi}
    QUADRATURE_RTOL = 1e-12
    TRACE_SAMPLES = 1001

    # Experiment analysis
    SHOTS = 625
    PARITY_PHASES = 16
    LIKELIHOOD_CLAMP = 1e-9
    HESSIAN_STEP = 1e-5
    PHASE_GRID_RAD = 0.01
    ANCHOR = (0.4, False)
    POWER_FLUCTUATION_DB = 0.2
    INFIDELITY_BUDGETS = (1e-2, 1e-3, 1e-4)


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = os.environ.get('LOG_LEVEL') or 'DEBUG'


class ProductionConfig(Config):
    """Production configuration"""
    WORKERS = int(os.environ.get('AOM_DPD_WORKERS', os.cpu_count() or 1))


class TestingConfig(Config):
    """Testing configuration"""
    WORKERS = 2
    SAMPLE_RATE = 100e6
    ETA_SAMPLE_RATE = 20e6
    ETA_GRID_POINTS = 40


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': Config
}
