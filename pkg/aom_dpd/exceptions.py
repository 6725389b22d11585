class AomDpdError(Exception):
    """Base error for the predistortion toolkit"""
    exit_code = 1


class InputError(AomDpdError):
    """Bad input data, parameters or configuration"""
    exit_code = 2


class NumericalError(AomDpdError):
    """A numerical procedure could not produce a trustworthy result"""
    exit_code = 3


# Input errors
class InvalidCalibrationData(InputError):
    pass


class InsufficientLowAmplitudeData(InputError):
    pass


class InsufficientRangeCoverage(InputError):
    pass


class NonMonotonicFit(InputError):
    """Fitted amplitude response is not strictly increasing on [0, 1]"""


class NonMonotonicTransfer(InputError):
    """Amplitude transfer cannot be inverted"""


class KindMismatch(InputError):
    pass


class UndersampledSpec(InputError):
    pass


class UndersampledBeat(InputError):
    pass


class ComplexEnvelopeUnsupported(InputError):
    pass


class ResolutionTooCoarse(InputError):
    pass


class InvalidGateTones(InputError):
    pass


class UncalibratedSpectrum(InputError):
    pass


class DegenerateScan(InputError):
    pass


class UnderdeterminedFit(InputError):
    pass


class InvalidRecord(InputError):
    pass


class ConfigError(InputError):
    pass


# Numerical errors
class NonPositiveDefiniteHessian(NumericalError):
    pass


class BudgetNotCrossed(NumericalError):
    pass


class ThresholdNotBracketed(NumericalError):
    pass
