from marshmallow import (
    Schema,
    ValidationError,
    fields,
    post_load,
    validate,
    validates_schema,
)

from aom_dpd.config import Config
from aom_dpd.models.spectrum import PEAK_SEARCH, SIDEBANDS, ToneMeasurement, ToneReport
from aom_dpd.models.transfer import KINDS, PolynomialTransfer
from aom_dpd.utils.validators import validate_run_options

positive = validate.Range(min=0, min_inclusive=False)


class TransferModelSchema(Schema):
    """Fitted model JSON {kind, order, coefficients, a_corr, residual_rms}"""
    kind = fields.String(required=True, validate=validate.OneOf(KINDS))
    order = fields.Integer(required=True, validate=validate.Range(min=1))
    coefficients = fields.List(fields.Float(), required=True)
    a_corr = fields.Float(allow_none=True, load_default=None)
    residual_rms = fields.Float(load_default=0.0)

    @validates_schema
    def check_order(self, data, **kwargs):
        if len(data['coefficients']) != data['order']:
            raise ValidationError('Coefficient count must equal the order', 'coefficients')

    @post_load
    def make_transfer(self, data, **kwargs):
        return PolynomialTransfer(data['coefficients'], data['kind'], data['residual_rms'])


class ToneMeasurementSchema(Schema):
    power_db = fields.Float(required=True)
    freq_error_hz = fields.Float(attribute='freq_error', load_default=0.0)
    snr_db = fields.Float(load_default=float('inf'))
    valid = fields.Boolean(load_default=True)
    method = fields.String(load_default=PEAK_SEARCH)

    @post_load
    def make_measurement(self, data, **kwargs):
        return ToneMeasurement(**data)


class ToneReportSchema(Schema):
    """Tone powers of one sideband group, keyed by harmonic index"""
    sideband = fields.String(required=True, validate=validate.OneOf(SIDEBANDS))
    reference_db = fields.Float(load_default=0.0)
    noise_floor_db = fields.Float(allow_none=True, load_default=None)
    tones = fields.Dict(keys=fields.String(), values=fields.Nested(ToneMeasurementSchema),
                        required=True)

    @post_load
    def make_report(self, data, **kwargs):
        tones = {int(n): tone for n, tone in data.pop('tones').items()}
        return ToneReport(tones=tones, **data)


class SidebandReportsSchema(Schema):
    """Tone report document of a beat record: both sidebands and their ratios"""
    blue = fields.Nested(ToneReportSchema, allow_none=True, load_default=None)
    red = fields.Nested(ToneReportSchema, allow_none=True, load_default=None)
    ratios = fields.Dict(keys=fields.String(), values=fields.Dict(), load_default=dict)


class AxisFitSchema(Schema):
    alpha_khz = fields.Float(attribute='alpha', required=True)
    delta = fields.Float(required=True)
    sigma_alpha = fields.Float(required=True)
    sigma_delta = fields.Float(required=True)


class ManifestEntrySchema(Schema):
    a = fields.Float(required=True, validate=validate.Range(min=0, max=1))
    dpd = fields.Boolean(required=True)
    population = fields.List(fields.String(), load_default=list)
    parity = fields.List(fields.String(), load_default=list)
    xi0_khz = fields.Float(allow_none=True, load_default=None)
    sigma_xi0_khz = fields.Float(allow_none=True, load_default=None)

    @validates_schema
    def check_files(self, data, **kwargs):
        if not data['population'] or not data['parity']:
            raise ValidationError('Each setting needs population and parity files')


class ExperimentManifestSchema(Schema):
    settings = fields.List(fields.Nested(ManifestEntrySchema), required=True,
                           validate=validate.Length(min=1))
    photodiode = fields.String(allow_none=True, load_default=None)


class RunConfigSchema(Schema):
    """Sweep and command configuration; flags override file values"""
    reference_model = fields.Boolean(load_default=True)
    amplitude_model = fields.String(allow_none=True, load_default=None)
    phase_model = fields.String(allow_none=True, load_default=None)
    am_pm = fields.Boolean(load_default=Config.AM_PM)
    nu = fields.Float(load_default=Config.NU, validate=positive)
    xi0 = fields.Float(load_default=Config.XI0, validate=positive)
    drive_amplitude = fields.Float(load_default=Config.DRIVE_AMPLITUDE,
                                   validate=validate.Range(min=0, max=1))
    dpd = fields.Boolean(load_default=False)
    a_min = fields.Float(load_default=Config.SWEEP_A_MIN,
                         validate=validate.Range(min=0, max=1, min_inclusive=False))
    a_max = fields.Float(load_default=Config.SWEEP_A_MAX, validate=validate.Range(min=0, max=1))
    n_points = fields.Integer(load_default=Config.SWEEP_POINTS, validate=validate.Range(min=2))
    sample_rate = fields.Float(load_default=Config.SAMPLE_RATE, validate=positive)
    n_periods = fields.Integer(load_default=Config.N_PERIODS, validate=validate.Range(min=1))
    f_det = fields.Float(load_default=Config.F_DET, validate=positive)
    noise_power = fields.Float(load_default=0.0, validate=validate.Range(min=0))
    nbar = fields.Float(load_default=Config.NBAR, validate=validate.Range(min=0))
    threshold_nbar = fields.Float(load_default=Config.THRESHOLD_NBAR, validate=validate.Range(min=0))
    eta_ld = fields.Float(load_default=Config.ETA_LD, validate=positive)
    eta_ref = fields.Float(load_default=Config.ETA_REF, validate=validate.Range(min=0, max=1,
                                                                               min_inclusive=False))
    seed = fields.Integer(allow_none=True, load_default=None)
    workers = fields.Integer(load_default=Config.WORKERS, validate=validate.Range(min=1))
    output_dir = fields.String(allow_none=True, load_default=None)

    @validates_schema
    def check_options(self, data, **kwargs):
        error = validate_run_options(data)
        if error:
            raise ValidationError(error)
        if data.get('reference_model') is False and not data.get('amplitude_model'):
            raise ValidationError('Give an amplitude model file or use the reference model')


class RunManifestSchema(Schema):
    config = fields.Nested(RunConfigSchema(exclude=('output_dir', 'workers')))
    seed = fields.Integer(allow_none=True)
    a_corr = fields.Float()
    eta_corr_nodpd = fields.Float()
    eta_corr_dpd = fields.Float()
    files = fields.List(fields.String())
