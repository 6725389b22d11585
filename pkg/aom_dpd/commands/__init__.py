import logging
import os
from typing import Dict, Optional

import click
import numpy as np
from marshmallow import ValidationError

from aom_dpd.config import Config, config
from aom_dpd.exceptions import AomDpdError, ConfigError, InputError
from aom_dpd.models.schemas import RunConfigSchema, TransferModelSchema
from aom_dpd.services.transfer_model import invert, reference_model
from aom_dpd.utils.io import read_json
from aom_dpd.utils.validators import validate_run_options

logger = logging.getLogger(__name__)

# run options whose defaults follow the active config profile
PROFILE_DEFAULTS = {
    'workers': 'WORKERS',
    'sample_rate': 'SAMPLE_RATE',
    'n_periods': 'N_PERIODS',
    'a_min': 'SWEEP_A_MIN',
    'a_max': 'SWEEP_A_MAX',
    'n_points': 'SWEEP_POINTS',
    'am_pm': 'AM_PM',
}


class PipelineGroup(click.Group):
    """Command group mapping toolkit errors to exit codes"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except AomDpdError as e:
            fail(e.__class__.__name__, str(e), e.exit_code)
        except ValidationError as e:
            fail('ValidationError', str(e.messages), InputError.exit_code)
        except FileNotFoundError as e:
            fail('FileNotFoundError', str(e), InputError.exit_code)


def fail(error: str, message: str, exit_code: int):
    logger.error(f"{error}: {message}")
    click.echo(f"error: {error}: {message}", err=True)
    raise click.exceptions.Exit(exit_code)


def build_context(config_class, config_file: Optional[str], output_dir: Optional[str],
                  seed: Optional[int], log_level: Optional[str]) -> Dict:
    """Resolve settings with precedence flag > environment > file > default"""
    file_options = {}
    if config_file:
        if not os.path.exists(config_file):
            raise ConfigError(f"Config file {config_file} does not exist")
        file_options = read_json(config_file, RunConfigSchema(partial=True))

    overrides = {}
    if log_level:
        overrides['LOG_LEVEL'] = log_level
    run_config = type('RunConfig', (config_class,), overrides)

    file_output_dir = file_options.pop('output_dir', None)
    if seed is None:
        env_seed = os.environ.get('AOM_DPD_SEED')
        seed = int(env_seed) if env_seed else file_options.get('seed', run_config.SEED)

    return {
        'config': run_config,
        'file_options': file_options,
        'output_dir': output_dir or file_output_dir or run_config.OUTPUT_DIR,
        'seed': seed
    }


def run_options(ctx: click.Context, **flags) -> Dict:
    """Validated run configuration: command flags override the config file"""
    data = dict(ctx.obj['file_options'])
    for key, attribute in PROFILE_DEFAULTS.items():
        data.setdefault(key, getattr(ctx.obj['config'], attribute))
    data['seed'] = ctx.obj['seed']
    data.update({key: value for key, value in flags.items() if value is not None})
    options = RunConfigSchema().load(data)
    error = validate_run_options(options)
    if error:
        raise ConfigError(error)
    return options


def generator(ctx: click.Context) -> np.random.Generator:
    return np.random.default_rng(ctx.obj['seed'])


def load_models(options: Dict):
    """(amplitude, phase, predistortion map) from model files or the reference model"""
    if options.get('amplitude_model'):
        amp = read_json(options['amplitude_model'], TransferModelSchema())
        phase = (read_json(options['phase_model'], TransferModelSchema())
                 if options.get('phase_model') else None)
    else:
        amp, phase = reference_model()
    return amp, phase, invert(amp)


def output_path(ctx: click.Context, name: str) -> str:
    directory = ctx.obj['output_dir']
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)


def cli():
    """Console entry point"""
    from aom_dpd import create_app

    config_name = os.environ.get('AOM_DPD_ENV', 'default')
    app = create_app(config.get(config_name, Config))
    app()
