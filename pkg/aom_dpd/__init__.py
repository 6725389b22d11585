import logging

import click

from aom_dpd.config import Config


def create_app(config_class=Config):
    """Application factory pattern"""
    from aom_dpd.commands import PipelineGroup

    @click.group(cls=PipelineGroup)
    @click.option('--config', 'config_file', type=click.Path(dir_okay=False),
                  help='JSON run configuration file')
    @click.option('--output-dir', envvar='AOM_DPD_OUTPUT_DIR', default=None,
                  help='Directory for generated files')
    @click.option('--seed', type=int, default=None, help='RNG seed for synthetic noise')
    @click.option('--log-level', default=None,
                  type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR']))
    @click.pass_context
    def app(ctx, config_file, output_dir, seed, log_level):
        """Digital predistortion toolkit for acousto-optic modulators"""
        from aom_dpd.commands import build_context

        ctx.obj = build_context(config_class, config_file, output_dir, seed, log_level)
        setup_logging(ctx.obj['config'])

    # Register command groups
    register_commands(app)

    return app


def register_commands(app):
    """Register application command groups"""
    from aom_dpd.commands.calibration import calibration_commands
    from aom_dpd.commands.simulation import simulation_commands
    from aom_dpd.commands.fidelity import fidelity_commands
    from aom_dpd.commands.experiment import experiment_commands

    for commands in (calibration_commands, simulation_commands,
                     fidelity_commands, experiment_commands):
        for command in commands:
            app.add_command(command)


def setup_logging(config):
    """Setup application logging"""
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL),
        format='%(asctime)s %(levelname)s: %(message)s'
    )
