import logging
import os

import click

from aom_dpd.commands import load_models, output_path, run_options
from aom_dpd.models.schemas import TransferModelSchema
from aom_dpd.models.transfer import AMPLITUDE, KINDS, CalibrationDataset
from aom_dpd.services.transfer_model import (
    compute_a_corr,
    fit_calibration,
    invert,
    predistortion_curve,
    reference_model,
    stability_stats,
)
from aom_dpd.utils.helpers import success_response
from aom_dpd.utils.io import dumps, read_csv, write_csv, write_json

logger = logging.getLogger(__name__)


def _load_dataset(path: str, kind: str) -> CalibrationDataset:
    return CalibrationDataset.from_frame(read_csv(path, ['drive', 'value']), kind)


def _model_document(transfer) -> dict:
    return TransferModelSchema().dump(transfer.to_dict())


@click.command('fit-transfer')
@click.argument('calibration', nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option('--kind', type=click.Choice(KINDS), default=AMPLITUDE, show_default=True)
@click.option('--order', type=int, default=None, help='Polynomial order (8 amplitude, 5 phase)')
@click.option('--reference-model', 'use_reference', is_flag=True,
              help='Write the bundled reference AOM instead')
@click.pass_context
def fit_transfer(ctx, calibration, kind, order, use_reference):
    """Fit transfer-function polynomials to calibration CSV files"""
    written = []
    if use_reference:
        for transfer in reference_model():
            path = output_path(ctx, f"reference_{transfer.kind}.json")
            written.append(write_json(_model_document(transfer), path))
    elif not calibration:
        raise click.UsageError('Give calibration CSV files or --reference-model')

    for path in calibration:
        transfer = fit_calibration(_load_dataset(path, kind), order)
        name = f"{os.path.splitext(os.path.basename(path))[0]}_{kind}.json"
        written.append(write_json(_model_document(transfer), output_path(ctx, name)))
        click.echo(dumps(_model_document(transfer)))

    logger.info(f"Wrote {len(written)} model files")


@click.command('invert')
@click.option('--amplitude-model', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--points', type=int, default=101, show_default=True)
@click.option('--target', type=float, multiple=True, help='Print g(u) for these targets')
@click.option('--grid', 'grid_points', type=int, default=None,
              help='Tabulate the inverse on this many knots instead of root finding')
@click.pass_context
def invert_command(ctx, amplitude_model, points, target, grid_points):
    """Tabulate the predistortion map u -> g(u) and the linearized output f(g(u))"""
    options = run_options(ctx, amplitude_model=amplitude_model)
    amp, _, dpd_map = load_models(options)
    if grid_points:
        dpd_map = invert(amp, grid_points=grid_points)

    write_csv(predistortion_curve(dpd_map, points), output_path(ctx, 'predistortion.csv'))
    click.echo(dumps(success_response({
        'a_corr': compute_a_corr(amp),
        'targets': {str(u): float(dpd_map(u)) for u in target}
    })))


@click.command('stability')
@click.argument('runs', nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option('--kind', type=click.Choice(KINDS), default=AMPLITUDE, show_default=True)
@click.pass_context
def stability(ctx, runs, kind):
    """Run-to-run statistics of y(1) or phi(1) over repeated calibrations"""
    if len(runs) < 2:
        raise click.UsageError('Give at least two calibration runs')

    transfers = [fit_calibration(_load_dataset(path, kind)) for path in runs]
    report = stability_stats(transfers)
    write_csv(report.envelope_frame(), output_path(ctx, f"stability_{kind}.csv"))
    click.echo(dumps(report.to_dict()))


calibration_commands = [fit_transfer, invert_command, stability]
