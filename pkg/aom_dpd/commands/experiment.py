import logging
import os

import click

from aom_dpd.commands import generator, output_path
from aom_dpd.models.experiment import GatePoint, Setting, reports_frame
from aom_dpd.models.schemas import AxisFitSchema
from aom_dpd.services.experiment_analysis import (
    analyze_manifest,
    compare_settings,
    fit_axes,
    load_manifest,
    predict_fidelity,
    write_synthetic_dataset,
)
from aom_dpd.utils.helpers import success_response
from aom_dpd.utils.io import dumps, read_csv, write_csv, write_json

logger = logging.getLogger(__name__)

GATE_POINT_COLUMNS = ['a', 'dpd', 'xi0_khz', 'sigma_xi0_khz', 'fidelity', 'sigma']
PHOTODIODE_COLUMNS = ['a', 'dpd', 'r_rel', 'f_pd']


def _fit_and_write(ctx, gate_points, photodiode_path: str, sigma_db: float):
    pd_curve = read_csv(photodiode_path, PHOTODIODE_COLUMNS)
    fit = fit_axes(gate_points, pd_curve, sigma_db)
    write_json(fit, output_path(ctx, 'axis_fit.json'), AxisFitSchema())
    write_csv(predict_fidelity(pd_curve, fit, sigma_db), output_path(ctx, 'predicted_fidelity.csv'))
    return fit


def _comparisons(reports):
    """DPD minus NoDPD fidelity at every amplitude measured both ways"""
    by_setting = {report.setting: report for report in reports}
    rows = []
    for setting, report in sorted(by_setting.items()):
        partner = by_setting.get(Setting(setting.a, False))
        if not setting.dpd or partner is None:
            continue
        difference, sigma, z = compare_settings((report.fidelity, report.sigma),
                                                (partner.fidelity, partner.sigma))
        rows.append({'a': setting.a, 'difference': difference, 'sigma': sigma, 'z': z})
    return rows


@click.command('analyze')
@click.argument('manifest', required=False, type=click.Path(exists=True, dir_okay=False))
@click.option('--synthetic', is_flag=True,
              help='Generate and analyze a seeded synthetic dataset instead')
@click.option('--sigma-db', type=float, default=None,
              help='Optical power fluctuation for the axis fit (dB)')
@click.pass_context
def analyze(ctx, manifest, synthetic, sigma_db):
    """Bell-state fidelities per setting from population and parity records"""
    if synthetic:
        manifest = write_synthetic_dataset(output_path(ctx, 'synthetic'), generator(ctx))
        logger.info(f"Synthetic dataset written next to {manifest}")
    elif not manifest:
        raise click.UsageError('Give an experiment manifest or --synthetic')

    document = load_manifest(manifest)
    base_dir = os.path.dirname(os.path.abspath(manifest))
    reports = analyze_manifest(document, base_dir)
    write_csv(reports_frame(reports), output_path(ctx, 'fidelity_report.csv'))

    result = {
        'settings': [report.to_dict() for report in reports],
        'comparisons': _comparisons(reports)
    }

    rated = [(entry, report) for entry, report in zip(document['settings'], reports)
             if entry['xi0_khz'] is not None]
    if document['photodiode'] and rated:
        gate_points = [
            GatePoint(report.setting, entry['xi0_khz'], entry['sigma_xi0_khz'] or 0.0,
                      report.fidelity, report.sigma)
            for entry, report in rated
        ]
        sigma_db = ctx.obj['config'].POWER_FLUCTUATION_DB if sigma_db is None else sigma_db
        fit = _fit_and_write(ctx, gate_points,
                             os.path.join(base_dir, document['photodiode']), sigma_db)
        result['axis_fit'] = AxisFitSchema().dump(fit)

    write_json(result, output_path(ctx, 'fidelity_report.json'))
    click.echo(dumps(success_response(result)))


@click.command('fit-axes')
@click.argument('gate_points', type=click.Path(exists=True, dir_okay=False))
@click.argument('photodiode', type=click.Path(exists=True, dir_okay=False))
@click.option('--sigma-db', type=float, default=None,
              help='Optical power fluctuation (dB)')
@click.pass_context
def fit_axes_command(ctx, gate_points, photodiode, sigma_db):
    """Fit the gate-rate scale and fidelity offset against a photodiode curve"""
    df = read_csv(gate_points, GATE_POINT_COLUMNS)
    points = [
        GatePoint(Setting(float(row.a), bool(row.dpd)), float(row.xi0_khz),
                  float(row.sigma_xi0_khz), float(row.fidelity), float(row.sigma))
        for row in df.itertuples(index=False)
    ]
    sigma_db = ctx.obj['config'].POWER_FLUCTUATION_DB if sigma_db is None else sigma_db
    fit = _fit_and_write(ctx, points, photodiode, sigma_db)
    click.echo(dumps(success_response({**AxisFitSchema().dump(fit),
                                       'chi_square': fit.chi_square})))


experiment_commands = [analyze, fit_axes_command]
