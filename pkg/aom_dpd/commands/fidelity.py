import logging

import click

from aom_dpd.commands import output_path
from aom_dpd.exceptions import InvalidRecord
from aom_dpd.models.fidelity import DriveSpectrum
from aom_dpd.models.schemas import SidebandReportsSchema
from aom_dpd.models.spectrum import SIDEBANDS
from aom_dpd.models.waveform import Tone
from aom_dpd.services.gate_fidelity import (
    calibrate_omega,
    estimate_from_tones,
    fidelity,
    im_threshold_table,
    outcome,
    phase_space_trace,
    spectrum_from_tones,
)
from aom_dpd.utils.helpers import success_response
from aom_dpd.utils.io import dumps, read_json, write_csv

logger = logging.getLogger(__name__)


def _load_reports(path: str):
    """Tone reports of the sideband groups present in a report document"""
    document = read_json(path, SidebandReportsSchema())
    reports = [document[sideband] for sideband in SIDEBANDS if document[sideband] is not None]
    if not reports:
        raise InvalidRecord(f"{path} holds no tone report")
    return reports


@click.command('estimate-fidelity')
@click.option('--report', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Tone report JSON written by simulate or spectrum')
@click.option('--tone', 'tones', type=(int, float), multiple=True, metavar='N DB',
              help='Tone power in dB for harmonic N (repeatable)')
@click.option('--nbar', type=float, default=None, help='Mean phonon number')
@click.pass_context
def estimate_fidelity(ctx, report, tones, nbar):
    """Predict the Bell-state fidelity from measured tone powers"""
    nbar = ctx.obj['config'].NBAR if nbar is None else nbar
    if report:
        estimate = estimate_from_tones(_load_reports(report), nbar)
    elif tones:
        spectrum = spectrum_from_tones(dict(tones))
        estimate = fidelity(outcome(spectrum), nbar)
    else:
        raise click.UsageError('Give --report or at least the --tone 1 and --tone 2 powers')

    logger.info(f"Predicted fidelity {estimate.value:.6f} at nbar={nbar:g}")
    click.echo(dumps(success_response(estimate.to_dict())))


@click.command('thresholds')
@click.option('--nbar', type=float, default=None,
              help='Mean phonon number (default 0, the ground state; fidelity '
                   'estimates use 0.1)')
@click.option('--target', 'targets', type=float, multiple=True,
              help='Infidelity targets (default 1e-2, 1e-3, 1e-4)')
@click.option('--trace', 'trace_tone', type=(int, float), default=None, metavar='N R',
              help='Also write the phase-space trace of Cardioid plus one tone (n, r)')
@click.pass_context
def thresholds(ctx, nbar, targets, trace_tone):
    """Required gate-to-IM power ratios for infidelity targets"""
    config = ctx.obj['config']
    nbar = config.THRESHOLD_NBAR if nbar is None else nbar
    table = im_threshold_table(targets or config.THRESHOLD_TARGETS, nbar)
    write_csv(table, output_path(ctx, 'thresholds.csv'))

    if trace_tone is not None:
        n, r = trace_tone
        base = DriveSpectrum.cardioid(config.XI0, config.ETA_LD)
        spectrum = base.with_tones(Tone(n, r, config.IM_PHASES.get(n, 0.0)))
        trace = phase_space_trace(spectrum.calibrated(calibrate_omega(base)),
                                  config.TRACE_SAMPLES)
        write_csv(trace.trace_frame(), output_path(ctx, f"trace_n{n}.csv"))
        logger.info(f"Trace endpoint F={trace.f:.4f}, G={trace.g:.4f}, Phi={trace.phi:.4f}")

    click.echo(dumps(success_response(table.to_dict('records'))))


fidelity_commands = [estimate_fidelity, thresholds]
