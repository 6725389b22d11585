import logging

import click
import numpy as np
import pandas as pd

from aom_dpd.commands import generator, load_models, output_path, run_options
from aom_dpd.models.schemas import SidebandReportsSchema
from aom_dpd.models.spectrum import BLUE, RED, BeatRecord
from aom_dpd.models.waveform import GateSpec, IQWaveform
from aom_dpd.services.spectral_analysis import (
    analyze_record,
    periodogram,
    power_ratios,
    simulate_record,
)
from aom_dpd.services.sweep import run_sweep
from aom_dpd.services.waveform_synth import predistort, synth_cardioid
from aom_dpd.utils.io import dumps, read_csv, write_csv, write_json

logger = logging.getLogger(__name__)


def gate_options(func):
    """Shared gate and sampling flags; unset flags fall back to the config file"""
    decorators = [
        click.option('--amplitude', '-a', 'drive_amplitude', type=float, default=None,
                     help='Peak drive amplitude A in [0, 1]'),
        click.option('--nu', type=float, default=None, help='Motional frequency (Hz)'),
        click.option('--xi0', type=float, default=None, help='Gate detuning (Hz)'),
        click.option('--sample-rate', type=float, default=None, help='AWG sample rate (Hz)'),
        click.option('--n-periods', type=int, default=None, help='Gate periods per record'),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def model_options(func):
    decorators = [
        click.option('--amplitude-model', type=click.Path(exists=True, dir_okay=False),
                     default=None),
        click.option('--phase-model', type=click.Path(exists=True, dir_okay=False),
                     default=None),
        click.option('--am-pm/--no-am-pm', default=None,
                     help='Include the phase response in the forward model'),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def _spec(options) -> GateSpec:
    return GateSpec.cardioid(options['nu'], options['xi0'], options['drive_amplitude'],
                             options['dpd'])


def _sample_rate(times: pd.Series) -> float:
    """Sample rate recovered from a uniformly spaced time column"""
    t = times.to_numpy(dtype=float)
    if len(t) < 2:
        raise click.BadParameter('Record needs at least two samples')
    return float(np.round((len(t) - 1) / (t[-1] - t[0]), 3))


def _report_document(reports) -> dict:
    ratios = {sideband: dict(zip(('r10_db', 'r23_db'), power_ratios(report)))
              for sideband, report in reports.items()}
    return SidebandReportsSchema().dump({**reports, 'ratios': ratios})


@click.command('synth')
@gate_options
@click.option('--dpd/--no-dpd', default=None, help='Predistort with the amplitude model')
@click.option('--amplitude-model', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--format', 'output_format', type=click.Choice(['csv', 'json']), default='csv',
              show_default=True)
@click.pass_context
def synth(ctx, dpd, amplitude_model, output_format, **flags):
    """Synthesize the Cardioid(1,2) I/Q envelope"""
    options = run_options(ctx, dpd=dpd, amplitude_model=amplitude_model, **flags)
    waveform = synth_cardioid(_spec(options), options['sample_rate'], options['n_periods'])
    if options['dpd']:
        waveform = predistort(waveform, load_models(options)[2])

    if output_format == 'json':
        path = write_json(waveform.to_dict(), output_path(ctx, 'waveform.json'))
    else:
        path = write_csv(waveform.to_frame(), output_path(ctx, 'waveform.csv'))
    logger.info(f"Wrote {len(waveform)} samples to {path}")
    click.echo(path)


@click.command('predistort')
@click.argument('waveform', type=click.Path(exists=True, dir_okay=False))
@click.option('--amplitude-model', type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def predistort_command(ctx, waveform, amplitude_model):
    """Predistort a real envelope read from a t,i,q CSV file"""
    options = run_options(ctx, amplitude_model=amplitude_model)
    df = read_csv(waveform, ['t', 'i', 'q'])
    envelope = IQWaveform(_sample_rate(df['t']), df['i'].to_numpy() + 1j * df['q'].to_numpy())
    corrected = predistort(envelope, load_models(options)[2])

    path = write_csv(corrected.to_frame(), output_path(ctx, 'predistorted.csv'))
    logger.info(f"Predistorted {len(corrected)} samples into {path}")
    click.echo(path)


@click.command('simulate')
@gate_options
@model_options
@click.option('--dpd/--no-dpd', default=None)
@click.option('--f-det', type=float, default=None, help='Heterodyne offset (Hz)')
@click.option('--noise-power', type=float, default=None, help='Detector noise variance')
@click.pass_context
def simulate(ctx, **flags):
    """Propagate one gate through the AOM and write the beat record and tone report"""
    options = run_options(ctx, **flags)
    amp, phase, dpd_map = load_models(options)
    spec = _spec(options)
    record = simulate_record(spec, amp, phase if options['am_pm'] else None, dpd_map,
                             options['sample_rate'], options['n_periods'], options['f_det'],
                             options['noise_power'], generator(ctx))

    times = np.arange(len(record)) / record.sample_rate
    write_csv(pd.DataFrame({'t': times, 'v': record.samples}), output_path(ctx, 'beat.csv'))
    document = _report_document(analyze_record(record, spec, ctx.obj['config']))
    write_json(document, output_path(ctx, 'tone_report.json'))
    click.echo(dumps(document['ratios']))


@click.command('spectrum')
@click.argument('record', type=click.Path(exists=True, dir_okay=False))
@click.option('--nu', type=float, default=None)
@click.option('--xi0', type=float, default=None)
@click.option('--f-det', type=float, default=None)
@click.option('--psd/--no-psd', 'write_psd', default=False, help='Also write the periodogram')
@click.pass_context
def spectrum(ctx, record, write_psd, **flags):
    """Tone powers of both sideband groups of a t,v beat record"""
    options = run_options(ctx, **flags)
    df = read_csv(record, ['t', 'v'])
    beat = BeatRecord(_sample_rate(df['t']), df['v'].to_numpy(), options['f_det'])

    reports = analyze_record(beat, _spec(options), ctx.obj['config'])
    document = _report_document(reports)
    write_json(document, output_path(ctx, 'tone_report.json'))
    if write_psd:
        psd = periodogram(beat, ctx.obj['config'].FLATTOP_COEFFICIENTS)
        write_csv(pd.DataFrame({'frequency': psd.frequencies, 'power': psd.power}),
                  output_path(ctx, 'psd.csv'))

    for sideband in (BLUE, RED):
        r10, r23 = power_ratios(reports[sideband])
        logger.info(f"{sideband}: R10 = {r10:.2f} dB, R23 = {r23:.2f} dB")
    click.echo(dumps(document['ratios']))


@click.command('sweep')
@model_options
@click.option('--a-min', type=float, default=None)
@click.option('--a-max', type=float, default=None)
@click.option('--n-points', type=int, default=None)
@click.option('--sample-rate', type=float, default=None)
@click.option('--n-periods', type=int, default=None)
@click.option('--noise-power', type=float, default=None)
@click.option('--workers', type=int, default=None)
@click.pass_context
def sweep(ctx, **flags):
    """Sweep the drive amplitude with and without predistortion"""
    options = run_options(ctx, **flags)
    amp, phase, dpd_map = load_models(options)
    manifest = run_sweep(options, amp, phase, dpd_map, ctx.obj['output_dir'], ctx.obj['config'])
    click.echo(dumps({key: manifest[key] for key in ('a_corr', 'eta_corr_nodpd',
                                                      'eta_corr_dpd', 'files')}))


simulation_commands = [synth, predistort_command, simulate, spectrum, sweep]
