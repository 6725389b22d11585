"""Drive-amplitude sweep: synth -> (predistort) -> forward -> spectrum -> fidelity."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from aom_dpd.config import Config
from aom_dpd.exceptions import BudgetNotCrossed, InvalidGateTones
from aom_dpd.models.schemas import RunManifestSchema
from aom_dpd.models.spectrum import BLUE, RED
from aom_dpd.models.transfer import PolynomialTransfer, PredistortionMap
from aom_dpd.models.waveform import GateSpec
from aom_dpd.services.aom_forward import (
    eta_bar,
    eta_bar_grid,
    eta_corr,
    eta_instant_curve,
    forward,
)
from aom_dpd.services.experiment_analysis import threshold_efficiency
from aom_dpd.services.gate_fidelity import estimate_from_tones, im_threshold_table
from aom_dpd.services.spectral_analysis import (
    analyze_record,
    average_sidebands,
    delta_p,
    heterodyne_mix,
)
from aom_dpd.services.transfer_model import compute_a_corr
from aom_dpd.services.waveform_synth import predistort, synth_cardioid
from aom_dpd.utils.io import write_csv, write_json

logger = logging.getLogger(__name__)

SPECTRAL_COLUMNS = ['a', 'dpd', 'r10_db', 'r23_db', 'dp1_db', 'dp2_db', 'eta_bar']
FIDELITY_COLUMNS = ['a', 'dpd', 'eta_bar', 'fidelity', 'infidelity']


class SweepRunner:
    """Evaluates sweep points for one set of models and run options"""

    def __init__(self, options: Dict, amp: PolynomialTransfer,
                 phase: Optional[PolynomialTransfer], dpd_map: PredistortionMap,
                 config=Config):
        self.options = options
        self.amp = amp
        self.phase = phase if options.get('am_pm', True) else None
        self.dpd_map = dpd_map
        self.config = config

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.options['a_min'], self.options['a_max'], self.options['n_points'])

    def generators(self) -> List[Tuple[np.random.Generator, np.random.Generator]]:
        """Independent (no DPD, DPD) generators per grid point"""
        children = np.random.SeedSequence(self.options.get('seed')).spawn(2 * len(self.grid))
        generators = [np.random.default_rng(child) for child in children]
        return list(zip(generators[0::2], generators[1::2]))

    def simulate(self, a: float, dpd: bool, rng: np.random.Generator):
        """Tone reports of both sidebands and eta_bar for one setting"""
        opts = self.options
        spec = GateSpec.cardioid(opts['nu'], opts['xi0'], a, dpd)
        waveform = synth_cardioid(spec, opts['sample_rate'], opts['n_periods'])
        if dpd:
            waveform = predistort(waveform, self.dpd_map)
        efficiency = eta_bar(waveform, self.amp, opts['eta_ref'])
        record = heterodyne_mix(forward(waveform, self.amp, self.phase), opts['f_det'],
                                noise_power=opts['noise_power'], rng=rng)
        return analyze_record(record, spec, self.config), efficiency

    def fidelity(self, reports) -> float:
        try:
            return estimate_from_tones([reports[BLUE], reports[RED]], self.options['nbar'],
                                       xi0=self.options['xi0'],
                                       eta_ld=self.options['eta_ld']).value
        except InvalidGateTones as e:
            logger.warning(f"No fidelity estimate: {e}")
            return float('nan')

    def run_point(self, task) -> List[Dict]:
        a, (rng_off, rng_on) = task
        logger.debug(f"Sweep point A={a:.4f}")
        rows = []
        baseline = None
        for dpd, rng in ((False, rng_off), (True, rng_on)):
            reports, efficiency = self.simulate(a, dpd, rng)
            r10, r23 = average_sidebands(reports[BLUE], reports[RED])
            if baseline is None:
                baseline = reports
                dp1 = dp2 = 0.0
            else:
                changes = [delta_p(reports[s], baseline[s]) for s in (BLUE, RED)]
                dp1, dp2 = (float(np.mean(values)) for values in zip(*changes))
            fidelity = self.fidelity(reports)
            rows.append({
                'a': float(a), 'dpd': dpd, 'r10_db': r10, 'r23_db': r23,
                'dp1_db': dp1, 'dp2_db': dp2, 'eta_bar': efficiency,
                'fidelity': fidelity, 'infidelity': 1.0 - fidelity
            })
        return rows

    def run(self) -> pd.DataFrame:
        """All grid points, collected in grid order"""
        tasks = list(zip(self.grid, self.generators()))
        workers = self.options.get('workers', self.config.WORKERS)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(self.run_point, tasks))
        else:
            results = [self.run_point(task) for task in tasks]
        return pd.DataFrame([row for rows in results for row in rows])


def threshold_efficiency_table(points: pd.DataFrame,
                               budgets=Config.INFIDELITY_BUDGETS) -> pd.DataFrame:
    """Threshold efficiencies per budget with and without predistortion"""
    columns = {}
    for dpd in (False, True):
        branch = points[points['dpd'] == dpd].sort_values('eta_bar')
        values = []
        for budget in budgets:
            try:
                values.append(threshold_efficiency(branch['eta_bar'], branch['infidelity'],
                                                   [budget])[0])
            except BudgetNotCrossed as e:
                logger.warning(f"{'DPD' if dpd else 'NoDPD'}: {e}")
                values.append(float('nan'))
        columns['eta_th_dpd' if dpd else 'eta_th_nodpd'] = values

    table = pd.DataFrame({'budget': list(budgets), **columns})
    table['ratio'] = table['eta_th_dpd'] / table['eta_th_nodpd']
    return table


def run_sweep(options: Dict, amp: PolynomialTransfer, phase: Optional[PolynomialTransfer],
              dpd_map: PredistortionMap, output_dir: str, config=Config) -> Dict:
    """Run the full sweep and write its CSV files and run manifest"""
    runner = SweepRunner(options, amp, phase, dpd_map, config)
    points = runner.run()

    curve = eta_bar_grid(amp, dpd_map, spec=GateSpec.cardioid(options['nu'], options['xi0']),
                         sample_rate=config.ETA_SAMPLE_RATE, n_points=config.ETA_GRID_POINTS,
                         eta_ref=options['eta_ref'])
    a_corr = compute_a_corr(amp)
    corr_nodpd, corr_dpd = eta_corr(curve, a_corr)

    outputs = {
        'spectral_sweep.csv': points[SPECTRAL_COLUMNS],
        'fidelity_vs_eta.csv': points[FIDELITY_COLUMNS],
        'thresholds.csv': im_threshold_table(nbar=options['threshold_nbar']),
        'efficiency_curve.csv': curve.to_frame(),
        'eta_instant.csv': eta_instant_curve(amp, curve.drives, options['eta_ref']),
        'threshold_efficiency.csv': threshold_efficiency_table(points),
    }
    for name, frame in outputs.items():
        write_csv(frame, os.path.join(output_dir, name))

    manifest = {
        'config': options,
        'seed': options.get('seed'),
        'a_corr': a_corr,
        'eta_corr_nodpd': corr_nodpd,
        'eta_corr_dpd': corr_dpd,
        'files': sorted(outputs) + ['manifest.json']
    }
    write_json(manifest, os.path.join(output_dir, 'manifest.json'), RunManifestSchema())
    logger.info(f"Sweep of {len(runner.grid)} amplitudes written to {output_dir}")
    return manifest

