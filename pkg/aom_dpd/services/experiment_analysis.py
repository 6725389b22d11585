import logging
import math
import os
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from aom_dpd.config import Config
from aom_dpd.exceptions import (
    BudgetNotCrossed,
    ConfigError,
    DegenerateScan,
    InvalidRecord,
    NonPositiveDefiniteHessian,
    UnderdeterminedFit,
)
from aom_dpd.models.experiment import (
    AxisFit,
    GatePoint,
    ParityFit,
    ParityScan,
    PopulationRecord,
    Setting,
    SettingReport,
)
from aom_dpd.models.schemas import ExperimentManifestSchema
from aom_dpd.utils.io import read_csv, read_json, write_csv, write_json
from aom_dpd.utils.validators import validate_parity_points, validate_population_counts

logger = logging.getLogger(__name__)


def population_fidelity(record: PopulationRecord) -> Tuple[float, float]:
    """Even-parity fraction with its binomial standard error"""
    error = validate_population_counts(record.even_count, record.total)
    if error:
        raise InvalidRecord(error)
    f_pop = record.even_count / record.total
    return f_pop, math.sqrt(f_pop * (1 - f_pop) / record.total)


def _check_scan(scan: ParityScan):
    error = validate_parity_points(scan.phases, scan.even_counts, scan.totals)
    if error:
        raise InvalidRecord(error)
    if len(scan) < 4:
        raise DegenerateScan(f"Parity fit needs at least 4 phase points, got {len(scan)}")
    if np.ptp(scan.phases) < np.pi / 2:
        raise DegenerateScan("Analysis phases must span at least half a fringe period")


def _negative_log_likelihood(params, scan: ParityScan, clamp: float) -> float:
    contrast, phase = params
    p = 0.5 * (1 + contrast * np.cos(2 * scan.phases + phase))
    p = np.clip(p, clamp, 1 - clamp)
    return float(-np.sum(scan.even_counts * np.log(p)
                         + (scan.totals - scan.even_counts) * np.log(1 - p)))


def _hessian(func, x: np.ndarray, step: float) -> np.ndarray:
    """Central finite-difference Hessian"""
    size = len(x)
    hessian = np.empty((size, size))
    f0 = func(x)
    for i in range(size):
        e_i = np.zeros(size)
        e_i[i] = step
        hessian[i, i] = (func(x + e_i) - 2 * f0 + func(x - e_i)) / step ** 2
        for j in range(i + 1, size):
            e_j = np.zeros(size)
            e_j[j] = step
            hessian[i, j] = hessian[j, i] = (
                func(x + e_i + e_j) - func(x + e_i - e_j)
                - func(x - e_i + e_j) + func(x - e_i - e_j)
            ) / (4 * step ** 2)
    return hessian


def parity_mle(scan: ParityScan, clamp: float = Config.LIKELIHOOD_CLAMP,
               step: float = Config.HESSIAN_STEP, strict: bool = False) -> ParityFit:
    """Binomial maximum-likelihood fit of P(phi) = C cos(2 phi + phi0)"""
    _check_scan(scan)

    # start from the frequency-2 Fourier component of the measured parity
    z = 2 * np.mean(scan.parity * np.exp(-2j * scan.phases))
    start = [min(abs(z), 0.99), float(np.angle(z))]

    def nll(params):
        return _negative_log_likelihood(params, scan, clamp)

    bound = 1 - clamp
    result = optimize.minimize(
        nll, start, method='Nelder-Mead',
        bounds=[(-bound, bound), (None, None)],
        options={'xatol': 1e-10, 'fatol': 1e-12, 'maxiter': 4000, 'maxfev': 8000}
    )
    if not result.success:
        logger.warning(f"Parity fit did not converge: {result.message}")

    contrast, phase = result.x
    if contrast < 0:
        contrast, phase = -contrast, phase + np.pi
    phase = float(np.angle(np.exp(1j * phase)))
    best = np.array([contrast, phase])

    hessian = _hessian(nll, best, step)
    eigenvalues = np.linalg.eigvalsh(hessian)
    if np.all(eigenvalues > 0):
        covariance = np.linalg.inv(hessian)
        return ParityFit(contrast, phase, math.sqrt(covariance[0, 0]),
                         math.sqrt(covariance[1, 1]), nll(best))

    message = f"Likelihood Hessian is not positive definite (eigenvalues {eigenvalues})"
    if strict:
        raise NonPositiveDefiniteHessian(message)
    logger.warning(f"{message}; reporting contrast without uncertainty")
    return ParityFit(contrast, phase, None, None, nll(best))


def bell_fidelity(pop: Tuple[float, float], par: Tuple[float, float]) -> Tuple[float, float]:
    """Bell-state fidelity (F_pop + F_par)/2 with independent errors"""
    (f_pop, sigma_pop), (f_par, sigma_par) = pop, par
    for value in (f_pop, f_par):
        if not 0 <= value <= 1:
            raise InvalidRecord(f"Fidelity component {value} outside [0, 1]")
    return (f_pop + f_par) / 2, 0.5 * math.sqrt(sigma_pop ** 2 + sigma_par ** 2)


def _common_setting(items) -> Optional[Setting]:
    settings = {item.setting for item in items}
    if len(settings) > 1:
        raise InvalidRecord(f"Records mix settings {sorted(settings)}")
    return settings.pop()


def pool_populations(records: Sequence[PopulationRecord]) -> PopulationRecord:
    """Count-level pooling of repeated population measurements"""
    if not records:
        raise InvalidRecord("Nothing to pool")
    setting = _common_setting(records)
    return PopulationRecord(sum(r.even_count for r in records),
                            sum(r.total for r in records), setting)


def merge_parity(scans: Sequence[ParityScan],
                 grid: float = Config.PHASE_GRID_RAD) -> ParityScan:
    """Sum counts of repeated scans on a common phase grid (round half to even)"""
    if not scans:
        raise InvalidRecord("Nothing to merge")
    setting = _common_setting(scans)

    df = pd.concat([scan.to_frame() for scan in scans], ignore_index=True)
    df['grid'] = np.round(df['phase_rad'] / grid).astype(int)
    merged = df.groupby('grid', sort=True)[['even_count', 'total']].sum().reset_index()
    return ParityScan(merged['grid'].to_numpy() * grid, merged['even_count'].to_numpy(),
                      merged['total'].to_numpy(), setting)


def gate_rate_map(sweep, anchor: Tuple[float, bool] = Config.ANCHOR) -> pd.DataFrame:
    """Relative gate rate r_rel = 10^((P1 - P1_anchor)/20) from simulated gate-tone power

    `sweep` is a frame (or rows) with columns a, dpd, p1_db.
    """
    df = pd.DataFrame(sweep, columns=['a', 'dpd', 'p1_db']) if not isinstance(
        sweep, pd.DataFrame) else sweep.copy()
    anchor_a, anchor_dpd = anchor
    match = df[np.isclose(df['a'], anchor_a) & (df['dpd'].astype(bool) == bool(anchor_dpd))]
    if match.empty:
        raise InvalidRecord(f"Anchor setting A={anchor_a} dpd={anchor_dpd} is not in the sweep")

    reference = float(match['p1_db'].iloc[0])
    df['r_rel'] = 10 ** ((df['p1_db'] - reference) / 20)
    return df


def rate_uncertainty(sigma_db: float) -> float:
    """Fractional gate-rate uncertainty from an optical power fluctuation in dB"""
    if sigma_db < 0:
        raise ConfigError("Power fluctuation must be non-negative")
    return math.log(10) / 20 * sigma_db


def rate_band(alpha: float, r_rel, sigma_db: float = Config.POWER_FLUCTUATION_DB) -> pd.DataFrame:
    """Predicted gate rate alpha r_rel with its power-fluctuation band"""
    xi0 = alpha * np.asarray(r_rel, dtype=float)
    return pd.DataFrame({'r_rel': r_rel, 'xi0_khz': xi0,
                         'sigma_xi0_khz': xi0 * rate_uncertainty(sigma_db)})


def _interpolate_curve(pd_curve: pd.DataFrame, setting: Setting) -> Tuple[float, float]:
    branch = pd_curve[pd_curve['dpd'].astype(bool) == setting.dpd].sort_values('a')
    if branch.empty:
        raise InvalidRecord(f"Photodiode curve has no {'DPD' if setting.dpd else 'NoDPD'} branch")
    return (float(np.interp(setting.a, branch['a'], branch['r_rel'])),
            float(np.interp(setting.a, branch['a'], branch['f_pd'])))


def fit_axes(gate_points: Sequence[GatePoint], pd_curve: pd.DataFrame,
             sigma_db: float = Config.POWER_FLUCTUATION_DB) -> AxisFit:
    """Weighted stacked fit of the rate scale alpha and fidelity offset delta"""
    if len(gate_points) < 2:
        raise UnderdeterminedFit("Axis fit needs at least two gate points")

    interpolated = np.array([_interpolate_curve(pd_curve, p.setting) for p in gate_points])
    r_rel, f_pd = interpolated[:, 0], interpolated[:, 1]
    if np.ptp(r_rel) <= 0:
        raise UnderdeterminedFit("Gate points must span distinct relative rates")

    xi0 = np.array([p.xi0 for p in gate_points])
    measured = np.array([p.fidelity for p in gate_points])
    sigma_v = np.array([p.sigma_fidelity for p in gate_points])
    sigma_h = np.sqrt(np.array([p.sigma_xi0 for p in gate_points]) ** 2
                      + (xi0 * rate_uncertainty(sigma_db)) ** 2)
    if np.any(sigma_h <= 0) or np.any(sigma_v <= 0):
        raise UnderdeterminedFit("Every gate point needs positive uncertainties")

    def residuals(params):
        alpha, delta = params
        return np.concatenate([(xi0 - alpha * r_rel) / sigma_h,
                               (measured - (f_pd + delta)) / sigma_v])

    start = [float(np.sum(xi0 * r_rel) / np.sum(r_rel ** 2)), float(np.mean(measured - f_pd))]
    result = optimize.least_squares(residuals, start, method='lm', xtol=1e-15, ftol=1e-15,
                                    gtol=1e-15)
    covariance = np.linalg.inv(result.jac.T @ result.jac)
    sigma_alpha, sigma_delta = np.sqrt(np.diag(covariance))

    fit = AxisFit(result.x[0], result.x[1], sigma_alpha, sigma_delta, result.fun)
    logger.info(f"Axis fit: alpha = {fit.alpha:.3f} +/- {fit.sigma_alpha:.3f} kHz, "
                f"delta = {fit.delta:.4f} +/- {fit.sigma_delta:.4f}")
    return fit


def predict_fidelity(pd_curve: pd.DataFrame, fit: AxisFit,
                     sigma_db: float = Config.POWER_FLUCTUATION_DB) -> pd.DataFrame:
    """Photodiode-predicted fidelity against gate rate after the axis fit"""
    df = pd_curve[['a', 'dpd', 'r_rel', 'f_pd']].copy()
    df['xi0_khz'] = fit.alpha * df['r_rel']
    df['sigma_xi0_khz'] = df['xi0_khz'] * rate_uncertainty(sigma_db)
    df['fidelity'] = df['f_pd'] + fit.delta
    return df


def threshold_efficiency(eta, infidelity,
                         budgets: Sequence[float] = Config.INFIDELITY_BUDGETS) -> List[float]:
    """Efficiency at which the infidelity first reaches each budget (log-log interpolation)"""
    eta = np.asarray(eta, dtype=float)
    infidelity = np.asarray(infidelity, dtype=float)
    keep = (eta > 0) & (infidelity > 0)
    log_eta, log_eps = np.log10(eta[keep]), np.log10(infidelity[keep])

    thresholds = []
    for budget in budgets:
        above = np.flatnonzero(log_eps >= math.log10(budget))
        if len(above) == 0:
            raise BudgetNotCrossed(f"Infidelity never reaches {budget:g}")
        i = above[0]
        if log_eps[i] == math.log10(budget):
            thresholds.append(float(eta[keep][i]))
            continue
        if i == 0:
            raise BudgetNotCrossed(f"Infidelity already exceeds {budget:g} at the lowest efficiency")
        fraction = (math.log10(budget) - log_eps[i - 1]) / (log_eps[i] - log_eps[i - 1])
        thresholds.append(float(10 ** (log_eta[i - 1] + fraction * (log_eta[i] - log_eta[i - 1]))))
    return thresholds


def compare_settings(a: Tuple[float, float], b: Tuple[float, float]) -> Tuple[float, float, float]:
    """Fidelity difference a - b, its combined uncertainty and significance"""
    difference = a[0] - b[0]
    sigma = math.hypot(a[1], b[1])
    return difference, sigma, difference / sigma if sigma > 0 else float('inf')


def simulate_population(p_even: float, total: int = Config.SHOTS,
                        setting: Optional[Setting] = None,
                        rng: Optional[np.random.Generator] = None) -> PopulationRecord:
    """Binomial population record"""
    if rng is None:
        raise ConfigError("A seeded generator is required for synthetic records")
    return PopulationRecord(int(rng.binomial(total, p_even)), total, setting)


def simulate_parity_scan(contrast: float, phase: float = 0.0,
                         n_phases: int = Config.PARITY_PHASES, shots: int = Config.SHOTS,
                         setting: Optional[Setting] = None,
                         rng: Optional[np.random.Generator] = None) -> ParityScan:
    """Parity scan at uniformly spaced phases; expected counts when rng is None"""
    phases = 2 * np.pi * np.arange(n_phases) / n_phases
    p = 0.5 * (1 + contrast * np.cos(2 * phases + phase))
    totals = np.full(n_phases, shots)
    counts = totals * p if rng is None else rng.binomial(totals, p)
    return ParityScan(phases, counts, totals, setting)


def analyze_setting(setting: Setting, populations: Sequence[PopulationRecord],
                    scans: Sequence[ParityScan]) -> SettingReport:
    """Pool one setting's records and combine population and parity"""
    pooled = pool_populations(populations)
    fit = parity_mle(merge_parity(scans))
    f_pop, sigma_pop = population_fidelity(pooled)
    if fit.sigma_contrast is None:
        raise NonPositiveDefiniteHessian(f"No contrast uncertainty for {setting.key()}")
    value, sigma = bell_fidelity((f_pop, sigma_pop), (fit.contrast, fit.sigma_contrast))
    return SettingReport(setting, pooled, fit, f_pop, sigma_pop, value, sigma, len(scans))


def load_manifest(path: str) -> Dict:
    """Experiment manifest grouping record files by (A, dpd)"""
    return read_json(path, ExperimentManifestSchema())


def analyze_manifest(manifest: Dict, base_dir: str = '.') -> List[SettingReport]:
    """Per-setting Bell fidelities for every entry of a manifest"""
    reports = []
    for entry in manifest['settings']:
        setting = Setting(entry['a'], entry['dpd'])
        populations = [
            PopulationRecord.from_frame(
                read_csv(os.path.join(base_dir, name), ['even_count', 'total']), setting)
            for name in entry['population']
        ]
        scans = [
            ParityScan.from_frame(
                read_csv(os.path.join(base_dir, name), ['phase_rad', 'even_count', 'total']),
                setting)
            for name in entry['parity']
        ]
        report = analyze_setting(setting, populations, scans)
        logger.info(f"{setting.key()}: F = {report.fidelity:.4f} +/- {report.sigma:.4f}")
        reports.append(report)
    return reports


def write_synthetic_dataset(directory: str, rng: np.random.Generator, a: float = 0.5,
                            contrasts: Optional[Dict[bool, float]] = None,
                            populations: Optional[Dict[bool, float]] = None,
                            n_scans: int = 2) -> str:
    """Bundle of binomial records and a manifest; returns the manifest path"""
    contrasts = contrasts or {True: 0.958, False: 0.890}
    populations = populations or {True: 0.981, False: 0.973}

    entries = []
    for dpd in (False, True):
        setting = Setting(a, dpd)
        tag = 'dpd' if dpd else 'nodpd'
        entry = {'a': a, 'dpd': dpd, 'population': [], 'parity': []}
        for index in range(n_scans):
            population_name = f"population_{tag}_{index}.csv"
            parity_name = f"parity_{tag}_{index}.csv"
            record = simulate_population(populations[dpd], setting=setting, rng=rng)
            scan = simulate_parity_scan(contrasts[dpd], 0.0, setting=setting, rng=rng)
            write_csv(record.to_frame(), os.path.join(directory, population_name))
            write_csv(scan.to_frame(), os.path.join(directory, parity_name))
            entry['population'].append(population_name)
            entry['parity'].append(parity_name)
        entries.append(entry)

    return write_json({'settings': entries, 'photodiode': None},
                      os.path.join(directory, 'manifest.json'))
