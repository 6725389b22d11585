import json
import math

import numpy as np
import pandas as pd
import pytest
from marshmallow import ValidationError

from aom_dpd.exceptions import (
    BudgetNotCrossed,
    ConfigError,
    DegenerateScan,
    InvalidRecord,
    UnderdeterminedFit,
)
from aom_dpd.models.experiment import GatePoint, ParityScan, PopulationRecord, Setting
from aom_dpd.services.experiment_analysis import (
    analyze_manifest,
    bell_fidelity,
    compare_settings,
    fit_axes,
    gate_rate_map,
    load_manifest,
    merge_parity,
    parity_mle,
    pool_populations,
    population_fidelity,
    predict_fidelity,
    rate_band,
    rate_uncertainty,
    simulate_parity_scan,
    simulate_population,
    threshold_efficiency,
    write_synthetic_dataset,
)


@pytest.fixture
def pd_curve():
    a = np.array([0.2, 0.3, 0.4, 0.5])
    return pd.DataFrame({
        'a': np.concatenate([a, a]),
        'dpd': [False] * 4 + [True] * 4,
        'r_rel': np.concatenate([a / 0.4, 1.1 * a / 0.4]),
        'f_pd': np.concatenate([0.99 - 0.1 * a, 0.995 - 0.05 * a])
    })


def gate_points(pd_curve, alpha=20.0, delta=-0.01, noise=None, rng=None):
    points = []
    for row in pd_curve.itertuples():
        xi0 = alpha * row.r_rel
        fidelity = row.f_pd + delta
        if noise is not None:
            xi0 += rng.normal(0.0, noise[0])
            fidelity += rng.normal(0.0, noise[1])
        sigma_xi0 = noise[0] if noise else 0.1
        sigma_fidelity = noise[1] if noise else 0.005
        points.append(GatePoint(Setting(row.a, row.dpd), xi0, sigma_xi0, fidelity, sigma_fidelity))
    return points


class TestPopulation:

    def test_binomial_error(self):
        f_pop, sigma = population_fidelity(PopulationRecord(600, 625))
        assert f_pop == pytest.approx(0.96)
        assert sigma == pytest.approx(0.00784, abs=1e-5)

    def test_invalid_counts(self):
        with pytest.raises(InvalidRecord):
            population_fidelity(PopulationRecord(700, 625))
        with pytest.raises(InvalidRecord):
            population_fidelity(PopulationRecord(0, 0))

    def test_pooling_is_count_level(self):
        setting = Setting(0.5, True)
        pooled = pool_populations([PopulationRecord(600, 625, setting),
                                   PopulationRecord(290, 300, setting)])
        assert pooled.even_count == 890
        assert pooled.total == 925
        assert pooled.setting == setting

    def test_pooling_rejects_mixed_settings(self):
        with pytest.raises(InvalidRecord):
            pool_populations([PopulationRecord(600, 625, Setting(0.5, True)),
                              PopulationRecord(600, 625, Setting(0.5, False))])
        with pytest.raises(InvalidRecord):
            pool_populations([])

    def test_simulation_needs_generator(self):
        with pytest.raises(ConfigError):
            simulate_population(0.98)


class TestParity:

    def test_noiseless_fit(self):
        fit = parity_mle(simulate_parity_scan(0.958, 0.3))
        assert fit.contrast == pytest.approx(0.958, abs=1e-6)
        assert fit.phase == pytest.approx(0.3, abs=1e-6)
        assert fit.sigma_contrast > 0
        assert fit.sigma_phase > 0

    def test_negative_contrast_is_folded(self):
        fit = parity_mle(simulate_parity_scan(0.8, np.pi + 0.2))
        assert fit.contrast == pytest.approx(0.8, abs=1e-6)
        assert fit.phase == pytest.approx(np.pi + 0.2 - 2 * np.pi, abs=1e-6)

    def test_estimator_is_unbiased(self):
        rng = np.random.default_rng(404)
        fits = [parity_mle(simulate_parity_scan(0.958, 0.0, rng=rng)) for _ in range(200)]
        contrasts = np.array([fit.contrast for fit in fits])
        sigmas = np.array([fit.sigma_contrast for fit in fits])
        assert abs(contrasts.mean() - 0.958) < 1.5e-3
        assert np.std(contrasts, ddof=1) == pytest.approx(sigmas.mean(), rel=0.2)

    def test_error_shrinks_with_shots(self):
        rng = np.random.default_rng(2024)
        errors = []
        for shots in (10 ** 2, 10 ** 4, 10 ** 6):
            fits = [parity_mle(simulate_parity_scan(0.9, 0.3, shots=shots, rng=rng))
                    for _ in range(20)]
            errors.append(np.mean([abs(fit.contrast - 0.9) for fit in fits]))
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 1e-3

    def test_degenerate_scans(self):
        with pytest.raises(DegenerateScan):
            parity_mle(ParityScan([0.0, 1.0, 2.0], [300, 200, 100], [625] * 3))
        with pytest.raises(DegenerateScan):
            parity_mle(ParityScan([0.0, 0.2, 0.4, 0.6], [600, 590, 560, 500], [625] * 4))

    def test_invalid_points(self):
        with pytest.raises(InvalidRecord):
            parity_mle(ParityScan([0.0, 1.0, 2.0, 7.0], [300] * 4, [625] * 4))

    def test_merge_on_phase_grid(self):
        setting = Setting(0.5, False)
        first = ParityScan([0.0, 1.0, 2.0, 3.0], [600, 300, 50, 310], [625] * 4, setting)
        second = ParityScan([0.001, 1.002, 2.0, 3.0], [610, 290, 40, 300], [625] * 4, setting)
        merged = merge_parity([first, second])
        assert len(merged) == 4
        np.testing.assert_allclose(merged.phases, [0.0, 1.0, 2.0, 3.0])
        np.testing.assert_array_equal(merged.even_counts, [1210, 590, 90, 610])
        np.testing.assert_array_equal(merged.totals, [1250] * 4)
        assert merged.setting == setting

    def test_grid_rounds_half_to_even(self):
        scan = ParityScan([0.004, 0.005, 0.006, 0.5], [100, 200, 300, 400], [625] * 4)
        merged = merge_parity([scan])
        np.testing.assert_allclose(merged.phases, [0.0, 0.01, 0.5])
        np.testing.assert_array_equal(merged.even_counts, [300, 300, 400])
        np.testing.assert_array_equal(merged.totals, [1250, 625, 625])

    def test_merge_rejects_mixed_settings(self):
        first = ParityScan([0.0], [600], [625], Setting(0.5, False))
        second = ParityScan([0.0], [600], [625], Setting(0.4, False))
        with pytest.raises(InvalidRecord):
            merge_parity([first, second])

    def test_bell_fidelity(self):
        value, sigma = bell_fidelity((0.98, 0.003), (0.96, 0.004))
        assert value == pytest.approx(0.97)
        assert sigma == pytest.approx(0.0025)
        with pytest.raises(InvalidRecord):
            bell_fidelity((1.2, 0.01), (0.9, 0.01))


class TestGateRate:

    def test_anchor_normalization(self):
        sweep = [(0.3, False, -3.0), (0.4, False, 0.5), (0.4, True, 2.5)]
        df = gate_rate_map(sweep)
        np.testing.assert_allclose(df['r_rel'], [10 ** (-3.5 / 20), 1.0, 10 ** (2.0 / 20)])

    def test_missing_anchor(self):
        with pytest.raises(InvalidRecord):
            gate_rate_map([(0.3, False, -3.0)])

    def test_rate_uncertainty(self):
        assert rate_uncertainty(0.2) == pytest.approx(0.0230259, abs=1e-7)
        with pytest.raises(ConfigError):
            rate_uncertainty(-0.1)

    def test_rate_band(self):
        band = rate_band(20.0, [0.5, 1.0])
        np.testing.assert_allclose(band['xi0_khz'], [10.0, 20.0])
        fraction = math.log(10) / 100
        np.testing.assert_allclose(band['sigma_xi0_khz'], [10.0 * fraction, 20.0 * fraction],
                                   rtol=1e-12)


class TestAxisFit:

    def test_noiseless_recovery(self, pd_curve):
        fit = fit_axes(gate_points(pd_curve), pd_curve)
        assert fit.alpha == pytest.approx(20.0, abs=1e-8)
        assert fit.delta == pytest.approx(-0.01, abs=1e-10)
        assert fit.sigma_alpha > 0
        assert fit.sigma_delta > 0
        assert fit.chi_square == pytest.approx(0.0, abs=1e-12)

    def test_seeded_trials_scatter_around_truth(self, pd_curve):
        rng = np.random.default_rng(77)
        fits = [fit_axes(gate_points(pd_curve, noise=(0.3, 0.004), rng=rng), pd_curve)
                for _ in range(100)]
        alphas = np.array([fit.alpha for fit in fits])
        deltas = np.array([fit.delta for fit in fits])
        sigma_alpha = np.mean([fit.sigma_alpha for fit in fits])
        sigma_delta = np.mean([fit.sigma_delta for fit in fits])
        assert abs(alphas.mean() - 20.0) < 5 * sigma_alpha / 10
        assert abs(deltas.mean() + 0.01) < 5 * sigma_delta / 10

    def test_prediction(self, pd_curve):
        fit = fit_axes(gate_points(pd_curve), pd_curve)
        predicted = predict_fidelity(pd_curve, fit)
        np.testing.assert_allclose(predicted['xi0_khz'], 20.0 * pd_curve['r_rel'], rtol=1e-9)
        np.testing.assert_allclose(predicted['fidelity'], pd_curve['f_pd'] - 0.01, atol=1e-9)

    def test_underdetermined(self, pd_curve):
        points = gate_points(pd_curve)
        with pytest.raises(UnderdeterminedFit):
            fit_axes(points[:1], pd_curve)
        same_rate = [point._replace(setting=points[0].setting) for point in points[:3]]
        with pytest.raises(UnderdeterminedFit):
            fit_axes(same_rate, pd_curve)

    def test_missing_branch(self, pd_curve):
        nodpd = pd_curve[~pd_curve['dpd']]
        with pytest.raises(InvalidRecord):
            fit_axes(gate_points(pd_curve), nodpd)


class TestThresholdEfficiency:

    def test_log_log_interpolation(self):
        thresholds = threshold_efficiency([0.1, 0.2, 0.4], [1e-4, 1e-3, 1e-2],
                                          budgets=(1e-3, 10 ** -2.5, 1e-2))
        assert thresholds[0] == pytest.approx(0.2)
        assert thresholds[1] == pytest.approx(math.sqrt(0.2 * 0.4))
        assert thresholds[2] == pytest.approx(0.4)

    def test_first_point_on_budget(self):
        thresholds = threshold_efficiency([0.1, 0.2, 0.4], [1e-3, 1e-2, 1e-1],
                                          budgets=(1e-3, 1e-2))
        assert thresholds == [0.1, 0.2]

    def test_uncrossed_budgets(self):
        with pytest.raises(BudgetNotCrossed):
            threshold_efficiency([0.1, 0.2, 0.4], [1e-4, 1e-3, 1e-2], budgets=(0.1,))
        with pytest.raises(BudgetNotCrossed):
            threshold_efficiency([0.1, 0.2, 0.4], [1e-4, 1e-3, 1e-2], budgets=(1e-4,))

    def test_compare_settings(self):
        difference, sigma, significance = compare_settings((0.97, 0.003), (0.93, 0.004))
        assert difference == pytest.approx(0.04)
        assert sigma == pytest.approx(0.005)
        assert significance == pytest.approx(8.0)


class TestManifest:

    def test_synthetic_dataset(self, tmp_path):
        path = write_synthetic_dataset(str(tmp_path), np.random.default_rng(7))
        reports = analyze_manifest(load_manifest(path), str(tmp_path))
        by_dpd = {report.setting.dpd: report for report in reports}
        assert by_dpd[True].fidelity == pytest.approx(0.9695, abs=4 * by_dpd[True].sigma)
        assert by_dpd[False].fidelity == pytest.approx(0.9315, abs=4 * by_dpd[False].sigma)
        assert by_dpd[True].n_scans == 2
        assert by_dpd[True].population.total == 1250
        assert by_dpd[True].fidelity > by_dpd[False].fidelity

    def test_empty_manifest(self, tmp_path):
        path = tmp_path / 'manifest.json'
        path.write_text(json.dumps({'settings': []}))
        with pytest.raises(ValidationError):
            load_manifest(str(path))

    def test_entry_without_files(self, tmp_path):
        path = tmp_path / 'manifest.json'
        path.write_text(json.dumps({'settings': [{'a': 0.5, 'dpd': True}]}))
        with pytest.raises(ValidationError):
            load_manifest(str(path))
