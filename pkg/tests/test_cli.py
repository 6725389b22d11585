import json

import numpy as np
import pandas as pd
import pytest


def invoke(runner, app, output_dir, *args, **kwargs):
    return runner.invoke(app, ['--output-dir', str(output_dir), *args], **kwargs)


def payload(result):
    return json.loads(result.output)


def write_calibration(path, values):
    drives = np.linspace(0.0, 1.0, len(values))
    pd.DataFrame({'drive': drives, 'value': values}).to_csv(path, index=False)
    return str(path)


class TestCalibrationCommands:

    def test_reference_model_files(self, runner, app, tmp_path):
        result = invoke(runner, app, tmp_path, 'fit-transfer', '--reference-model')
        assert result.exit_code == 0, result.output
        document = json.loads((tmp_path / 'reference_amplitude.json').read_text())
        assert document['order'] == 8
        assert document['a_corr'] == pytest.approx(0.5655, abs=1e-4)
        assert (tmp_path / 'reference_phase.json').exists()

    def test_fit_linear_calibration(self, runner, app, tmp_path):
        csv = write_calibration(tmp_path / 'linear.csv', np.linspace(0.0, 1.0, 21))
        result = invoke(runner, app, tmp_path / 'out', 'fit-transfer', csv)
        assert result.exit_code == 0, result.output
        document = json.loads((tmp_path / 'out' / 'linear_amplitude.json').read_text())
        np.testing.assert_allclose(document['coefficients'], [1.0] + [0.0] * 7, atol=1e-6)

    def test_non_monotone_calibration(self, runner, app, tmp_path):
        csv = write_calibration(tmp_path / 'bad.csv', np.sin(np.pi * np.linspace(0.0, 1.0, 41)))
        result = invoke(runner, app, tmp_path, 'fit-transfer', csv)
        assert result.exit_code == 2
        assert 'NonMonotonicFit' in result.output

    def test_invert_from_model_file(self, runner, app, tmp_path):
        invoke(runner, app, tmp_path, 'fit-transfer', '--reference-model')
        model = str(tmp_path / 'reference_amplitude.json')
        result = invoke(runner, app, tmp_path, 'invert', '--amplitude-model', model,
                        '--target', '0.2')
        assert result.exit_code == 0, result.output
        data = payload(result)['data']
        assert data['targets']['0.2'] == pytest.approx(0.207676, abs=1e-4)
        curve = pd.read_csv(tmp_path / 'predistortion.csv')
        assert list(curve.columns) == ['target', 'drive', 'output']


class TestSimulationCommands:

    def test_synth_formats(self, runner, app, tmp_path):
        result = invoke(runner, app, tmp_path, 'synth', '--n-periods', '1')
        assert result.exit_code == 0, result.output
        waveform = pd.read_csv(tmp_path / 'waveform.csv')
        assert len(waveform) == 5000
        assert waveform['i'].abs().max() == pytest.approx(0.4, abs=1e-12)

        result = invoke(runner, app, tmp_path, 'synth', '--n-periods', '1', '--dpd',
                        '--format', 'json')
        assert result.exit_code == 0, result.output
        document = json.loads((tmp_path / 'waveform.json').read_text())
        assert document['dpd'] is True
        assert len(document['samples']) == 5000

    def test_simulate_spectrum_and_estimate(self, runner, app, tmp_path):
        result = invoke(runner, app, tmp_path, 'simulate', '--no-am-pm')
        assert result.exit_code == 0, result.output
        ratios = payload(result)
        assert ratios['blue']['r10_db'] > 10

        spectrum_dir = tmp_path / 'spectrum'
        result = invoke(runner, app, spectrum_dir, 'spectrum', str(tmp_path / 'beat.csv'),
                        '--psd')
        assert result.exit_code == 0, result.output
        assert payload(result)['blue']['r10_db'] == pytest.approx(ratios['blue']['r10_db'],
                                                                  abs=1e-6)
        assert (spectrum_dir / 'psd.csv').exists()

        result = invoke(runner, app, tmp_path, 'estimate-fidelity', '--report',
                        str(spectrum_dir / 'tone_report.json'))
        assert result.exit_code == 0, result.output
        data = payload(result)['data']
        assert 0.9 < data['fidelity'] < 1.0
        assert set(data['per_sideband']) == {'blue', 'red'}

    def test_predistort_waveform_file(self, runner, app, tmp_path):
        invoke(runner, app, tmp_path, 'synth', '--n-periods', '1')
        result = invoke(runner, app, tmp_path, 'predistort', str(tmp_path / 'waveform.csv'))
        assert result.exit_code == 0, result.output
        corrected = pd.read_csv(tmp_path / 'predistorted.csv')
        assert corrected['i'].abs().max() > 0.4

    def test_sweep_is_deterministic(self, runner, app, tmp_path):
        args = ['sweep', '--a-min', '0.3', '--a-max', '0.5', '--n-points', '2',
                '--noise-power', '1e-10', '--no-am-pm']
        first = runner.invoke(app, ['--output-dir', str(tmp_path / 'a'), '--seed', '5', *args])
        second = runner.invoke(app, ['--output-dir', str(tmp_path / 'b'), '--seed', '5', *args])
        assert first.exit_code == 0, first.output
        assert second.exit_code == 0, second.output
        for name in payload(first)['files']:
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()


class TestFidelityCommands:

    def test_estimate_from_tones(self, runner, app, tmp_path):
        result = invoke(runner, app, tmp_path, 'estimate-fidelity', '--tone', '1', '0',
                        '--tone', '2', '0', '--nbar', '0')
        assert result.exit_code == 0, result.output
        assert payload(result)['data']['fidelity'] == pytest.approx(1.0, abs=1e-9)

    def test_estimate_needs_input(self, runner, app, tmp_path):
        result = invoke(runner, app, tmp_path, 'estimate-fidelity')
        assert result.exit_code == 2

    def test_thresholds(self, runner, app, tmp_path):
        result = invoke(runner, app, tmp_path, 'thresholds', '--target', '1e-2',
                        '--trace', '0', '0.1')
        assert result.exit_code == 0, result.output
        rows = payload(result)['data']
        assert rows[0]['n0_db'] == pytest.approx(30.2, abs=0.3)
        assert rows[0]['n3_db'] == pytest.approx(10.8, abs=0.3)
        trace = pd.read_csv(tmp_path / 'trace_n0.csv')
        assert trace['f'].iloc[-1] == pytest.approx(-0.444, abs=0.005)

    def test_thresholds_help_names_ground_state(self, runner, app):
        result = runner.invoke(app, ['thresholds', '--help'])
        assert result.exit_code == 0
        assert 'ground state' in ' '.join(result.output.split())


class TestExperimentCommands:

    def test_synthetic_analysis(self, runner, app, tmp_path):
        result = invoke(runner, app, tmp_path, '--seed', '3', 'analyze', '--synthetic')
        assert result.exit_code == 0, result.output
        data = payload(result)['data']
        assert len(data['settings']) == 2
        assert data['comparisons'][0]['difference'] > 0
        assert (tmp_path / 'fidelity_report.csv').exists()

    def test_empty_manifest(self, runner, app, tmp_path):
        manifest = tmp_path / 'manifest.json'
        manifest.write_text(json.dumps({'settings': []}))
        result = invoke(runner, app, tmp_path, 'analyze', str(manifest))
        assert result.exit_code == 2
        assert 'ValidationError' in result.output

    def test_fit_axes(self, runner, app, tmp_path):
        a = np.array([0.3, 0.4, 0.5])
        photodiode = pd.DataFrame({'a': a, 'dpd': False, 'r_rel': a / 0.4, 'f_pd': 0.99 - 0.1 * a})
        points = pd.DataFrame({'a': a, 'dpd': False, 'xi0_khz': 20.0 * a / 0.4,
                               'sigma_xi0_khz': 0.1, 'fidelity': 0.98 - 0.1 * a, 'sigma': 0.005})
        photodiode.to_csv(tmp_path / 'pd.csv', index=False)
        points.to_csv(tmp_path / 'points.csv', index=False)
        result = invoke(runner, app, tmp_path, 'fit-axes', str(tmp_path / 'points.csv'),
                        str(tmp_path / 'pd.csv'))
        assert result.exit_code == 0, result.output
        data = payload(result)['data']
        assert data['alpha_khz'] == pytest.approx(20.0, abs=1e-6)
        assert data['delta'] == pytest.approx(-0.01, abs=1e-8)
        assert (tmp_path / 'predicted_fidelity.csv').exists()


class TestConfiguration:

    def test_file_flag_precedence(self, runner, app, tmp_path):
        config_file = tmp_path / 'run.json'
        config_file.write_text(json.dumps({'drive_amplitude': 0.3, 'n_periods': 1}))

        result = invoke(runner, app, tmp_path, '--config', str(config_file), 'synth')
        assert result.exit_code == 0, result.output
        assert pd.read_csv(tmp_path / 'waveform.csv')['i'].abs().max() == pytest.approx(0.3)

        result = invoke(runner, app, tmp_path, '--config', str(config_file), 'synth', '-a', '0.5')
        assert result.exit_code == 0, result.output
        assert pd.read_csv(tmp_path / 'waveform.csv')['i'].abs().max() == pytest.approx(0.5)

    def test_output_dir_from_environment(self, runner, app, tmp_path):
        result = runner.invoke(app, ['synth', '--n-periods', '1'],
                               env={'AOM_DPD_OUTPUT_DIR': str(tmp_path / 'env')})
        assert result.exit_code == 0, result.output
        assert (tmp_path / 'env' / 'waveform.csv').exists()

    def test_missing_config_file(self, runner, app, tmp_path):
        result = invoke(runner, app, tmp_path, '--config', str(tmp_path / 'nope.json'),
                        'thresholds')
        assert result.exit_code == 2
        assert 'ConfigError' in result.output

    def test_noise_requires_seed(self, runner, app, tmp_path):
        config_file = tmp_path / 'run.json'
        config_file.write_text(json.dumps({'noise_power': 1e-6, 'seed': None}))
        result = invoke(runner, app, tmp_path, '--config', str(config_file), 'simulate')
        assert result.exit_code == 2
