import numpy as np
import pytest

from aom_dpd.config import TestingConfig
from aom_dpd.exceptions import ConfigError, KindMismatch
from aom_dpd.models.waveform import GateSpec, IQWaveform
from aom_dpd.services.aom_forward import (
    eta_bar,
    eta_bar_grid,
    eta_corr,
    eta_instant,
    eta_instant_curve,
    forward,
)
from aom_dpd.services.transfer_model import compute_a_corr, reference_amplitude
from aom_dpd.services.waveform_synth import predistort, synth_cardioid


class TestForward:

    def test_clips_at_full_drive(self, amp):
        output = forward(IQWaveform(1e6, [1.5, -2.0, 0.0]), amp)
        a_corr = compute_a_corr(amp)
        np.testing.assert_allclose(output.samples.real, [a_corr, -a_corr, 0.0], atol=1e-12)
        np.testing.assert_allclose(output.samples.imag, 0.0, atol=1e-12)

    def test_phase_response_rotates_output(self, amp, phase):
        output = forward(IQWaveform(1e6, [1.0, 0.5]), amp, phase)
        np.testing.assert_allclose(np.angle(output.samples), [0.2776, 0.2776 * 0.25], atol=1e-9)
        np.testing.assert_allclose(np.abs(output.samples), amp.raw(np.array([1.0, 0.5])))

    def test_phase_is_added_to_the_input_argument(self, amp, phase):
        output = forward(IQWaveform(1e6, [0.5j]), amp, phase)
        assert np.angle(output.samples[0]) == pytest.approx(np.pi / 2 + 0.2776 * 0.25)

    def test_kind_mismatch(self, amp, phase):
        waveform = IQWaveform(1e6, [0.1])
        with pytest.raises(KindMismatch):
            forward(waveform, phase)
        with pytest.raises(KindMismatch):
            forward(waveform, amp, amp)

    def test_carries_waveform_metadata(self, amp, spec):
        waveform = synth_cardioid(spec, 100e6)
        output = forward(waveform, amp)
        assert output.spec is spec
        assert output.drive_amplitude == 0.4
        assert output.models['phase'] is None
        assert len(output) == len(waveform)


class TestEfficiency:

    def test_instant_efficiency(self, amp):
        a_corr = compute_a_corr(amp)
        assert eta_instant(1.0, amp) == pytest.approx(0.8)
        expected = 0.8 * (reference_amplitude(0.5) / a_corr) ** 2
        assert eta_instant(0.5, amp) == pytest.approx(float(expected), rel=1e-4)
        curve = eta_instant_curve(amp, [0.0, 0.5, 1.0])
        assert list(curve.columns) == ['a', 'eta']
        assert curve['eta'].iloc[0] == 0.0

    def test_constant_envelope(self, amp):
        assert eta_bar(IQWaveform(1e6, np.ones(8)), amp, 0.7) == pytest.approx(0.7)

    def test_requires_whole_periods(self, amp, spec):
        waveform = synth_cardioid(spec, 100e6)
        with pytest.raises(ConfigError):
            eta_bar(waveform.replace(waveform.samples[:-7]), amp)

    def test_predistortion_raises_efficiency(self, amp, dpd_map, spec):
        waveform = synth_cardioid(spec, 100e6)
        assert eta_bar(predistort(waveform, dpd_map), amp) > eta_bar(waveform, amp)

    def test_grid(self, amp, dpd_map):
        curve = eta_bar_grid(amp, dpd_map, sample_rate=TestingConfig.ETA_SAMPLE_RATE,
                             n_points=TestingConfig.ETA_GRID_POINTS)
        assert len(curve.drives) == 40
        assert curve.eta_nodpd[0] == 0.0
        assert np.all(np.diff(curve.eta_nodpd) > 0)
        assert np.all(curve.eta_dpd >= curve.eta_nodpd - 1e-15)
        assert curve.method in ('cubic-spline', 'pchip', 'mixed')
        assert curve(curve.drives[10], dpd=True) == pytest.approx(curve.eta_dpd[10])

        frame = curve.to_frame()
        assert list(frame.columns) == ['a', 'eta_bar_nodpd', 'eta_bar_dpd']

    def test_grid_matches_direct_evaluation(self, amp, dpd_map):
        drives = [0.0, 0.25, 0.5]
        curve = eta_bar_grid(amp, dpd_map, drives=drives, sample_rate=20e6)
        direct = synth_cardioid(GateSpec.cardioid(drive_amplitude=0.5), 20e6)
        assert curve.eta_nodpd[2] == pytest.approx(eta_bar(direct, amp), rel=1e-12)

    def test_eta_corr(self, amp, dpd_map):
        curve = eta_bar_grid(amp, dpd_map, sample_rate=TestingConfig.ETA_SAMPLE_RATE,
                             n_points=TestingConfig.ETA_GRID_POINTS)
        corr_nodpd, corr_dpd = eta_corr(curve, compute_a_corr(amp))
        assert 0 < corr_nodpd < corr_dpd < 0.8
