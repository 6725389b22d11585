import numpy as np
import pytest

from aom_dpd.exceptions import (
    ComplexEnvelopeUnsupported,
    ConfigError,
    InvalidRecord,
    UndersampledSpec,
)
from aom_dpd.models.waveform import GateSpec, IQWaveform, Tone
from aom_dpd.services.aom_forward import forward
from aom_dpd.services.waveform_synth import (
    normalize_peak,
    predistort,
    sample_count,
    synth_cardioid,
    tone_phase,
)

SAMPLE_RATE = 100e6


class TestSynthCardioid:

    def test_single_period(self, spec):
        waveform = synth_cardioid(spec, SAMPLE_RATE)
        assert len(waveform) == 5000
        assert waveform.duration == pytest.approx(spec.gate_period)
        assert waveform.peak == pytest.approx(0.4, abs=1e-12)
        assert waveform.is_real()
        assert not waveform.dpd

    def test_tone_content(self, spec):
        waveform = synth_cardioid(spec, SAMPLE_RATE)
        lines = np.fft.rfft(waveform.i)
        # one gate period: bin k sits at k * xi0
        first, second = lines[93], lines[94]
        assert abs(first) == pytest.approx(abs(second), rel=1e-9)
        assert (first / second).real == pytest.approx(-1.0, abs=1e-9)
        others = np.delete(np.abs(lines), [93, 94])
        assert np.max(others) < 1e-9 * abs(first)

    def test_period_count(self, spec):
        waveform = synth_cardioid(spec, SAMPLE_RATE, n_periods=3)
        assert len(waveform) == sample_count(spec, SAMPLE_RATE, 3) == 15000
        np.testing.assert_allclose(waveform.i[:5000], waveform.i[5000:10000], atol=1e-12)

    def test_silent_tones_are_rejected(self, spec):
        with pytest.raises(InvalidRecord):
            synth_cardioid(spec.with_changes(tones=[Tone(1, 0.0)]), SAMPLE_RATE)

    def test_undersampled(self, spec):
        with pytest.raises(UndersampledSpec):
            synth_cardioid(spec, 4 * spec.frequency(2))

    def test_invalid_parameters(self, spec):
        with pytest.raises(ConfigError):
            synth_cardioid(spec.with_changes(nu=10e3), SAMPLE_RATE)
        with pytest.raises(ConfigError):
            synth_cardioid(spec, SAMPLE_RATE, n_periods=0)
        with pytest.raises(ConfigError):
            synth_cardioid(spec.with_changes(tones=[Tone(-1, 1.0)]), SAMPLE_RATE)

    def test_custom_tones(self, spec):
        single = spec.with_changes(tones=[Tone(1, 1.0, 0.5)])
        waveform = synth_cardioid(single, SAMPLE_RATE)
        expected = 0.4 * np.cos(tone_phase(single.frequency(1), len(waveform), SAMPLE_RATE) + 0.5)
        np.testing.assert_allclose(waveform.i, expected, atol=1e-6)

    def test_tone_phase_is_reduced(self):
        phases = tone_phase(1.86e6, 1000, SAMPLE_RATE)
        exact = 2 * np.pi * 1.86e6 * np.arange(1000) / SAMPLE_RATE
        assert np.all((phases >= 0) & (phases < 2 * np.pi))
        np.testing.assert_allclose(np.cos(phases), np.cos(exact), atol=1e-9)


class TestPredistort:

    def test_applies_inverse(self, spec, dpd_map):
        waveform = synth_cardioid(spec, SAMPLE_RATE)
        corrected = predistort(waveform, dpd_map)
        assert corrected.dpd
        assert corrected.is_real()
        np.testing.assert_allclose(corrected.i, dpd_map(waveform.i), atol=1e-12)

    def test_clamps_to_full_drive(self, spec, dpd_map):
        waveform = synth_cardioid(spec.with_changes(drive_amplitude=0.8), SAMPLE_RATE)
        corrected = predistort(waveform, dpd_map)
        assert corrected.peak == 1.0

    def test_end_to_end_linearization(self, amp, dpd_map):
        for drive in (0.2, 0.4, 0.5):
            target = synth_cardioid(GateSpec.cardioid(drive_amplitude=drive), SAMPLE_RATE)
            output = forward(predistort(target, dpd_map), amp)
            assert np.max(np.abs(output.samples - target.samples)) <= 1e-6

    def test_rejects_complex_envelope(self, spec, dpd_map):
        waveform = synth_cardioid(spec, SAMPLE_RATE)
        with pytest.raises(ComplexEnvelopeUnsupported):
            predistort(waveform.replace(waveform.samples + 1e-3j), dpd_map)

    def test_rejects_over_range(self, dpd_map):
        with pytest.raises(InvalidRecord):
            predistort(IQWaveform(1e6, [0.5, 1.2]), dpd_map)

    def test_normalize_peak(self):
        waveform = IQWaveform(1e6, [0.1, -0.4, 0.2])
        np.testing.assert_allclose(normalize_peak(waveform, 0.8).i, [0.2, -0.8, 0.4])
        with pytest.raises(InvalidRecord):
            normalize_peak(IQWaveform(1e6, np.zeros(4)), 0.5)
