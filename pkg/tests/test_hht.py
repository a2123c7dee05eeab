import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.signal import hilbert

from ousiofluct.hht import (BINS, FrequencyBins, UndefinedPeriodError, analytic_signal,
                            characteristic_period, default_bins, hilbert_transform,
                            instantaneous_frequency, period_bin, spectrum, write_spectra_csv)

t = np.arange(2000.0)


class TestBins:
    def test_layout(self):
        assert BINS.count == 120
        assert BINS.edges[0] == pytest.approx(1e-6, rel=1e-12)
        assert BINS.edges[-1] == pytest.approx(1.0, rel=1e-12)
        assert np.all(np.diff(BINS.edges) > 0)

    def test_identical_every_time(self):
        assert np.array_equal(default_bins().edges, BINS.edges)

    def test_geometric_centres(self):
        c = BINS.centers
        np.testing.assert_allclose(c, np.sqrt(BINS.edges[:-1] * BINS.edges[1:]))
        np.testing.assert_allclose(c[1:] / c[:-1], 10 ** 0.05)

    def test_index_of(self):
        assert BINS.index_of(1e-7) == -1 and BINS.index_of(1.0) == -1
        assert BINS.index_of(1e-6) == 0
        assert BINS.index_of(0.99) == 119

    def test_period_bin(self):
        assert period_bin(1000.0) == BINS.index_of(1e-3)


class TestAnalytic:
    @pytest.mark.parametrize("n", [255, 256, 1000])
    def test_matches_scipy(self, n):
        x = np.random.default_rng(n).standard_normal(n)
        np.testing.assert_allclose(analytic_signal(x), hilbert(x), atol=1e-12)

    def test_cosine_unit_modulus(self):
        z = analytic_signal(np.cos(2 * np.pi * t / 32))
        assert np.max(np.abs(np.abs(z[100:-100]) - 1)) < 0.05

    def test_zero(self):
        np.testing.assert_array_equal(analytic_signal(np.zeros(16)), 0)
        assert analytic_signal(np.zeros(0)).size == 0

    def test_involution(self):
        coeffs = np.fft.rfft(np.random.default_rng(0).standard_normal(512))
        coeffs[0] = coeffs[-1] = 0.0  # no DC, no Nyquist term
        x = np.fft.irfft(coeffs, n=512)
        np.testing.assert_allclose(hilbert_transform(hilbert_transform(x)), -x, atol=1e-8)


class TestInstantaneousFrequency:
    def test_tone(self):
        f, a = instantaneous_frequency(np.cos(2 * np.pi * t / 20), sampling_rate=1 / 50)
        np.testing.assert_allclose(f[100:-100], 1e-3, rtol=1e-3)
        np.testing.assert_allclose(a[100:-100], 1.0, atol=0.02)

    def test_amplitude_scales(self):
        _, a = instantaneous_frequency(-3.0 * np.cos(2 * np.pi * t / 40))
        np.testing.assert_allclose(a[100:-100], 3.0, atol=0.05)

    def test_single_sample(self):
        f, a = instantaneous_frequency(np.array([2.0]))
        assert f.shape == (1,) and a[0] == 2.0


class TestPeriod:
    def test_period_in_words(self):
        p = characteristic_period(np.sin(2 * np.pi * t / 20), sampling_rate=1 / 50)
        assert abs(period_bin(p) - period_bin(1000.0)) <= 1

    @given(st.floats(0.01, 100.0), st.booleans())
    def test_scale_invariant(self, c, flip):
        x = np.sin(2 * np.pi * t / 37) + 0.3 * np.sin(2 * np.pi * t / 5)
        ref = characteristic_period(x)
        assert characteristic_period(c * x) == ref

    def test_energy_dominance(self):
        # Tones in separate halves, the slow one carrying 90% of the energy.  Two
        # simultaneous tones would not do: their summed phase has no single
        # frequency, so the histogram smears between them.
        half = t.size // 2
        x = np.r_[3.0 * np.sin(2 * np.pi * t[:half] / 200),
                  1.0 * np.sin(2 * np.pi * t[half:] / 11)]
        p = characteristic_period(x, sampling_rate=1.0)
        assert abs(period_bin(p) - period_bin(200.0)) <= 1

    @settings(max_examples=40, deadline=None)
    @given(st.floats(np.log10(4.0), np.log10(4000.0)))
    def test_pure_tones_over_three_decades(self, logp):
        period = 10 ** logp
        n = max(2000, int(20 * period))
        x = np.sin(2 * np.pi * np.arange(n) / period)
        assert abs(period_bin(characteristic_period(x, sampling_rate=1.0)) - period_bin(period)) <= 1

    def test_zero_imf(self):
        with pytest.raises(UndefinedPeriodError):
            characteristic_period(np.zeros(100))

    def test_period_range(self):
        p = characteristic_period(np.sin(2 * np.pi * t / 3), sampling_rate=1.0)
        assert 1.0 <= p <= 1e6

    def test_custom_bins(self):
        bins = FrequencyBins(np.array([1e-3, 1e-2, 1e-1, 1.0]))
        sp = spectrum(np.sin(2 * np.pi * t / 20), bins, sampling_rate=1.0)
        assert sp.dominant_bin == 1 and sp.energies.shape == (3,)


def test_spectra_csv(tmp_path):
    sp = spectrum(np.sin(2 * np.pi * t / 20))
    write_spectra_csv(tmp_path / "s.csv", [sp, sp])
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "imf_order,bin_low,bin_high,energy"
    assert len(lines) == 1 + 2 * 120
    assert lines[1].startswith("1,1e-06,")
