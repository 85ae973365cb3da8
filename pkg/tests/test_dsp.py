"""Filtering, resampling, band power, and tendency slopes.

The filter checks never trust the design routine's own report: pole
magnitudes come from np.roots on the returned denominator and the
magnitude response from direct polynomial evaluation of H(e^jw).
"""

import numpy as np
import pytest

from vpgnet import (
    Epoch,
    FilterCoefficients,
    FilterSpec,
    alpha_tendency,
    crop_epoch,
    design_bandpass,
    filter_array,
    filter_epoch,
    resample,
    stationarity_tolerance,
    welch_band_power,
)
from vpgnet.errors import (
    BandOutOfRange,
    EpochTooShort,
    InvalidBand,
    NonIntegerRatio,
    NyquistViolation,
    UnstableFilter,
    WindowTooLong,
)

FS = 250.0


def freq_response_db(coeffs, f_hz, fs_hz, zero_phase=True):
    """|H| in dB at one frequency, from the coefficients alone."""
    w = 2.0 * np.pi * f_hz / fs_hz
    z = np.exp(-1j * w * np.arange(len(coeffs.numerator)))
    num = np.dot(coeffs.numerator, z)
    zden = np.exp(-1j * w * np.arange(len(coeffs.denominator)))
    den = np.dot(coeffs.denominator, zden)
    mag = abs(num / den)
    if zero_phase:
        mag = mag**2  # forward-backward filtering squares the magnitude
    return 20.0 * np.log10(max(mag, 1e-300))


def sine_epoch(f_hz, n=2500, amp=1.0, fs=FS, channels=1):
    t = np.arange(n) / fs
    x = amp * np.sin(2 * np.pi * f_hz * t)
    return Epoch(np.tile(x, (channels, 1)), fs, 0, "imagery")


class TestDesign:
    def test_poles_inside_unit_circle(self):
        coeffs = design_bandpass(FilterSpec(8.0, 13.0, FS, order=4))
        mags = np.abs(np.roots(coeffs.denominator))  # independent of is_stable
        assert mags.max() < 1.0
        assert coeffs.is_stable()

    def test_inverted_band_rejected(self):
        with pytest.raises(InvalidBand):
            FilterSpec(13.0, 8.0, FS, 4)

    def test_nyquist_violation(self):
        with pytest.raises(NyquistViolation):
            FilterSpec(8.0, 130.0, FS, 4)

    def test_response_oracle(self):
        coeffs = design_bandpass(FilterSpec(8.0, 13.0, FS, order=4))
        assert abs(freq_response_db(coeffs, 10.5, FS)) < 1.0
        assert freq_response_db(coeffs, 2.0, FS) < -20.0
        assert freq_response_db(coeffs, 30.0, FS) < -20.0


class TestFilterEpoch:
    def test_passband_sine_amplitude(self):
        out = filter_epoch(sine_epoch(10.5), design_bandpass(FilterSpec(8, 13, FS)))
        mid = out.samples[0, 500:2000]  # steady state, edges excluded
        ratio = mid.max()  # unit input amplitude
        assert abs(20 * np.log10(ratio)) < 1.0

    @pytest.mark.parametrize("f", [2.0, 30.0])
    def test_stopband_sines_attenuated(self, f):
        out = filter_epoch(sine_epoch(f), design_bandpass(FilterSpec(8, 13, FS)))
        mid = np.abs(out.samples[0, 500:2000])
        assert 20 * np.log10(max(mid.max(), 1e-12)) < -20.0

    def test_zero_input_zero_output(self):
        ep = Epoch(np.zeros((2, 1000)), FS, 0, "imagery")
        out = filter_epoch(ep, design_bandpass(FilterSpec(8, 13, FS)))
        assert np.all(out.samples == 0.0)

    def test_zero_phase_keeps_pulse_peak_index(self):
        x = np.zeros((1, 1001))
        x[0, 500] = 1.0
        coeffs = design_bandpass(FilterSpec(8, 13, FS))
        out = filter_epoch(Epoch(x, FS, 0, "imagery"), coeffs, zero_phase=True)
        assert int(np.argmax(np.abs(out.samples[0]))) == 500

    def test_linearity_double_precision(self, rng):
        x = rng.standard_normal((3, 1500))
        y = rng.standard_normal((3, 1500))
        coeffs = design_bandpass(FilterSpec(1.0, 40.0, FS, order=2))
        lhs = filter_array(2.5 * x - 1.25 * y, coeffs)
        rhs = 2.5 * filter_array(x, coeffs) - 1.25 * filter_array(y, coeffs)
        assert np.abs(lhs - rhs).max() / np.abs(rhs).max() < 1e-9
        # the sharp default band (order 4, poles near |z| = 0.98) amplifies
        # f64 roundoff to ~3e-9; linearity still holds to that conditioning
        sharp = design_bandpass(FilterSpec(8, 13, FS, order=4))
        lhs = filter_array(2.5 * x - 1.25 * y, sharp)
        rhs = 2.5 * filter_array(x, sharp) - 1.25 * filter_array(y, sharp)
        assert np.abs(lhs - rhs).max() / np.abs(rhs).max() < 1e-8

    def test_unstable_coefficients_refused(self):
        bad = FilterCoefficients([1.0], [1.0, -1.5])  # pole at 1.5
        assert not bad.is_stable()
        with pytest.raises(UnstableFilter):
            filter_epoch(sine_epoch(10.0), bad)

    def test_epoch_too_short_for_zero_phase(self):
        coeffs = design_bandpass(FilterSpec(8, 13, FS))
        with pytest.raises(EpochTooShort):
            filter_epoch(Epoch(np.zeros((1, 10)), FS, 0, "imagery"), coeffs)


class TestResampleCrop:
    def test_decimation_arithmetic(self):
        ep = Epoch(np.arange(5004 * 2, dtype=float).reshape(2, 5004), 1000.0, 0, "imagery")
        out = resample(ep, 250.0)
        assert out.fs_hz == 250.0
        assert out.n_samples == 1251
        np.testing.assert_array_equal(out.samples[0, :3], ep.samples[0, [0, 4, 8]])

    def test_identity_when_rates_match(self):
        ep = sine_epoch(10.0, n=100)
        assert resample(ep, FS) is ep

    def test_non_integer_ratio(self):
        with pytest.raises(NonIntegerRatio):
            resample(sine_epoch(10.0, n=100, fs=1000.0), 300.0)

    def test_crop(self):
        ep = sine_epoch(10.0, n=100)
        assert crop_epoch(ep, 40).n_samples == 40
        with pytest.raises(EpochTooShort):
            crop_epoch(ep, 400)


class TestWelch:
    def test_sine_power_matches_half_amplitude_squared(self):
        for amp in (1.0, 3.0):
            ep = sine_epoch(10.0, n=2500, amp=amp)
            p = welch_band_power(ep.samples[0], FS, (8, 13), window_len=500)
            assert abs(p - amp**2 / 2) / (amp**2 / 2) < 0.05

    def test_agrees_with_rectangular_periodogram(self, rng):
        # independent estimator: one full-length unwindowed periodogram
        n = 4096
        x = rng.standard_normal(n)
        freqs = np.fft.rfftfreq(n, 1 / FS)
        psd = (np.abs(np.fft.rfft(x)) ** 2) / (FS * n)
        psd[1:-1] *= 2.0
        band = (freqs >= 8) & (freqs <= 13)
        reference = psd[band].sum() * (FS / n)
        p = welch_band_power(x, FS, (8, 13), window_len=1024)
        assert abs(p - reference) / reference < 0.25  # estimator variance

    def test_zero_signal(self):
        assert welch_band_power(np.zeros(1000), FS, (8, 13)) == 0.0

    def test_band_above_nyquist(self):
        with pytest.raises(BandOutOfRange):
            welch_band_power(np.zeros(1000), FS, (120, 130))

    def test_window_too_long(self):
        with pytest.raises(WindowTooLong):
            welch_band_power(np.zeros(100), FS, (8, 13), window_len=200)

    def test_sign_flip_invariance(self, rng):
        x = rng.standard_normal(2000)
        a = welch_band_power(x, FS, (8, 13))
        b = welch_band_power(-x, FS, (8, 13))
        assert a == pytest.approx(b, rel=1e-12)

    def test_amplitude_squared_scaling(self, rng):
        x = rng.standard_normal(4000)
        a = welch_band_power(x, FS, (8, 13), window_len=1000)
        b = welch_band_power(3.0 * x, FS, (8, 13), window_len=1000)
        assert b == pytest.approx(9.0 * a, rel=0.01)

    def test_two_dimensional_input_gives_per_channel_power(self, rng):
        x = rng.standard_normal((3, 2000))
        per = welch_band_power(x, FS, (8, 13))
        assert per.shape == (3,)
        for c in range(3):
            assert per[c] == pytest.approx(welch_band_power(x[c], FS, (8, 13)))


def ramp_sine(ramp, n=1251, fs=FS, amp=1.0, f=10.0):
    """Amplitude goes amp -> amp * (1 + ramp) linearly over the epoch."""
    t = np.arange(n) / fs
    envelope = amp * (1.0 + ramp * t / t[-1])
    return envelope * np.sin(2 * np.pi * f * t)


class TestTendency:
    def test_rising_amplitude_positive_slope(self):
        ep = Epoch(ramp_sine(+1.0)[None, :], FS, 0, "imagery")
        assert alpha_tendency(ep).per_channel_slope[0] > 0

    def test_falling_amplitude_negative_slope(self):
        ep = Epoch(ramp_sine(-0.5)[None, :], FS, 0, "imagery")
        assert alpha_tendency(ep).per_channel_slope[0] < 0

    def test_stationary_below_tolerance(self, rng):
        tol = stationarity_tolerance(FS, 1251)
        t = np.arange(1251) / FS
        hits = 0
        for _ in range(20):
            x = np.sin(2 * np.pi * 10.0 * t + rng.uniform(0, 2 * np.pi))
            x = x + 0.3 * rng.standard_normal(1251)
            ep = Epoch(x[None, :], FS, 0, "imagery")
            if abs(alpha_tendency(ep).per_channel_slope[0]) < tol:
                hits += 1
        assert hits >= 19  # 3 sigma tolerance, one straggler allowed

    def test_slope_invariant_under_other_channel_permutation(self, rng):
        base = ramp_sine(1.0)
        noise = rng.standard_normal((3, 1251))
        a = np.vstack([base, noise[0], noise[1], noise[2]])
        b = np.vstack([base, noise[2], noise[0], noise[1]])
        sa = alpha_tendency(Epoch(a, FS, 0, "imagery")).per_channel_slope[0]
        sb = alpha_tendency(Epoch(b, FS, 0, "imagery")).per_channel_slope[0]
        assert sa == pytest.approx(sb, rel=1e-12)

    def test_mean_slope_subset(self):
        arr = np.vstack([ramp_sine(1.0), ramp_sine(-0.5)])
        res = alpha_tendency(Epoch(arr, FS, 0, "imagery"))
        assert res.mean_slope([0]) > 0 > res.mean_slope([1])

    def test_epoch_too_short(self):
        ep = Epoch(np.zeros((1, 200)), FS, 0, "imagery")
        with pytest.raises(EpochTooShort):
            alpha_tendency(ep)  # needs window + step samples

    def test_window_grid_reported(self):
        ep = Epoch(ramp_sine(1.0)[None, :], FS, 0, "imagery")
        res = alpha_tendency(ep, window_len_s=1.0, step_s=0.25)
        assert res.window_power.shape == (len(res.window_centers_s), 1)
        # step is realized in whole samples: round(0.25 * 250) / 250
        steps = np.diff(res.window_centers_s)
        np.testing.assert_allclose(steps, round(0.25 * FS) / FS, atol=1e-12)
        assert res.window_centers_s[0] == pytest.approx(round(1.0 * FS) / FS / 2)
