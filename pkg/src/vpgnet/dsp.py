"""Band-pass filtering, resampling, and alpha-band power analysis.

Filter design and PSD estimation delegate to scipy.signal; everything is
validated and surfaced through this package's typed errors. Band power is
the integral of the Welch density over the band (sum times bin width), so a
unit-amplitude sine inside the band reports close to 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .core import Epoch
from .errors import (
    BandOutOfRange,
    EpochTooShort,
    InvalidBand,
    NonIntegerRatio,
    NyquistViolation,
    UnstableFilter,
    WindowTooLong,
)


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth band-pass description; validated on construction."""

    low_hz: float
    high_hz: float
    fs_hz: float
    order: int = 4

    def __post_init__(self):
        if self.order < 1:
            raise InvalidBand(f"order must be >= 1, got {self.order}")
        if not (0.0 < self.low_hz < self.high_hz):
            raise InvalidBand(
                f"need 0 < low < high, got ({self.low_hz}, {self.high_hz})"
            )
        if self.high_hz >= self.fs_hz / 2.0:
            raise NyquistViolation(
                f"high edge {self.high_hz} Hz reaches Nyquist ({self.fs_hz / 2.0} Hz)"
            )


@dataclass(frozen=True)
class FilterCoefficients:
    """Transfer-function form: numerator b, denominator a (a[0] == 1)."""

    numerator: np.ndarray
    denominator: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.numerator, dtype=np.float64)
        a = np.asarray(self.denominator, dtype=np.float64)
        b.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "numerator", b)
        object.__setattr__(self, "denominator", a)

    def poles(self) -> np.ndarray:
        return np.roots(self.denominator)

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))


def design_bandpass(spec: FilterSpec) -> FilterCoefficients:
    """Digital Butterworth band-pass for the given spec."""
    b, a = sps.butter(
        spec.order, [spec.low_hz, spec.high_hz], btype="bandpass", fs=spec.fs_hz
    )
    coeffs = FilterCoefficients(b, a)
    if not coeffs.is_stable():
        raise UnstableFilter(
            f"design for {spec} produced a pole outside the unit circle"
        )
    return coeffs


def filter_array(x: np.ndarray, coeffs: FilterCoefficients, zero_phase: bool = True) -> np.ndarray:
    """Filter (channels, time) float64 rows along time; zero_phase runs forward-backward."""
    if not coeffs.is_stable():
        raise UnstableFilter("refusing to filter with an unstable denominator")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    b, a = coeffs.numerator, coeffs.denominator
    padlen = 3 * max(len(b), len(a))
    if zero_phase:
        if x.shape[1] <= padlen:
            raise EpochTooShort(
                f"zero-phase filtering needs more than {padlen} samples, "
                f"epoch has {x.shape[1]}"
            )
        return sps.filtfilt(b, a, x, axis=1)
    return sps.lfilter(b, a, x, axis=1)


def filter_epoch(epoch: Epoch, coeffs: FilterCoefficients, zero_phase: bool = True) -> Epoch:
    """Filter every channel of an epoch; sample data is replaced, metadata kept."""
    return epoch.with_samples(filter_array(epoch.samples, coeffs, zero_phase))


def resample(epoch: Epoch, target_fs_hz: float) -> Epoch:
    """Decimate to target_fs_hz; the current rate must be an integer multiple.

    Keeps every k-th sample starting at index 0, where k = fs / target.
    The caller is expected to band-limit first (see design_bandpass).
    """
    fs = epoch.fs_hz
    if target_fs_hz <= 0:
        raise NonIntegerRatio(f"target rate must be positive, got {target_fs_hz}")
    ratio = fs / target_fs_hz
    k = int(round(ratio))
    if abs(ratio - k) > 1e-9 or k < 1:
        raise NonIntegerRatio(
            f"{fs} Hz is not an integer multiple of {target_fs_hz} Hz"
        )
    if k == 1:
        return epoch
    n_out = epoch.n_samples // k
    sliced = epoch.samples[:, : n_out * k : k]
    return Epoch(sliced, target_fs_hz, epoch.label, epoch.kind)


def crop_epoch(epoch: Epoch, n_samples: int) -> Epoch:
    """Keep the first n_samples of every channel."""
    if epoch.n_samples < n_samples:
        raise EpochTooShort(
            f"cannot crop {epoch.n_samples} samples to {n_samples}"
        )
    if epoch.n_samples == n_samples:
        return epoch
    return epoch.with_samples(epoch.samples[:, :n_samples])


def _band_mask(freqs: np.ndarray, band: tuple[float, float]) -> np.ndarray:
    return (freqs >= band[0]) & (freqs <= band[1])


def welch_band_power(
    x: np.ndarray,
    fs_hz: float,
    band: tuple[float, float],
    window_len: int = 512,
    overlap: float = 0.5,
) -> float | np.ndarray:
    """Integrated Welch PSD over [band[0], band[1]] (Hann, constant detrend).

    x may be 1-D (one channel) or 2-D (channels, time); the band power is
    returned per channel in the 2-D case.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    low, high = float(band[0]), float(band[1])
    if not (0.0 < low < high):
        raise BandOutOfRange(f"need 0 < low < high, got ({low}, {high})")
    if high >= fs_hz / 2.0:
        raise BandOutOfRange(
            f"band ({low}, {high}) exceeds (0, {fs_hz / 2.0}) for fs {fs_hz} Hz"
        )
    if not 0.0 <= overlap < 1.0:
        raise BandOutOfRange(f"overlap must be in [0, 1), got {overlap}")
    if window_len > n:
        raise WindowTooLong(f"window of {window_len} samples exceeds signal of {n}")
    freqs, psd = sps.welch(
        x,
        fs=fs_hz,
        window="hann",
        nperseg=window_len,
        noverlap=int(round(overlap * window_len)),
        detrend="constant",
        scaling="density",
        axis=-1,
    )
    df = freqs[1] - freqs[0]
    power = psd[..., _band_mask(freqs, (low, high))].sum(axis=-1) * df
    if power.ndim == 0:
        return float(power)
    return power


@dataclass(frozen=True)
class TendencyResult:
    """Per-channel OLS slope of windowed band power, in power units per second."""

    per_channel_slope: np.ndarray
    band: tuple[float, float]
    window_len_s: float
    step_s: float
    window_centers_s: np.ndarray
    window_power: np.ndarray  # (n_windows, n_channels)

    def mean_slope(self, channel_indices=None) -> float:
        sl = self.per_channel_slope
        if channel_indices is not None:
            sl = sl[list(channel_indices)]
        return float(np.mean(sl))


def alpha_tendency(
    epoch: Epoch,
    band: tuple[float, float] = (8.0, 13.0),
    window_len_s: float = 1.0,
    step_s: float = 0.25,
) -> TendencyResult:
    """Slope of band power over time, per channel.

    Band power is estimated in sliding windows (one Hann periodogram per
    window) and the tendency is the least-squares slope of power against
    window-center time.
    """
    fs = epoch.fs_hz
    win = int(round(window_len_s * fs))
    step = int(round(step_s * fs))
    if win < 4 or step < 1:
        raise EpochTooShort(
            f"window {window_len_s}s / step {step_s}s too small at {fs} Hz"
        )
    n = epoch.n_samples
    if n < win + step:
        raise EpochTooShort(
            f"epoch of {n} samples cannot hold two {win}-sample windows {step} apart"
        )
    starts = np.arange(0, n - win + 1, step)
    centers = (starts + win / 2.0) / fs
    powers = np.empty((len(starts), epoch.n_channels))
    for i, s in enumerate(starts):
        seg = epoch.samples[:, s : s + win]
        powers[i] = welch_band_power(seg, fs, band, window_len=win, overlap=0.0)
    slopes = np.polyfit(centers, powers, 1)[0]
    return TendencyResult(
        per_channel_slope=slopes,
        band=(float(band[0]), float(band[1])),
        window_len_s=window_len_s,
        step_s=step_s,
        window_centers_s=centers,
        window_power=powers,
    )


def stationarity_tolerance(
    fs_hz: float,
    n_samples: int,
    band: tuple[float, float] = (8.0, 13.0),
    window_len_s: float = 1.0,
    step_s: float = 0.25,
    amplitude: float = 1.0,
    noise_sigma: float = 0.3,
    n_draws: int = 100,
    seed: int = 0,
) -> float:
    """Three sigma of tendency slopes over stationary sine-plus-noise draws.

    Slopes with magnitude below this are indistinguishable from a flat
    power profile at the given analysis settings.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / fs_hz
    f0 = 0.5 * (band[0] + band[1])
    slopes = np.empty(n_draws)
    for i in range(n_draws):
        phase = rng.uniform(0.0, 2.0 * np.pi)
        x = amplitude * np.sin(2.0 * np.pi * f0 * t + phase)
        x = x + noise_sigma * rng.standard_normal(n_samples)
        ep = Epoch(x[None, :], fs_hz, 0, "imagery")
        slopes[i] = alpha_tendency(ep, band, window_len_s, step_s).per_channel_slope[0]
    return float(3.0 * np.std(slopes))
