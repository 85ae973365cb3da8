"""Synthetic EEG with known alpha-band ground truth.

Every trial is white noise plus a band-limited oscillation on the occipital
channels whose amplitude ramps linearly over the trial: upward for imagery
trials, downward for perception trials. Class identity is carried by a
per-class spatial mixing pattern over the occipital channels, so it
survives any per-channel amplitude rescaling. Each trial draws its
randomness from a seed derived from (seed, kind, class, trial), making
generation deterministic regardless of iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, Epoch, Montage, TrialKind
from .dsp import alpha_tendency
from .errors import EmptyDataset, InvalidConfig

_NON_OCCIPITAL_POOL = (
    "Fp1", "Fp2", "F3", "Fz", "F4", "C3", "Cz", "C4", "T7", "T8", "P3", "P4",
    "F7", "F8", "FC1", "FC2", "FC5", "FC6", "CP1", "CP2", "CP5", "CP6",
    "P7", "P8", "Pz", "AF3", "AF4", "F1", "F2", "F5", "F6", "C1", "C2",
    "C5", "C6", "FT7", "FT8", "TP7", "TP8", "P1", "P2", "P5", "P6",
    "AF7", "AF8", "AFz", "F3h", "F4h", "FCz", "CPz",
)
_OCCIPITAL_POOL = ("O1", "Oz", "O2", "POz", "PO3", "PO4", "PO7", "PO8", "Iz")

_KIND_CODE = {TrialKind.IMAGERY: 1, TrialKind.PERCEPTION: 2}


@dataclass(frozen=True)
class SynthConfig:
    n_channels: int = 16
    fs_hz: float = 250.0
    n_samples: int = 1251
    classes: tuple[str, ...] = ("PP", "PW", "OD", "EF")
    trials_per_class_imagery: int = 50
    trials_per_class_perception: int = 100
    alpha_center_hz: float = 10.0
    alpha_jitter_hz: float = 0.5
    imagery_ramp: float = 1.0
    perception_ramp: float = -0.6
    imagery_amplitude: float = 1.0
    perception_amplitude: float = 2.0
    noise_sigma: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.n_channels < 2:
            raise InvalidConfig("need at least two channels (one occipital, one not)")
        if self.imagery_ramp <= 0:
            raise InvalidConfig("imagery ramp must be positive (rising amplitude)")
        if self.perception_ramp >= 0:
            raise InvalidConfig("perception ramp must be negative (falling amplitude)")
        if not -1.0 < self.perception_ramp:
            raise InvalidConfig("perception ramp below -1 would cross zero amplitude")
        if self.noise_sigma < 0:
            raise InvalidConfig("noise sigma must be non-negative")
        if self.n_samples < 64:
            raise InvalidConfig(f"trials of {self.n_samples} samples are too short")


def synth_montage(n_channels: int) -> Montage:
    """Standard channel names with roughly a quarter designated occipital."""
    n_occ = min(max(1, n_channels // 4), len(_OCCIPITAL_POOL))
    n_other = n_channels - n_occ
    if n_other > len(_NON_OCCIPITAL_POOL):
        raise InvalidConfig(
            f"cannot name {n_channels} channels; at most "
            f"{len(_NON_OCCIPITAL_POOL) + len(_OCCIPITAL_POOL)} supported"
        )
    names = _NON_OCCIPITAL_POOL[:n_other] + _OCCIPITAL_POOL[:n_occ]
    return Montage(names, _OCCIPITAL_POOL[:n_occ])


def class_patterns(n_classes: int, n_occipital: int) -> np.ndarray:
    """Spatial mixing weights (class, occipital channel).

    Every class leans on its own dominant occipital channel with a shared
    floor elsewhere, so classes differ in the ratio of oscillation to noise
    per channel — a contrast that survives per-channel rescaling.
    """
    pat = np.full((n_classes, n_occipital), 0.35)
    for k in range(n_classes):
        pat[k, k % n_occipital] = 1.0
    return pat


def _synth_trial(config: SynthConfig, kind: TrialKind, label: int, trial: int,
                 pattern: np.ndarray, occ_idx: tuple[int, ...]) -> Epoch:
    rng = np.random.default_rng(
        np.random.SeedSequence([config.seed, _KIND_CODE[kind], label, trial])
    )
    n, fs = config.n_samples, config.fs_hz
    t = np.arange(n) / fs
    duration = n / fs
    if kind is TrialKind.IMAGERY:
        amp0, ramp = config.imagery_amplitude, config.imagery_ramp
    else:
        amp0, ramp = config.perception_amplitude, config.perception_ramp
    envelope = amp0 * (1.0 + ramp * t / duration)
    freq = config.alpha_center_hz + rng.uniform(-config.alpha_jitter_hz, config.alpha_jitter_hz)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    alpha = envelope * np.sin(2.0 * np.pi * freq * t + phase)
    x = config.noise_sigma * rng.standard_normal((config.n_channels, n))
    for j, ch in enumerate(occ_idx):
        x[ch] += pattern[label, j] * alpha
    return Epoch(x, fs, label, kind)


def generate_synthetic(config: SynthConfig = SynthConfig()):
    """Build the (imagery, perception) dataset pair for the config."""
    montage = synth_montage(config.n_channels)
    occ_idx = montage.occipital_indices
    pattern = class_patterns(len(config.classes), len(occ_idx))
    datasets = []
    for kind, per_class, name in (
        (TrialKind.IMAGERY, config.trials_per_class_imagery, "synthetic-imagery"),
        (TrialKind.PERCEPTION, config.trials_per_class_perception, "synthetic-perception"),
    ):
        epochs = []
        for label in range(len(config.classes)):
            for trial in range(per_class):
                epochs.append(
                    _synth_trial(config, kind, label, trial, pattern, occ_idx)
                )
        datasets.append(
            Dataset(name, montage, config.fs_hz, config.classes, tuple(epochs))
        )
    return datasets[0], datasets[1]


def _expected_sign(value) -> int:
    if isinstance(value, str):
        value = {"positive": 1, "+": 1, "negative": -1, "-": -1}.get(value.lower(), 0)
    sign = int(np.sign(value))
    if sign == 0:
        raise InvalidConfig(f"expected_sign must be positive or negative, got {value!r}")
    return sign


def verify_tendency(
    dataset: Dataset,
    expected_sign,
    band: tuple[float, float] = (8.0, 13.0),
    window_len_s: float = 1.0,
    step_s: float = 0.25,
) -> float:
    """Fraction of trials whose mean occipital tendency matches the sign."""
    sign = _expected_sign(expected_sign)
    if len(dataset) == 0:
        raise EmptyDataset("cannot verify tendencies of an empty dataset")
    occ = dataset.montage.occipital_indices
    hits = 0
    for ep in dataset.epochs:
        res = alpha_tendency(ep, band, window_len_s, step_s)
        if np.sign(res.mean_slope(occ)) == sign:
            hits += 1
    return hits / len(dataset)
