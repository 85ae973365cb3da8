"""Min-max scaling, reference reversal, and training-set assembly.

The reversal maps a scaled epoch x in [0, 1] to r - x where r is a constant
reference matrix: zeros (default, output range [-1, 0]) or ones (output
range [0, 1], order-reversing). Note that subtraction from a constant
negates the samples but leaves their spectral power untouched, so band-power
trajectories are preserved by this transform, not flipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import Epoch, TrialKind
from .errors import DegenerateRange, InputOutOfRange, IncompatibleDatasets

# slack for float round-off when validating reversal inputs
_RANGE_SLACK = 1e-9


class NormScope(str, Enum):
    PER_CHANNEL = "channel"
    PER_TRIAL = "trial"


class Reference(str, Enum):
    ZEROS = "zeros"
    ONES = "ones"


@dataclass(frozen=True)
class ReversalConfig:
    reference: Reference = Reference.ZEROS

    def __post_init__(self):
        object.__setattr__(self, "reference", Reference(self.reference))


@dataclass(frozen=True)
class NormRecord:
    """Undo information for one normalization: scope plus extrema.

    mins/maxs have one entry per channel for PER_CHANNEL scope and a single
    entry for PER_TRIAL.
    """

    scope: NormScope
    mins: np.ndarray
    maxs: np.ndarray


class Regime(str, Enum):
    VI_ONLY = "vi_only"
    VI_PLUS_VP = "vi_plus_vp"


PROVENANCE_IMAGERY = "imagery"
PROVENANCE_MODIFIED = "modified_perception"


@dataclass(frozen=True)
class TrainSet:
    """Assembled training epochs with per-epoch provenance tags."""

    epochs: tuple[Epoch, ...]
    regime: Regime
    provenance: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "epochs", tuple(self.epochs))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        object.__setattr__(self, "regime", Regime(self.regime))
        if len(self.epochs) != len(self.provenance):
            raise IncompatibleDatasets("provenance must tag every epoch")
        if self.regime is Regime.VI_ONLY and PROVENANCE_MODIFIED in self.provenance:
            raise IncompatibleDatasets("vi_only set cannot contain perception data")

    def __len__(self) -> int:
        return len(self.epochs)

    @property
    def labels(self) -> np.ndarray:
        return np.array([ep.label for ep in self.epochs], dtype=np.int64)


def normalize_array(x: np.ndarray, scope: NormScope = NormScope.PER_CHANNEL):
    """Min-max scale to [0, 1]; returns (scaled, mins, maxs).

    Output dtype follows the input. Extrema are computed per channel (row)
    or over the whole array depending on scope.
    """
    x = np.asarray(x)
    scope = NormScope(scope)
    if scope is NormScope.PER_CHANNEL:
        mins = x.min(axis=1)
        maxs = x.max(axis=1)
        flat = np.flatnonzero(maxs == mins)
        if flat.size:
            raise DegenerateRange(f"constant channels: {flat.tolist()}")
        out = (x - mins[:, None]) / (maxs - mins)[:, None]
    else:
        mins = np.array([x.min()])
        maxs = np.array([x.max()])
        if maxs[0] == mins[0]:
            raise DegenerateRange("constant trial: max equals min")
        out = (x - mins[0]) / (maxs[0] - mins[0])
    return out.astype(x.dtype, copy=False), mins.astype(np.float64), maxs.astype(np.float64)


def reverse_array(x: np.ndarray, reference: Reference = Reference.ZEROS) -> np.ndarray:
    """Subtract x from a constant reference matrix (zeros or ones)."""
    x = np.asarray(x)
    lo = x.min()
    hi = x.max()
    if lo < -_RANGE_SLACK or hi > 1.0 + _RANGE_SLACK:
        raise InputOutOfRange(
            f"reversal input must lie in [0, 1], got [{lo}, {hi}]"
        )
    ref = 0.0 if Reference(reference) is Reference.ZEROS else 1.0
    return (np.asarray(ref, dtype=x.dtype) - x).astype(x.dtype, copy=False)


def minmax_normalize(epoch: Epoch, scope: NormScope = NormScope.PER_CHANNEL):
    """Scaled copy of the epoch plus the NormRecord needed to undo it."""
    scope = NormScope(scope)
    out, mins, maxs = normalize_array(epoch.samples, scope)
    return epoch.with_samples(out), NormRecord(scope, mins, maxs)


def denormalize(epoch: Epoch, record: NormRecord) -> Epoch:
    """Inverse of minmax_normalize given its NormRecord."""
    x = epoch.samples.astype(np.float64)
    if record.scope is NormScope.PER_CHANNEL:
        y = x * (record.maxs - record.mins)[:, None] + record.mins[:, None]
    else:
        y = x * (record.maxs[0] - record.mins[0]) + record.mins[0]
    return epoch.with_samples(y)


def reverse_modify(epoch: Epoch, config: ReversalConfig = ReversalConfig()) -> Epoch:
    """Reversed copy of a normalized epoch (see module docstring)."""
    return epoch.with_samples(reverse_array(epoch.samples, config.reference))


def assemble_training_set(
    imagery: tuple[Epoch, ...],
    perception: tuple[Epoch, ...] = (),
    regime: Regime = Regime.VI_ONLY,
    reversal: ReversalConfig = ReversalConfig(),
    scope: NormScope = NormScope.PER_CHANNEL,
) -> TrainSet:
    """Build the network's training set for one regime.

    Imagery epochs are min-max scaled on their own statistics. Under the
    vi_plus_vp regime every perception epoch is scaled the same way, then
    reversed against the configured reference, and joins the set with its
    own label. Inputs are never mutated; all epochs are fresh copies.
    """
    regime = Regime(regime)
    for ep in imagery:
        if ep.kind is not TrialKind.IMAGERY:
            raise IncompatibleDatasets(f"expected imagery epochs, got {ep.kind.value}")
    epochs: list[Epoch] = []
    tags: list[str] = []
    for ep in imagery:
        scaled, _ = minmax_normalize(ep, scope)
        epochs.append(scaled)
        tags.append(PROVENANCE_IMAGERY)
    if regime is Regime.VI_PLUS_VP:
        for ep in perception:
            if ep.kind is not TrialKind.PERCEPTION:
                raise IncompatibleDatasets(
                    f"expected perception epochs, got {ep.kind.value}"
                )
            scaled, _ = minmax_normalize(ep, scope)
            epochs.append(reverse_modify(scaled, reversal))
            tags.append(PROVENANCE_MODIFIED)
    return TrainSet(tuple(epochs), regime, tuple(tags))
