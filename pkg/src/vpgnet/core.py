"""Core EEG data types: montage, epoch, dataset.

All three are frozen after construction. Epoch sample arrays are stored as
float32 with the writeable flag cleared, so downstream transforms can share
references safely and must allocate their own outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    ChannelMismatch,
    EmptyChannels,
    EmptyDataset,
    LabelOutOfRange,
    NonFiniteSample,
)

# Channels treated as occipital when a montage does not name its own set.
DEFAULT_OCCIPITAL = ("O1", "O2", "Oz", "Iz", "POz", "PO3", "PO4", "PO7", "PO8")


class TrialKind(str, Enum):
    IMAGERY = "imagery"
    PERCEPTION = "perception"


@dataclass(frozen=True)
class Montage:
    """Channel naming plus the subset considered occipital.

    occipital_names defaults to the intersection of channel_names with
    DEFAULT_OCCIPITAL, preserving channel order.
    """

    channel_names: tuple[str, ...]
    occipital_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        names = tuple(str(n) for n in self.channel_names)
        if len(names) == 0:
            raise EmptyChannels("montage has no channels")
        if len(set(names)) != len(names):
            raise ChannelMismatch("duplicate channel names in montage")
        object.__setattr__(self, "channel_names", names)
        occ = tuple(str(n) for n in self.occipital_names)
        if not occ:
            occ = tuple(n for n in names if n in DEFAULT_OCCIPITAL)
        unknown = [n for n in occ if n not in names]
        if unknown:
            raise ChannelMismatch(f"occipital channels not in montage: {unknown}")
        object.__setattr__(self, "occipital_names", occ)

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    def index(self, name: str) -> int:
        try:
            return self.channel_names.index(name)
        except ValueError:
            raise ChannelMismatch(f"no channel named {name!r}") from None

    @property
    def occipital_indices(self) -> tuple[int, ...]:
        return tuple(self.index(n) for n in self.occipital_names)

    def subset(self, names: tuple[str, ...]) -> "Montage":
        """New montage keeping only the named channels, in the given order."""
        occ = tuple(n for n in names if n in self.occipital_names)
        for n in names:
            self.index(n)  # raises ChannelMismatch on unknown names
        return Montage(tuple(names), occ)


@dataclass(frozen=True)
class Epoch:
    """One trial: (channels, samples) float32 plus label and kind.

    Construction normalizes dtype/layout and freezes the array; semantic
    validation (finiteness, label range, montage fit) lives in
    validate_epoch so that invalid epochs can exist transiently in tests.
    """

    samples: np.ndarray
    fs_hz: float
    label: int
    kind: TrialKind

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 2:
            raise EmptyChannels(f"samples must be 2-D (channels, time), got shape {arr.shape}")
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "fs_hz", float(self.fs_hz))
        object.__setattr__(self, "label", int(self.label))
        object.__setattr__(self, "kind", TrialKind(self.kind))

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.fs_hz

    def with_samples(self, samples: np.ndarray) -> "Epoch":
        """Copy of this epoch with new sample data, metadata unchanged."""
        return Epoch(samples, self.fs_hz, self.label, self.kind)


def validate_epoch(epoch: Epoch, montage: Montage, n_classes: int | None = None) -> None:
    """Raise a typed error if the epoch violates a structural invariant."""
    if epoch.n_channels == 0 or epoch.n_samples == 0:
        raise EmptyChannels("epoch has no data")
    if epoch.n_channels != montage.n_channels:
        raise ChannelMismatch(
            f"epoch has {epoch.n_channels} channels, montage has {montage.n_channels}"
        )
    if not np.isfinite(epoch.samples).all():
        bad = int(np.flatnonzero(~np.isfinite(epoch.samples).ravel())[0])
        raise NonFiniteSample(f"non-finite sample at flat index {bad}")
    if epoch.label < 0:
        raise LabelOutOfRange(f"label {epoch.label} is negative")
    if n_classes is not None and epoch.label >= n_classes:
        raise LabelOutOfRange(f"label {epoch.label} not below class count {n_classes}")


@dataclass(frozen=True)
class Dataset:
    """A homogeneous collection of epochs sharing montage, rate, and length."""

    name: str
    montage: Montage
    fs_hz: float
    classes: tuple[str, ...]
    epochs: tuple[Epoch, ...]

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(str(c) for c in self.classes))
        object.__setattr__(self, "epochs", tuple(self.epochs))
        object.__setattr__(self, "fs_hz", float(self.fs_hz))
        if not self.classes:
            raise LabelOutOfRange("dataset declares no classes")
        n_samples = None
        for i, ep in enumerate(self.epochs):
            if ep.fs_hz != self.fs_hz:
                raise ChannelMismatch(
                    f"epoch {i} sampled at {ep.fs_hz} Hz, dataset at {self.fs_hz} Hz"
                )
            if n_samples is None:
                n_samples = ep.n_samples
            elif ep.n_samples != n_samples:
                raise ChannelMismatch(
                    f"epoch {i} has {ep.n_samples} samples, expected {n_samples}"
                )
            validate_epoch(ep, self.montage, n_classes=len(self.classes))

    def __len__(self) -> int:
        return len(self.epochs)

    @property
    def n_samples(self) -> int:
        if not self.epochs:
            raise EmptyDataset("dataset has no epochs")
        return self.epochs[0].n_samples

    @property
    def labels(self) -> np.ndarray:
        return np.array([ep.label for ep in self.epochs], dtype=np.int64)

    def select_channels(self, names: tuple[str, ...]) -> "Dataset":
        """Dataset restricted to the named channels, order as given."""
        idx = [self.montage.index(n) for n in names]
        sub = self.montage.subset(tuple(names))
        eps = tuple(ep.with_samples(ep.samples[idx, :]) for ep in self.epochs)
        return Dataset(self.name, sub, self.fs_hz, self.classes, eps)
