"""Typed errors raised across the package.

Everything derives from VpgError so callers can catch one base class at the
CLI boundary and still discriminate precisely in tests.
"""


class VpgError(Exception):
    """Base class for all package errors."""


# dataset structure and I/O

class MissingManifest(VpgError):
    """The dataset directory has no readable manifest."""


class ManifestError(VpgError):
    """The manifest exists but its contents are malformed."""


class TruncatedPayload(VpgError):
    """A trial payload's byte count disagrees with the manifest."""


class ChannelMismatch(VpgError):
    """Channel counts or names disagree between two structures."""


class NonFiniteSample(VpgError):
    """An epoch contains NaN or infinity."""


class EmptyChannels(VpgError):
    """An epoch or montage has no channels."""


class LabelOutOfRange(VpgError):
    """A class label is negative or not below the class count."""


class DatasetIoError(VpgError):
    """Reading or writing dataset files failed at the OS level."""


class EmptyDataset(VpgError):
    """An operation needs at least one epoch."""


class IncompatibleDatasets(VpgError):
    """Two datasets disagree on montage, rate, or trial kind."""


# signal processing

class InvalidBand(VpgError):
    """Band edges are not ordered or not positive."""


class NyquistViolation(VpgError):
    """A band edge reaches or exceeds half the sampling rate."""


class UnstableFilter(VpgError):
    """Filter denominator has a pole on or outside the unit circle."""


class NonIntegerRatio(VpgError):
    """Resampling rate does not divide the current rate."""


class BandOutOfRange(VpgError):
    """Requested power band falls outside (0, fs/2)."""


class WindowTooLong(VpgError):
    """Analysis window exceeds the available samples."""


class EpochTooShort(VpgError):
    """The epoch cannot hold the requested analysis windows."""


# transforms

class DegenerateRange(VpgError):
    """Min-max scaling is undefined: max equals min."""


class InputOutOfRange(VpgError):
    """Reversal input must lie in [0, 1]."""


# network

class ShapeMismatch(VpgError):
    """Tensor shape disagrees with what a layer or stage requires."""


class KernelTooLarge(VpgError):
    """Convolution or pool kernel exceeds its input extent."""


class MissingLabel(VpgError):
    """A training batch lacks labels."""


class InvalidEpsilon(VpgError):
    """Finite-difference step must be positive."""


class CheckpointError(VpgError):
    """A model checkpoint is missing, truncated, or malformed."""


# experiments

class TooFewPerClass(VpgError):
    """Stratified folding needs at least k trials of every class."""


class InvalidConfig(VpgError):
    """An experiment or synthesis configuration value is unusable."""
