"""Dataset directory format: a JSON manifest plus one raw payload per trial.

Layout:
    <dir>/manifest.json
    <dir>/trials/trial_0000.f32
    ...

The manifest records name, fs_hz, n_channels, channel_names, occipital
channels, n_samples, class names, and one {file, label, kind} entry per
trial. Payloads are raw little-endian IEEE-754 float32, channel-major,
exactly n_channels * n_samples * 4 bytes. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Dataset, Epoch, Montage, TrialKind
from .errors import (
    ChannelMismatch,
    DatasetIoError,
    ManifestError,
    MissingManifest,
    TruncatedPayload,
)

MANIFEST_NAME = "manifest.json"
_REQUIRED_KEYS = (
    "name",
    "fs_hz",
    "n_channels",
    "channel_names",
    "occipital_channels",
    "n_samples",
    "classes",
    "trials",
)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write the dataset to a directory, creating it if needed."""
    root = Path(path)
    try:
        (root / "trials").mkdir(parents=True, exist_ok=True)
        trials = []
        for i, ep in enumerate(dataset.epochs):
            rel = f"trials/trial_{i:04d}.f32"
            payload = np.ascontiguousarray(ep.samples, dtype="<f4")
            (root / rel).write_bytes(payload.tobytes(order="C"))
            trials.append({"file": rel, "label": ep.label, "kind": ep.kind.value})
        manifest = {
            "name": dataset.name,
            "fs_hz": dataset.fs_hz,
            "n_channels": dataset.montage.n_channels,
            "channel_names": list(dataset.montage.channel_names),
            "occipital_channels": list(dataset.montage.occipital_names),
            "n_samples": dataset.n_samples if dataset.epochs else 0,
            "classes": list(dataset.classes),
            "trials": trials,
        }
        (root / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise DatasetIoError(f"cannot write dataset at {root}: {exc}") from exc


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset directory written by save_dataset."""
    root = Path(path)
    mpath = root / MANIFEST_NAME
    if not mpath.is_file():
        raise MissingManifest(f"no {MANIFEST_NAME} in {root}")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DatasetIoError(f"cannot read {mpath}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from exc

    missing = [k for k in _REQUIRED_KEYS if k not in manifest]
    if missing:
        raise ManifestError(f"manifest lacks keys: {missing}")

    n_channels = int(manifest["n_channels"])
    n_samples = int(manifest["n_samples"])
    names = tuple(manifest["channel_names"])
    if len(names) != n_channels:
        raise ChannelMismatch(
            f"manifest says {n_channels} channels but names {len(names)}"
        )
    montage = Montage(names, tuple(manifest["occipital_channels"]))
    fs_hz = float(manifest["fs_hz"])

    expected = n_channels * n_samples * 4
    epochs = []
    for entry in manifest["trials"]:
        try:
            rel, label, kind = entry["file"], entry["label"], entry["kind"]
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"malformed trial entry {entry!r}") from exc
        fpath = root / rel
        try:
            raw = fpath.read_bytes()
        except OSError as exc:
            raise DatasetIoError(f"cannot read payload {fpath}: {exc}") from exc
        if len(raw) != expected:
            raise TruncatedPayload(
                f"{fpath} holds {len(raw)} bytes, expected {expected}"
            )
        samples = np.frombuffer(raw, dtype="<f4").reshape(n_channels, n_samples)
        epochs.append(Epoch(samples, fs_hz, int(label), TrialKind(kind)))

    return Dataset(
        name=str(manifest["name"]),
        montage=montage,
        fs_hz=fs_hz,
        classes=tuple(manifest["classes"]),
        epochs=tuple(epochs),
    )
