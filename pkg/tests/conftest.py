"""Shared fixtures: a small montage, a dataset builder, a reduced network."""

import numpy as np
import pytest

from vpgnet import Dataset, Epoch, LayerSpec, ModelSpec, Montage, TrialKind


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def montage8():
    # two occipital channels by default-name intersection
    return Montage(("Fp1", "Fp2", "C3", "C4", "P3", "P4", "O1", "O2"))


@pytest.fixture
def make_dataset(montage8):
    """Factory for a small random dataset with controllable kind and counts."""

    def build(n_epochs=6, kind=TrialKind.IMAGERY, n_samples=200, fs=250.0,
              n_classes=4, seed=0, name="unit"):
        r = np.random.default_rng(seed)
        eps = tuple(
            Epoch(r.standard_normal((montage8.n_channels, n_samples)), fs,
                  i % n_classes, kind)
            for i in range(n_epochs)
        )
        classes = tuple(f"c{i}" for i in range(n_classes))
        return Dataset(name, montage8, fs, classes, eps)

    return build


@pytest.fixture
def reduced_spec():
    """Every layer kind at gradient-checkable size: 8 channels, 200 samples."""
    stages = (
        LayerSpec("conv", out_maps=3, kernel=(1, 7)),
        LayerSpec("conv", out_maps=3, kernel=(8, 1)),
        LayerSpec("conv", out_maps=4, kernel=(1, 5)),
        LayerSpec("conv", out_maps=5, kernel=(1, 3)),
        LayerSpec("dropout", rate=0.5),
        LayerSpec("maxpool", kernel=(1, 7)),
        LayerSpec("conv", out_maps=6, kernel=(1, 3)),
        LayerSpec("maxpool", kernel=(1, 2)),
        LayerSpec("conv", out_maps=7, kernel=(1, 2)),
        LayerSpec("maxpool", kernel=(1, 2)),
        LayerSpec("flatten"),
        LayerSpec("softmax"),
    )
    return ModelSpec(8, 200, stages, 4)
