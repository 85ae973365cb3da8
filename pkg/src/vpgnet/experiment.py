"""Cross-validated comparison of the two training regimes.

Imagery trials are split into stratified folds; perception trials (when the
regime uses them) join every training fold after scaling and reversal and
never reach a test fold. A fixed stratified tenth of each training fold is
carved out for early stopping. All randomness descends from SeedSequence
children of the single experiment seed, so a (config, seed) pair yields an
identical report apart from its wall-clock field.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import Dataset, TrialKind
from .errors import (
    EmptyDataset,
    IncompatibleDatasets,
    InvalidConfig,
    TooFewPerClass,
)
from .models import build_compact_net, build_proposed_net, proposed_net_spec
from .nn.layers import Model
from .nn.optim import Adam, AdamConfig
from .transform import (
    NormScope,
    Regime,
    ReversalConfig,
    assemble_training_set,
    minmax_normalize,
)


@dataclass(frozen=True)
class TrainingParams:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 16
    max_epochs: int = 100
    patience: int = 10
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise InvalidConfig("batch size, epochs, and patience must be positive")
        if not 0.0 < self.val_fraction < 0.5:
            raise InvalidConfig("validation fraction must be in (0, 0.5)")


@dataclass(frozen=True)
class ExperimentConfig:
    folds: int = 5
    seed: int = 0
    regimes: tuple[Regime, ...] = (Regime.VI_ONLY, Regime.VI_PLUS_VP)
    reversal: ReversalConfig = field(default_factory=ReversalConfig)
    scope: NormScope = NormScope.PER_CHANNEL
    training: TrainingParams = field(default_factory=TrainingParams)
    channels: tuple[str, ...] | None = None
    model: str = "proposed"

    def __post_init__(self):
        object.__setattr__(self, "regimes", tuple(Regime(r) for r in self.regimes))
        object.__setattr__(self, "scope", NormScope(self.scope))
        if self.folds < 2:
            raise InvalidConfig(f"need at least 2 folds, got {self.folds}")
        if not self.regimes:
            raise InvalidConfig("at least one regime is required")
        if self.model not in ("proposed", "compact"):
            raise InvalidConfig(f"model must be proposed or compact, got {self.model!r}")

    def echo(self) -> dict:
        return {
            "folds": self.folds,
            "seed": self.seed,
            "regimes": [r.value for r in self.regimes],
            "reversal": self.reversal.reference.value,
            "scope": self.scope.value,
            "channels": None if self.channels is None else list(self.channels),
            "model": self.model,
            "training": {
                "learning_rate": self.training.learning_rate,
                "beta1": self.training.beta1,
                "beta2": self.training.beta2,
                "epsilon": self.training.epsilon,
                "batch_size": self.training.batch_size,
                "max_epochs": self.training.max_epochs,
                "patience": self.training.patience,
                "val_fraction": self.training.val_fraction,
            },
        }


@dataclass(frozen=True)
class RegimeResult:
    fold_accuracies: tuple[float, ...]
    mean: float
    std: float


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    seed: int
    regimes: dict  # regime name -> RegimeResult
    wall_clock_s: float

    def canonical_dict(self, include_timing: bool = True) -> dict:
        out = {
            "config": self.config,
            "seed": self.seed,
            "regimes": {
                name: {
                    "folds": list(r.fold_accuracies),
                    "mean": r.mean,
                    "std": r.std,
                }
                for name, r in self.regimes.items()
            },
        }
        if include_timing:
            out["wall_clock_s"] = self.wall_clock_s
        return out

    def to_json(self) -> str:
        return json.dumps(self.canonical_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("regime,fold,accuracy\n")
        for name, r in self.regimes.items():
            for i, acc in enumerate(r.fold_accuracies):
                buf.write(f"{name},{i},{acc:.6f}\n")
            buf.write(f"{name},mean,{r.mean:.6f}\n")
            buf.write(f"{name},std,{r.std:.6f}\n")
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        d = json.loads(text)
        regimes = {
            name: RegimeResult(tuple(v["folds"]), v["mean"], v["std"])
            for name, v in d["regimes"].items()
        }
        return cls(d["config"], d["seed"], regimes, d.get("wall_clock_s", 0.0))


def write_report(report: ExperimentReport, json_path, csv_path=None) -> None:
    from pathlib import Path

    jp = Path(json_path)
    jp.parent.mkdir(parents=True, exist_ok=True)
    jp.write_text(report.to_json(), encoding="utf-8")
    if csv_path is not None:
        cp = Path(csv_path)
        cp.parent.mkdir(parents=True, exist_ok=True)
        cp.write_text(report.to_csv(), encoding="utf-8")


def kfold_split(labels: np.ndarray, k: int, seed: int):
    """Stratified k-fold: list of (train_indices, test_indices) pairs.

    Every class contributes near-equal counts to every fold; index arrays
    are sorted and the assignment is a pure function of (labels, k, seed).
    """
    labels = np.asarray(labels)
    if k < 2:
        raise InvalidConfig(f"need at least 2 folds, got {k}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 101]))
    fold_bins: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < k:
            raise TooFewPerClass(
                f"class {cls} has {idx.size} trials, fewer than {k} folds"
            )
        perm = rng.permutation(idx)
        for j, trial in enumerate(perm):
            fold_bins[j % k].append(int(trial))
    all_idx = np.arange(labels.size)
    folds = []
    for j in range(k):
        test = np.array(sorted(fold_bins[j]), dtype=np.int64)
        train = np.setdiff1d(all_idx, test)
        folds.append((train, test))
    return folds


def _stratified_carve(labels: np.ndarray, fraction: float, rng: np.random.Generator):
    """Split indices into (kept, carved) with a per-class share carved out."""
    keep, carve = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        n_carve = max(1, int(round(fraction * idx.size)))
        if n_carve >= idx.size:
            raise TooFewPerClass(
                f"class {cls} has {idx.size} trials, cannot carve {n_carve}"
            )
        perm = rng.permutation(idx)
        carve.extend(perm[:n_carve].tolist())
        keep.extend(perm[n_carve:].tolist())
    return np.array(sorted(keep)), np.array(sorted(carve))


def _epoch_tensor(epochs, scope=None):
    """Stack epochs into a (n, 1, channels, time) float32 batch."""
    if scope is None:
        arrs = [ep.samples for ep in epochs]
    else:
        arrs = [minmax_normalize(ep, scope)[0].samples for ep in epochs]
    x = np.stack(arrs).astype(np.float32)
    y = np.array([ep.label for ep in epochs], dtype=np.int64)
    return x[:, None, :, :], y


def _derived_seed(*parts) -> np.random.SeedSequence:
    return np.random.SeedSequence(list(parts))


def _eval_accuracy(model: Model, x: np.ndarray, y: np.ndarray, batch: int = 64) -> float:
    hits = 0
    for s in range(0, len(y), batch):
        probs = model.forward(x[s : s + batch], train=False)
        hits += int((probs.argmax(axis=1) == y[s : s + batch]).sum())
    return hits / len(y)


def _train_model(model, x, y, val_x, val_y, params: TrainingParams,
                 shuffle_rng, dropout_rng) -> None:
    adam = Adam(
        model.parameters(),
        AdamConfig(params.learning_rate, params.beta1, params.beta2, params.epsilon),
    )
    best_val = np.inf
    best = model.snapshot()
    bad = 0
    n = len(y)
    for _ in range(params.max_epochs):
        perm = shuffle_rng.permutation(n)
        for s in range(0, n, params.batch_size):
            sel = perm[s : s + params.batch_size]
            model.loss_and_grads(x[sel], y[sel], train=True, rng=dropout_rng)
            adam.step(model.gradients())
        val_loss = model.loss(val_x, val_y, train=False)
        if val_loss < best_val:
            best_val = val_loss
            best = model.snapshot()
            bad = 0
        else:
            bad += 1
            if bad >= params.patience:
                break
    model.restore(best)


_REGIME_CODE = {Regime.VI_ONLY: 1, Regime.VI_PLUS_VP: 2}


def _check_compat(vi: Dataset, vp: Dataset | None, config: ExperimentConfig) -> None:
    if len(vi) == 0:
        raise EmptyDataset("imagery dataset is empty")
    for ep in vi.epochs:
        if ep.kind is not TrialKind.IMAGERY:
            raise IncompatibleDatasets("vi dataset contains non-imagery trials")
    needs_vp = Regime.VI_PLUS_VP in config.regimes
    if needs_vp:
        if vp is None or len(vp) == 0:
            raise IncompatibleDatasets("vi_plus_vp regime needs perception trials")
        for ep in vp.epochs:
            if ep.kind is not TrialKind.PERCEPTION:
                raise IncompatibleDatasets("vp dataset contains non-perception trials")
        if vp.montage.channel_names != vi.montage.channel_names:
            raise IncompatibleDatasets("datasets disagree on channel names")
        if vp.fs_hz != vi.fs_hz:
            raise IncompatibleDatasets("datasets disagree on sampling rate")
        if vp.n_samples != vi.n_samples:
            raise IncompatibleDatasets("datasets disagree on trial length")
        if vp.classes != vi.classes:
            raise IncompatibleDatasets("datasets disagree on class names")


def _make_builder(config: ExperimentConfig, n_channels: int, time_len: int):
    if config.model == "proposed":
        needed = proposed_net_spec(n_channels).input_time_len
        if time_len != needed:
            raise InvalidConfig(
                f"the proposed net requires {needed}-sample trials, data has {time_len}"
            )
        return lambda seed: build_proposed_net(n_channels, seed=seed)
    return lambda seed: build_compact_net(n_channels, time_len, seed=seed)


def run_experiment(vi: Dataset, vp: Dataset | None, config: ExperimentConfig) -> ExperimentReport:
    """Train and score every configured regime across stratified folds."""
    t0 = time.perf_counter()
    _check_compat(vi, vp, config)
    if config.channels is not None:
        vi = vi.select_channels(tuple(config.channels))
        vp = None if vp is None else vp.select_channels(tuple(config.channels))

    n_channels, time_len = vi.montage.n_channels, vi.n_samples
    builder = _make_builder(config, n_channels, time_len)
    folds = kfold_split(vi.labels, config.folds, config.seed)
    params = config.training

    results = {}
    for regime in config.regimes:
        rc = _REGIME_CODE[regime]
        accuracies = []
        for f, (train_idx, test_idx) in enumerate(folds):
            carve_rng = np.random.default_rng(_derived_seed(config.seed, rc, f, 11))
            fit_idx, val_idx = _stratified_carve(
                vi.labels[train_idx], params.val_fraction, carve_rng
            )
            fit_epochs = [vi.epochs[i] for i in train_idx[fit_idx]]
            val_epochs = [vi.epochs[i] for i in train_idx[val_idx]]
            test_epochs = [vi.epochs[i] for i in test_idx]

            train_set = assemble_training_set(
                tuple(fit_epochs),
                () if regime is Regime.VI_ONLY else vp.epochs,
                regime,
                config.reversal,
                config.scope,
            )
            x, y = _epoch_tensor(train_set.epochs)
            val_x, val_y = _epoch_tensor(val_epochs, config.scope)
            test_x, test_y = _epoch_tensor(test_epochs, config.scope)

            model_seed = int(_derived_seed(config.seed, rc, f, 12).generate_state(1)[0])
            model = builder(model_seed)
            shuffle_rng = np.random.default_rng(_derived_seed(config.seed, rc, f, 13))
            dropout_rng = np.random.default_rng(_derived_seed(config.seed, rc, f, 14))
            _train_model(model, x, y, val_x, val_y, params, shuffle_rng, dropout_rng)
            accuracies.append(_eval_accuracy(model, test_x, test_y))
        arr = np.array(accuracies)
        results[regime.value] = RegimeResult(
            tuple(float(a) for a in accuracies), float(arr.mean()), float(arr.std())
        )

    return ExperimentReport(
        config=config.echo(),
        seed=config.seed,
        regimes=results,
        wall_clock_s=time.perf_counter() - t0,
    )


def paired_gain_test(gain_accuracies, base_accuracies):
    """One-sided paired t-test that the first sample exceeds the second.

    Returns (mean gap, p value). Inputs are paired per seed or per fold.
    """
    gain = np.asarray(gain_accuracies, dtype=np.float64)
    base = np.asarray(base_accuracies, dtype=np.float64)
    if gain.shape != base.shape or gain.size < 2:
        raise InvalidConfig("paired test needs two equal-length samples of size >= 2")
    stat = stats.ttest_rel(gain, base, alternative="greater")
    return float(gain.mean() - base.mean()), float(stat.pvalue)
