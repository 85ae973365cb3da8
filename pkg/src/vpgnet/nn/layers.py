"""From-scratch network layers and the model container.

All layers implement forward/backward against the selected kernel backend.
Parameters and their gradients are exposed as aligned lists of numpy arrays
so the optimizer can update in place. Convolutions are valid-padding
cross-correlations; every conv is followed by an ELU unless constructed
with activation=None.
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    InvalidConfig,
    KernelTooLarge,
    LabelOutOfRange,
    ShapeMismatch,
)
from . import kernels


def _as_rng(rng) -> np.random.Generator:
    if rng is None:
        return np.random.default_rng(0)
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(int(rng))


def _elu(z: np.ndarray) -> np.ndarray:
    y = z.copy()
    neg = z <= 0
    y[neg] = np.expm1(z[neg])
    return y


class Conv2D:
    """Cross-correlation over (space, time) with optional ELU."""

    def __init__(self, in_maps, out_maps, kernel, stride=(1, 1), activation="elu"):
        if activation not in ("elu", None):
            raise InvalidConfig(f"unsupported activation {activation!r}")
        self.in_maps = int(in_maps)
        self.out_maps = int(out_maps)
        self.kernel = (int(kernel[0]), int(kernel[1]))
        self.stride = (int(stride[0]), int(stride[1]))
        self.activation = activation
        self.w = None
        self.b = None
        self.gw = None
        self.gb = None
        self._x = None
        self._pos = None
        self._y = None

    def initialize(self, rng: np.random.Generator, dtype=np.float32):
        kh, kw = self.kernel
        fan_in = self.in_maps * kh * kw
        bound = 1.0 / np.sqrt(fan_in)
        self.w = rng.uniform(-bound, bound, (self.out_maps, self.in_maps, kh, kw)).astype(dtype)
        self.b = np.zeros(self.out_maps, dtype=dtype)

    def out_shape(self, in_shape):
        _, h, w = in_shape
        kh, kw = self.kernel
        sh, sw = self.stride
        if kh > h or kw > w:
            raise KernelTooLarge(
                f"kernel {self.kernel} exceeds input extent ({h}, {w})"
            )
        return (self.out_maps, (h - kh) // sh + 1, (w - kw) // sw + 1)

    def forward(self, x, train=False, rng=None):
        if x.shape[1] != self.in_maps:
            raise ShapeMismatch(f"expected {self.in_maps} input maps, got {x.shape[1]}")
        self.out_shape(x.shape[1:])
        self._x = x
        z = kernels.conv_forward(x, self.w, self.b, self.stride)
        if self.activation == "elu":
            self._pos = z > 0
            y = _elu(z)
            self._y = y
            return y
        self._pos = None
        return z

    def backward(self, gy):
        if self.activation == "elu":
            # dELU/dz is 1 where z > 0 and exp(z) = y + 1 elsewhere
            gy = gy * np.where(self._pos, gy.dtype.type(1), self._y + gy.dtype.type(1))
        gx, self.gw, self.gb = kernels.conv_backward(self._x, self.w, self.stride, gy)
        return gx

    @property
    def params(self):
        return [self.w, self.b]

    @property
    def grads(self):
        return [self.gw, self.gb]

    def config(self):
        return {
            "kind": "conv",
            "in_maps": self.in_maps,
            "out_maps": self.out_maps,
            "kernel": list(self.kernel),
            "stride": list(self.stride),
            "activation": self.activation,
        }


class MaxPool2D:
    def __init__(self, kernel, stride=None):
        self.kernel = (int(kernel[0]), int(kernel[1]))
        self.stride = self.kernel if stride is None else (int(stride[0]), int(stride[1]))
        self._idx = None
        self._x_shape = None

    def out_shape(self, in_shape):
        m, h, w = in_shape
        kh, kw = self.kernel
        sh, sw = self.stride
        if kh > h or kw > w:
            raise KernelTooLarge(
                f"pool {self.kernel} exceeds input extent ({h}, {w})"
            )
        return (m, (h - kh) // sh + 1, (w - kw) // sw + 1)

    def forward(self, x, train=False, rng=None):
        self.out_shape(x.shape[1:])
        self._x_shape = x.shape
        y, self._idx = kernels.maxpool_forward(x, self.kernel, self.stride)
        return y

    def backward(self, gy):
        return kernels.maxpool_backward(
            gy, self._idx, self._x_shape, self.kernel, self.stride
        )

    params = property(lambda self: [])
    grads = property(lambda self: [])

    def config(self):
        return {"kind": "maxpool", "kernel": list(self.kernel), "stride": list(self.stride)}


class Dropout:
    """Inverted dropout: active only when forward runs with train=True."""

    def __init__(self, rate=0.5):
        rate = float(rate)
        if not 0.0 <= rate < 1.0:
            raise InvalidConfig(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._mask = None

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        gen = _as_rng(rng)
        keep = gen.random(x.shape) >= self.rate
        self._mask = keep
        scale = x.dtype.type(1.0 / (1.0 - self.rate))
        return np.where(keep, x * scale, x.dtype.type(0))

    def backward(self, gy):
        if self._mask is None:
            return gy
        scale = gy.dtype.type(1.0 / (1.0 - self.rate))
        return np.where(self._mask, gy * scale, gy.dtype.type(0))

    params = property(lambda self: [])
    grads = property(lambda self: [])

    def config(self):
        return {"kind": "dropout", "rate": self.rate}


class Flatten:
    def __init__(self):
        self._in_shape = None

    def out_shape(self, in_shape):
        m, h, w = in_shape
        return (m * h * w,)

    def forward(self, x, train=False, rng=None):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, gy):
        return gy.reshape(self._in_shape)

    params = property(lambda self: [])
    grads = property(lambda self: [])

    def config(self):
        return {"kind": "flatten"}


class Dense:
    def __init__(self, in_features, out_features):
        self.in_features = int(in_features)
        self.out_features = int(out_features)
        self.w = None
        self.b = None
        self.gw = None
        self.gb = None
        self._x = None

    def initialize(self, rng: np.random.Generator, dtype=np.float32):
        bound = 1.0 / np.sqrt(self.in_features)
        self.w = rng.uniform(-bound, bound, (self.in_features, self.out_features)).astype(dtype)
        self.b = np.zeros(self.out_features, dtype=dtype)

    def out_shape(self, in_shape):
        if in_shape != (self.in_features,):
            raise ShapeMismatch(
                f"dense expects {self.in_features} features, got {in_shape}"
            )
        return (self.out_features,)

    def forward(self, x, train=False, rng=None):
        if x.shape[1] != self.in_features:
            raise ShapeMismatch(
                f"dense expects {self.in_features} features, got {x.shape[1]}"
            )
        self._x = x
        return x @ self.w + self.b

    def backward(self, gy):
        self.gw = self._x.T @ gy
        self.gb = gy.sum(axis=0)
        return gy @ self.w.T

    @property
    def params(self):
        return [self.w, self.b]

    @property
    def grads(self):
        return [self.gw, self.gb]

    def config(self):
        return {
            "kind": "dense",
            "in_features": self.in_features,
            "out_features": self.out_features,
        }


def build_layer(cfg: dict):
    kind = cfg["kind"]
    if kind == "conv":
        return Conv2D(
            cfg["in_maps"], cfg["out_maps"], cfg["kernel"], cfg["stride"], cfg["activation"]
        )
    if kind == "maxpool":
        return MaxPool2D(cfg["kernel"], cfg["stride"])
    if kind == "dropout":
        return Dropout(cfg["rate"])
    if kind == "flatten":
        return Flatten()
    if kind == "dense":
        return Dense(cfg["in_features"], cfg["out_features"])
    raise InvalidConfig(f"unknown layer kind {kind!r}")


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class Model:
    """Layer stack with a softmax classification head.

    The input is (batch, channels, time) or (batch, 1, channels, time);
    when expected_input is set, any other (channels, time) extent is
    rejected. forward returns class probabilities; loss_and_grads runs a
    full forward/backward pass and leaves gradients on the layers.
    """

    def __init__(self, layers, n_classes, expected_input=None, dtype=np.float32, seed=0):
        self.layers = list(layers)
        self.n_classes = int(n_classes)
        self.expected_input = (
            None if expected_input is None else (int(expected_input[0]), int(expected_input[1]))
        )
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        for layer in self.layers:
            if hasattr(layer, "initialize"):
                layer.initialize(rng, self.dtype)

    def _prepare(self, x):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 3:
            x = x[:, None, :, :]
        if x.ndim != 4:
            raise ShapeMismatch(f"expected 3-D or 4-D input, got shape {x.shape}")
        if self.expected_input is not None:
            got = (x.shape[2], x.shape[3])
            if got != self.expected_input:
                raise ShapeMismatch(
                    f"model requires (channels, time) {self.expected_input}, got {got}"
                )
        return np.ascontiguousarray(x)

    def logits(self, x, train=False, rng=None):
        out = self._prepare(x)
        gen = _as_rng(rng)
        for layer in self.layers:
            out = layer.forward(out, train=train, rng=gen)
        if out.ndim != 2 or out.shape[1] != self.n_classes:
            raise ShapeMismatch(
                f"head produced shape {out.shape}, expected (batch, {self.n_classes})"
            )
        return out

    def forward(self, x, train=False, rng=None):
        return _softmax(self.logits(x, train=train, rng=rng))

    def _check_labels(self, labels, batch):
        labels = np.asarray(labels)
        if labels.shape != (batch,):
            raise ShapeMismatch(f"labels shape {labels.shape} != ({batch},)")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise LabelOutOfRange(
                f"labels must lie in [0, {self.n_classes}), got "
                f"[{labels.min()}, {labels.max()}]"
            )
        return labels.astype(np.int64)

    def loss(self, x, labels, train=False, rng=None) -> float:
        logits = self.logits(x, train=train, rng=rng)
        labels = self._check_labels(labels, logits.shape[0])
        shifted = logits - logits.max(axis=1, keepdims=True)
        logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        return float(-logp[np.arange(len(labels)), labels].mean())

    def loss_and_grads(self, x, labels, train=False, rng=None):
        """Mean cross-entropy plus backprop; returns (loss, probabilities)."""
        logits = self.logits(x, train=train, rng=rng)
        labels = self._check_labels(labels, logits.shape[0])
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        probs = e / e.sum(axis=1, keepdims=True)
        logp = shifted - np.log(e.sum(axis=1, keepdims=True))
        loss = float(-logp[np.arange(len(labels)), labels].mean())
        g = probs.astype(self.dtype, copy=True)
        g[np.arange(len(labels)), labels] -= 1
        g /= self.dtype.type(len(labels))
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return loss, probs

    def parameters(self):
        return [p for layer in self.layers for p in layer.params]

    def gradients(self):
        return [g for layer in self.layers for g in layer.grads]

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def snapshot(self):
        return [p.copy() for p in self.parameters()]

    def restore(self, snapshot):
        params = self.parameters()
        if len(params) != len(snapshot):
            raise ShapeMismatch("snapshot does not match parameter list")
        for p, s in zip(params, snapshot):
            if p.shape != s.shape:
                raise ShapeMismatch(f"snapshot shape {s.shape} != {p.shape}")
            p[...] = s

    def config(self):
        return {
            "n_classes": self.n_classes,
            "expected_input": None if self.expected_input is None else list(self.expected_input),
            "dtype": self.dtype.name,
            "layers": [layer.config() for layer in self.layers],
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "Model":
        return cls(
            [build_layer(c) for c in cfg["layers"]],
            n_classes=cfg["n_classes"],
            expected_input=cfg["expected_input"],
            dtype=np.dtype(cfg["dtype"]),
        )
