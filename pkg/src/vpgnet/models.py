"""Network builders and shape tracing.

build_proposed_net assembles the decoding network: a temporal convolution,
a spatial collapse across all channels, a deepening temporal stack with
dropout and three max pools, then flatten and a softmax classification
head (a dense projection to the class count followed by softmax). The
input time length is fixed by the stage arithmetic; any other length is
rejected at the flatten/head consistency check.

build_compact_net uses the same stage kinds and ordering at a fraction of
the size, for fast experiments and tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, KernelTooLarge, ShapeMismatch, VpgError
from .nn.layers import Conv2D, Dense, Dropout, Flatten, MaxPool2D, Model


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv | maxpool | dropout | flatten | dense | softmax
    out_maps: int | None = None
    kernel: tuple[int, int] | None = None
    stride: tuple[int, int] | None = None
    rate: float | None = None

    def __post_init__(self):
        if self.kind not in ("conv", "maxpool", "dropout", "flatten", "dense", "softmax"):
            raise InvalidConfig(f"unknown stage kind {self.kind!r}")
        if self.kernel is not None:
            object.__setattr__(self, "kernel", (int(self.kernel[0]), int(self.kernel[1])))
        if self.stride is None and self.kind == "maxpool":
            object.__setattr__(self, "stride", self.kernel)
        elif self.stride is None and self.kind == "conv":
            object.__setattr__(self, "stride", (1, 1))
        if self.stride is not None:
            object.__setattr__(self, "stride", (int(self.stride[0]), int(self.stride[1])))


def _stage_arith(shape, stage: LayerSpec, n_classes: int, flatten_width: int | None):
    """Output shape of one stage given (maps, h, w) or (features,)."""
    if stage.kind in ("conv", "maxpool"):
        m, h, w = shape
        kh, kw = stage.kernel
        sh, sw = stage.stride
        if kh > h or kw > w:
            raise KernelTooLarge(f"kernel ({kh}, {kw}) exceeds input ({h}, {w})")
        out_m = stage.out_maps if stage.kind == "conv" else m
        return (out_m, (h - kh) // sh + 1, (w - kw) // sw + 1)
    if stage.kind == "dropout":
        return shape
    if stage.kind == "flatten":
        m, h, w = shape
        return (m * h * w,)
    if stage.kind in ("dense", "softmax"):
        if len(shape) != 1:
            raise ShapeMismatch(f"head stage needs flattened input, got shape {shape}")
        (width,) = shape
        if flatten_width is not None and width != flatten_width:
            raise ShapeMismatch(
                f"flatten stage emits {width} features, head expects {flatten_width}"
            )
        out = stage.out_maps if stage.out_maps is not None else n_classes
        return (out,)
    raise InvalidConfig(f"unknown stage kind {stage.kind!r}")


@dataclass(frozen=True)
class ModelSpec:
    """Full architecture description; arithmetic is fixed at construction."""

    n_channels: int
    input_time_len: int
    stages: tuple[LayerSpec, ...]
    n_classes: int = 4
    flatten_width: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not any(s.kind == "flatten" for s in self.stages):
            raise InvalidConfig("spec has no flatten stage")
        # one pass of the stage arithmetic pins the head width
        shape = (1, self.n_channels, self.input_time_len)
        width = None
        for stage in self.stages:
            shape = _stage_arith(shape, stage, self.n_classes, None)
            if stage.kind == "flatten":
                width = shape[0]
        if width is None:
            raise InvalidConfig("spec has no flatten stage")
        object.__setattr__(self, "flatten_width", int(width))

    def to_json(self) -> str:
        payload = {
            "n_channels": self.n_channels,
            "input_time_len": self.input_time_len,
            "n_classes": self.n_classes,
            "stages": [
                {
                    "kind": s.kind,
                    "out_maps": s.out_maps,
                    "kernel": list(s.kernel) if s.kernel else None,
                    "stride": list(s.stride) if s.stride else None,
                    "rate": s.rate,
                }
                for s in self.stages
            ],
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        d = json.loads(text)
        stages = tuple(
            LayerSpec(
                s["kind"],
                out_maps=s.get("out_maps"),
                kernel=tuple(s["kernel"]) if s.get("kernel") else None,
                stride=tuple(s["stride"]) if s.get("stride") else None,
                rate=s.get("rate"),
            )
            for s in d["stages"]
        )
        return cls(d["n_channels"], d["input_time_len"], stages, d["n_classes"])


def proposed_net_spec(n_channels: int = 64, n_classes: int = 4) -> ModelSpec:
    """The published twelve-stage architecture for (n_channels, 1251) input."""
    if n_channels < 1:
        raise InvalidConfig(f"need at least one channel, got {n_channels}")
    stages = (
        LayerSpec("conv", out_maps=20, kernel=(1, 60)),
        LayerSpec("conv", out_maps=20, kernel=(n_channels, 1)),
        LayerSpec("conv", out_maps=40, kernel=(1, 30)),
        LayerSpec("conv", out_maps=80, kernel=(1, 15)),
        LayerSpec("dropout", rate=0.5),
        LayerSpec("maxpool", kernel=(1, 7)),
        LayerSpec("conv", out_maps=160, kernel=(1, 15)),
        LayerSpec("maxpool", kernel=(1, 5)),
        LayerSpec("conv", out_maps=320, kernel=(1, 15)),
        LayerSpec("maxpool", kernel=(1, 5)),
        LayerSpec("flatten"),
        LayerSpec("softmax"),
    )
    # the first temporal conv must emit 1192 windows of width 60 at stride 1,
    # which fixes the input length
    time_len = 1192 + 60 - 1
    return ModelSpec(n_channels, time_len, stages, n_classes)


def compact_net_spec(
    n_channels: int, input_time_len: int = 250, n_classes: int = 4
) -> ModelSpec:
    """Same stage kinds and ordering as the proposed net, sized for speed."""
    stages = (
        LayerSpec("conv", out_maps=8, kernel=(1, 13)),
        LayerSpec("conv", out_maps=8, kernel=(n_channels, 1)),
        LayerSpec("conv", out_maps=16, kernel=(1, 9)),
        LayerSpec("conv", out_maps=32, kernel=(1, 5)),
        LayerSpec("dropout", rate=0.5),
        LayerSpec("maxpool", kernel=(1, 7)),
        LayerSpec("conv", out_maps=64, kernel=(1, 5)),
        LayerSpec("maxpool", kernel=(1, 5)),
        LayerSpec("conv", out_maps=128, kernel=(1, 3)),
        LayerSpec("maxpool", kernel=(1, 3)),
        LayerSpec("flatten"),
        LayerSpec("softmax"),
    )
    return ModelSpec(n_channels, input_time_len, stages, n_classes)


def build_model(spec: ModelSpec, seed: int = 0, dtype=np.float32) -> Model:
    layers = []
    in_maps = 1
    for stage in spec.stages:
        if stage.kind == "conv":
            layers.append(Conv2D(in_maps, stage.out_maps, stage.kernel, stage.stride))
            in_maps = stage.out_maps
        elif stage.kind == "maxpool":
            layers.append(MaxPool2D(stage.kernel, stage.stride))
        elif stage.kind == "dropout":
            layers.append(Dropout(stage.rate))
        elif stage.kind == "flatten":
            layers.append(Flatten())
        elif stage.kind in ("dense", "softmax"):
            out = stage.out_maps if stage.out_maps is not None else spec.n_classes
            layers.append(Dense(spec.flatten_width, out))
    return Model(
        layers,
        n_classes=spec.n_classes,
        expected_input=(spec.n_channels, spec.input_time_len),
        dtype=dtype,
        seed=seed,
    )


def build_proposed_net(n_channels: int = 64, seed: int = 0, dtype=np.float32) -> Model:
    return build_model(proposed_net_spec(n_channels), seed=seed, dtype=dtype)


def build_compact_net(
    n_channels: int, input_time_len: int = 250, seed: int = 0, dtype=np.float32
) -> Model:
    return build_model(compact_net_spec(n_channels, input_time_len), seed=seed, dtype=dtype)


def required_input_length(spec_or_model) -> int:
    """Time samples the network demands of every input."""
    if isinstance(spec_or_model, ModelSpec):
        return spec_or_model.input_time_len
    expected = getattr(spec_or_model, "expected_input", None)
    if expected is None:
        raise InvalidConfig("model does not pin its input extent")
    return expected[1]


def shape_trace(spec_or_model, input_shape=None) -> list[tuple[int, ...]]:
    """Per-stage output shapes for a batch of one.

    Accepts a ModelSpec or a built Model. Returns one (1, maps, h, w) tuple
    per conv/pool/dropout stage, then (1, features) for flatten and
    (1, n_classes) for the classification head. A wrong input time length
    surfaces as ShapeMismatch at the flatten/head consistency check.
    """
    if isinstance(spec_or_model, ModelSpec):
        spec = spec_or_model
        if input_shape is None:
            input_shape = (spec.n_channels, spec.input_time_len)
        shape = (1, int(input_shape[0]), int(input_shape[1]))
        trace = []
        for i, stage in enumerate(spec.stages):
            try:
                shape = _stage_arith(shape, stage, spec.n_classes, spec.flatten_width)
            except VpgError as exc:
                raise type(exc)(f"stage {i} ({stage.kind}): {exc}") from exc
            trace.append((1, *shape))
        return trace

    model = spec_or_model
    if input_shape is None:
        if model.expected_input is None:
            raise InvalidConfig("pass input_shape for models without a pinned input")
        input_shape = model.expected_input
    shape = (1, int(input_shape[0]), int(input_shape[1]))
    trace = []
    for i, layer in enumerate(model.layers):
        try:
            shape = layer.out_shape(shape)
        except VpgError as exc:
            kind = layer.config()["kind"]
            raise type(exc)(f"stage {i} ({kind}): {exc}") from exc
        trace.append((1, *shape))
    return trace
