"""Adam optimizer with bias-corrected moment estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfig, ShapeMismatch


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidConfig(f"learning rate must be positive, got {self.learning_rate}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise InvalidConfig("betas must lie in [0, 1)")
        if self.epsilon <= 0:
            raise InvalidConfig(f"epsilon must be positive, got {self.epsilon}")


class Adam:
    """Updates a fixed list of parameter arrays in place."""

    def __init__(self, params, config: AdamConfig = AdamConfig()):
        self.params = list(params)
        self.config = config
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads) -> None:
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ShapeMismatch(
                f"{len(grads)} gradients for {len(self.params)} parameters"
            )
        for p, g in zip(self.params, grads):
            if g is None or g.shape != p.shape:
                got = None if g is None else g.shape
                raise ShapeMismatch(f"gradient shape {got} != parameter shape {p.shape}")
        c = self.config
        self.t += 1
        bc1 = 1.0 - c.beta1**self.t
        bc2 = 1.0 - c.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            g = g.astype(p.dtype, copy=False)
            m *= p.dtype.type(c.beta1)
            m += p.dtype.type(1.0 - c.beta1) * g
            v *= p.dtype.type(c.beta2)
            v += p.dtype.type(1.0 - c.beta2) * (g * g)
            mhat = m / p.dtype.type(bc1)
            vhat = v / p.dtype.type(bc2)
            p -= p.dtype.type(c.learning_rate) * mhat / (np.sqrt(vhat) + p.dtype.type(c.epsilon))
