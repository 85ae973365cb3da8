"""Central-difference verification of the analytic gradients.

Perturbs every parameter coordinate, so it is meant for reduced models.
Run it on a float64 model; float32 round-off swamps the comparison.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidEpsilon


def gradient_check(model, x, labels, eps=1e-5, train=False, rng_seed=0) -> float:
    """Max relative error between analytic and numeric gradients.

    The relative error of one coordinate is
        |analytic - numeric| / max(|analytic|, |numeric|, 1e-12)
    and the maximum over all parameters is returned. Passing train=True
    exercises dropout; the fixed rng_seed keeps the mask identical across
    the two-sided evaluations so the loss stays differentiable.
    """
    if eps <= 0:
        raise InvalidEpsilon(f"finite-difference step must be positive, got {eps}")
    model.loss_and_grads(x, labels, train=train, rng=rng_seed)
    analytic = [np.asarray(g, dtype=np.float64).copy() for g in model.gradients()]
    worst = 0.0
    for p, ga in zip(model.parameters(), analytic):
        flat = p.reshape(-1)
        gflat = ga.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            lp = model.loss(x, labels, train=train, rng=rng_seed)
            flat[j] = orig - eps
            lm = model.loss(x, labels, train=train, rng=rng_seed)
            flat[j] = orig
            numeric = (lp - lm) / (2.0 * eps)
            denom = max(abs(numeric), abs(gflat[j]), 1e-12)
            rel = abs(numeric - gflat[j]) / denom
            if rel > worst:
                worst = rel
    return worst
