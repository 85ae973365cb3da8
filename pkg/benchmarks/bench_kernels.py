"""Compare the compiled and numpy kernel backends.

Times the convolution and pooling primitives on layer shapes taken from
the two network builders, then a full train step (forward, backward, Adam)
on the compact net. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats N] [--batch B]

The compiled backend is skipped with a note when the extension is not
built. Timings are medians over the repeat count; expect run-to-run noise
of a few percent.
"""

from __future__ import annotations

import argparse
import statistics
import time
from contextlib import contextmanager

import numpy as np

from vpgnet.models import build_compact_net
from vpgnet.nn import kernels
from vpgnet.nn.kernels import load_backend
from vpgnet.nn.optim import Adam

_DISPATCH = ("conv_forward", "conv_backward", "maxpool_forward", "maxpool_backward")


@contextmanager
def use_backend(backend):
    saved = {name: getattr(kernels, name) for name in _DISPATCH}
    for name in _DISPATCH:
        setattr(kernels, name, getattr(backend, name))
    try:
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def median_ms(fn, repeats: int) -> float:
    fn()  # warm up
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times)


def conv_cases(batch: int):
    rng = np.random.default_rng(0)
    # (label, x shape, w shape): temporal stem of the full net, then the
    # widest compact-net stage
    shapes = [
        ("conv 1x60 stem", (batch, 1, 16, 1251), (20, 1, 1, 60)),
        ("conv 16x1 spatial", (batch, 20, 16, 1192), (20, 20, 16, 1)),
        ("conv 1x5 deep", (batch, 32, 1, 31), (64, 32, 1, 5)),
    ]
    for label, xs, ws in shapes:
        x = rng.standard_normal(xs).astype(np.float32)
        w = (rng.standard_normal(ws) * 0.1).astype(np.float32)
        b = np.zeros(ws[0], dtype=np.float32)
        yield label, x, w, b


def bench_primitives(backends, repeats: int, batch: int):
    rows = []
    for label, x, w, b in conv_cases(batch):
        timings = {}
        for name, backend in backends:
            y = backend.conv_forward(x, w, b, (1, 1))
            gy = np.ones_like(y)
            timings[name] = (
                median_ms(lambda: backend.conv_forward(x, w, b, (1, 1)), repeats),
                median_ms(lambda: backend.conv_backward(x, w, (1, 1), gy), repeats),
            )
        rows.append((label, timings))

    rng = np.random.default_rng(1)
    x = rng.standard_normal((batch, 80, 1, 1149)).astype(np.float32)
    timings = {}
    for name, backend in backends:
        _, idx = backend.maxpool_forward(x, (1, 7), (1, 7))
        gy = np.ones((batch, 80, 1, 164), dtype=np.float32)
        timings[name] = (
            median_ms(lambda: backend.maxpool_forward(x, (1, 7), (1, 7)), repeats),
            median_ms(
                lambda: backend.maxpool_backward(gy, idx, x.shape, (1, 7), (1, 7)),
                repeats,
            ),
        )
    rows.append(("maxpool 1x7", timings))
    return rows


def bench_train_step(backends, repeats: int, batch: int):
    rng = np.random.default_rng(2)
    x = rng.standard_normal((batch, 16, 250)).astype(np.float32)
    y = rng.integers(0, 4, size=batch)
    timings = {}
    for name, backend in backends:
        with use_backend(backend):
            model = build_compact_net(16, input_time_len=250, seed=0)
            adam = Adam(model.parameters())

            def step():
                model.loss_and_grads(x, y, train=True, rng=0)
                adam.step(model.gradients())

            timings[name] = median_ms(step, repeats)
    return timings


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--batch", type=int, default=16)
    args = parser.parse_args()

    backends = [("python", load_backend("python"))]
    try:
        backends.append(("compiled", load_backend("compiled")))
    except ImportError:
        print("compiled backend not built; timing the numpy fallback only\n")

    print(f"active backend: {kernels.BACKEND}; batch {args.batch}, "
          f"median of {args.repeats} repeats\n")

    print(f"{'case':24s} {'dir':8s}" + "".join(f" {n:>10s}" for n, _ in backends))
    for label, timings in bench_primitives(backends, args.repeats, args.batch):
        for i, direction in enumerate(("forward", "backward")):
            cells = "".join(f" {timings[n][i]:8.2f}ms" for n, _ in backends)
            print(f"{label if i == 0 else '':24s} {direction:8s}{cells}")

    print()
    step = bench_train_step(backends, max(3, args.repeats // 4), args.batch)
    cells = "".join(f" {step[n]:8.2f}ms" for n, _ in backends)
    print(f"{'compact net train step':24s} {'fwd+bwd':8s}{cells}")
    if len(backends) == 2:
        ratio = step["python"] / step["compiled"]
        print(f"\ncompiled speedup on the train step: {ratio:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
