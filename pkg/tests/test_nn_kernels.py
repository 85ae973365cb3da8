"""Convolution and pooling kernels, checked across backends.

The numpy and compiled implementations are developed independently (GEMM
over packed columns vs BLAS calls from C loops), so agreement between them
is itself a strong check. Small cases are additionally verified against
central finite differences.
"""

import numpy as np
import pytest

from vpgnet.nn import kernels
from vpgnet.nn.kernels import _npkernels, load_backend

try:
    from vpgnet.nn.kernels import _ckernels

    BACKENDS = [_npkernels, _ckernels]
except ImportError:  # extension not built
    _ckernels = None
    BACKENDS = [_npkernels]

CASES = [
    # B, I, H, W, O, kh, kw, stride
    (2, 1, 8, 40, 4, 1, 7, (1, 1)),
    (2, 3, 8, 40, 4, 8, 1, (1, 1)),
    (3, 4, 1, 33, 6, 1, 5, (1, 1)),
    (2, 3, 9, 11, 5, 4, 3, (2, 3)),
    (1, 2, 5, 7, 3, 5, 7, (1, 1)),  # output collapses to 1 x 1
]


def test_backend_selection():
    assert kernels.BACKEND in ("python", "compiled")
    assert load_backend("python").NAME == "python"
    with pytest.raises(ValueError):
        load_backend("cuda")


def test_table_row_one_shape():
    x = np.zeros((1, 1, 64, 1251), dtype=np.float32)
    w = np.zeros((20, 1, 1, 60), dtype=np.float32)
    y = kernels.conv_forward(x, w, np.zeros(20, dtype=np.float32), (1, 1))
    assert y.shape == (1, 20, 64, 1192)


def test_identity_kernel(rng):
    x = rng.standard_normal((2, 1, 4, 9)).astype(np.float32)
    w = np.ones((1, 1, 1, 1), dtype=np.float32)
    y = kernels.conv_forward(x, w, np.zeros(1, dtype=np.float32), (1, 1))
    np.testing.assert_array_equal(y, x)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.NAME)
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_conv_against_naive_loops(backend, dtype, rng):
    for B, I, H, W, O, kh, kw, (sh, sw) in CASES:
        x = rng.standard_normal((B, I, H, W)).astype(dtype)
        w = (rng.standard_normal((O, I, kh, kw)) * 0.3).astype(dtype)
        b = rng.standard_normal(O).astype(dtype)
        y = backend.conv_forward(x, w, b, (sh, sw))
        Yh, Yw = (H - kh) // sh + 1, (W - kw) // sw + 1
        assert y.shape == (B, O, Yh, Yw)
        ref = np.zeros((B, O, Yh, Yw))
        for u in range(kh):
            for v in range(kw):
                xs = x[:, :, u : u + sh * Yh : sh, v : v + sw * Yw : sw]
                ref += np.einsum("oi,bihw->bohw", w[:, :, u, v].astype(np.float64), xs.astype(np.float64))
        ref += b.reshape(1, O, 1, 1)
        tol = 1e-4 if dtype == np.float32 else 1e-10
        np.testing.assert_allclose(y, ref, atol=tol * max(1, np.abs(ref).max()))


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels unavailable")
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_backends_agree(dtype, rng):
    for B, I, H, W, O, kh, kw, st in CASES:
        x = rng.standard_normal((B, I, H, W)).astype(dtype)
        w = (rng.standard_normal((O, I, kh, kw)) * 0.3).astype(dtype)
        b = rng.standard_normal(O).astype(dtype)
        y1 = _npkernels.conv_forward(x, w, b, st)
        y2 = _ckernels.conv_forward(x, w, b, st)
        gy = rng.standard_normal(y1.shape).astype(dtype)
        g1 = _npkernels.conv_backward(x, w, st, gy)
        g2 = _ckernels.conv_backward(x, w, st, gy)
        tol = 5e-5 if dtype == np.float32 else 1e-11
        scale = max(1.0, np.abs(g1[1]).max())
        np.testing.assert_allclose(y1, y2, atol=tol * scale)
        for a, c in zip(g1, g2):
            np.testing.assert_allclose(a, c, atol=tol * scale)


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels unavailable")
def test_pool_backends_bit_identical(rng):
    for kernel, stride in [((1, 7), (1, 7)), ((2, 3), (1, 2)), ((3, 3), (2, 2))]:
        x = rng.standard_normal((2, 3, 9, 21)).astype(np.float32)
        y1, i1 = _npkernels.maxpool_forward(x, kernel, stride)
        y2, i2 = _ckernels.maxpool_forward(x, kernel, stride)
        np.testing.assert_array_equal(y1, y2)
        np.testing.assert_array_equal(i1, i2)
        gy = rng.standard_normal(y1.shape).astype(np.float32)
        gx1 = _npkernels.maxpool_backward(gy, i1, x.shape, kernel, stride)
        gx2 = _ckernels.maxpool_backward(gy, i2, x.shape, kernel, stride)
        np.testing.assert_array_equal(gx1, gx2)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.NAME)
def test_pool_tie_breaks_to_first_window_position(backend):
    x = np.zeros((1, 1, 1, 6), dtype=np.float32)
    x[0, 0, 0, :] = [1, 1, 1, 5, 5, 0]  # ties inside both windows
    y, idx = backend.maxpool_forward(x, (1, 3), (1, 3))
    np.testing.assert_array_equal(y[0, 0, 0], [1, 5])
    np.testing.assert_array_equal(idx[0, 0, 0], [0, 3])


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.NAME)
def test_pool_constant_input(backend):
    x = np.full((1, 2, 4, 8), 3.25, dtype=np.float32)
    y, idx = backend.maxpool_forward(x, (2, 2), (2, 2))
    assert np.all(y == 3.25)
    # every argmax is the window's top-left corner
    assert np.all(idx[0, 0] == np.array([[0, 2, 4, 6], [16, 18, 20, 22]]))


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.NAME)
@pytest.mark.parametrize("kernel,stride", [((1, 3), (1, 3)), ((2, 3), (1, 2))])
def test_pool_gradient_finite_difference(backend, kernel, stride, rng):
    # jittered input keeps every window tie-free
    x = rng.standard_normal((1, 2, 5, 12)).astype(np.float64)
    x += np.arange(x.size).reshape(x.shape) * 1e-6
    y, idx = backend.maxpool_forward(x, kernel, stride)
    r = rng.standard_normal(y.shape)
    gx = backend.maxpool_backward(r, idx, x.shape, kernel, stride)

    def loss(arr):
        out, _ = backend.maxpool_forward(arr, kernel, stride)
        return float((out * r).sum())

    eps = 1e-6
    flat = x.reshape(-1)
    for j in rng.choice(flat.size, size=25, replace=False):
        orig = flat[j]
        flat[j] = orig + eps
        lp = loss(x)
        flat[j] = orig - eps
        lm = loss(x)
        flat[j] = orig
        numeric = (lp - lm) / (2 * eps)
        assert abs(numeric - gx.reshape(-1)[j]) < 1e-6


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.NAME)
def test_conv_gradient_finite_difference(backend, rng):
    B, I, H, W, O, kh, kw, st = 2, 2, 4, 9, 3, 2, 3, (1, 2)
    x = rng.standard_normal((B, I, H, W))
    w = rng.standard_normal((O, I, kh, kw)) * 0.5
    b = rng.standard_normal(O)
    r = rng.standard_normal(backend.conv_forward(x, w, b, st).shape)

    def loss():
        return float((backend.conv_forward(x, w, b, st) * r).sum())

    gx, gw, gb = backend.conv_backward(x, w, st, r)
    eps = 1e-6
    for arr, grad in ((x, gx), (w, gw), (b, gb)):
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for j in rng.choice(flat.size, size=min(20, flat.size), replace=False):
            orig = flat[j]
            flat[j] = orig + eps
            lp = loss()
            flat[j] = orig - eps
            lm = loss()
            flat[j] = orig
            numeric = (lp - lm) / (2 * eps)
            assert abs(numeric - gflat[j]) < 1e-6 * max(1, abs(numeric))
