"""Vectorized numpy fallback for the convolution and pooling kernels.

Shapes follow the conventions of the compiled backend exactly:
    x   (batch, in_maps, height, width)
    w   (out_maps, in_maps, kh, kw)
    y   (batch, out_maps, out_h, out_w)
Convolution is cross-correlation with valid padding. Max pooling resolves
ties to the first window position in row-major (kh, kw) order.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

NAME = "python"


def _out_len(n: int, k: int, s: int) -> int:
    return (n - k) // s + 1


def _im2col(x, kh, kw, sh, sw):
    # (B, I, Yh, Yw, kh, kw) strided view, packed as (B, I*kh*kw, Yh*Yw)
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    B, I, Yh, Yw = win.shape[:4]
    cols = win.transpose(0, 1, 4, 5, 2, 3).reshape(B, I * kh * kw, Yh * Yw)
    return cols, Yh, Yw


def conv_forward(x, w, b, stride):
    x = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w, dtype=x.dtype)
    b = np.ascontiguousarray(b, dtype=x.dtype)
    B = x.shape[0]
    O, _, kh, kw = w.shape
    cols, Yh, Yw = _im2col(x, kh, kw, *stride)
    y = np.matmul(w.reshape(O, -1), cols).reshape(B, O, Yh, Yw)
    y += b.reshape(1, O, 1, 1)
    return y


def conv_backward(x, w, stride, gy):
    x = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w, dtype=x.dtype)
    gy = np.ascontiguousarray(gy, dtype=x.dtype)
    B, I, H, W = x.shape
    O, _, kh, kw = w.shape
    sh, sw = stride
    Yh, Yw = gy.shape[2], gy.shape[3]
    gb = gy.sum(axis=(0, 2, 3))
    cols, _, _ = _im2col(x, kh, kw, sh, sw)
    g = gy.reshape(B, O, Yh * Yw)
    gw = np.matmul(g, cols.transpose(0, 2, 1)).sum(axis=0).reshape(w.shape)
    gcol = np.matmul(w.reshape(O, -1).T, g).reshape(B, I, kh, kw, Yh, Yw)
    gx = np.zeros_like(x)
    for u in range(kh):
        for v in range(kw):
            sl_h = slice(u, u + sh * (Yh - 1) + 1, sh)
            sl_w = slice(v, v + sw * (Yw - 1) + 1, sw)
            gx[:, :, sl_h, sl_w] += gcol[:, :, u, v]
    return gx, gw, gb


def maxpool_forward(x, kernel, stride):
    x = np.ascontiguousarray(x)
    B, M, H, W = x.shape
    kh, kw = kernel
    sh, sw = stride
    Yh, Yw = _out_len(H, kh, sh), _out_len(W, kw, sw)
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    flat = windows.reshape(B, M, Yh, Yw, kh * kw)
    win_idx = flat.argmax(axis=-1)  # first max in row-major window order
    y = np.take_along_axis(flat, win_idx[..., None], axis=-1)[..., 0]
    u, v = win_idx // kw, win_idx % kw
    rows = (np.arange(Yh) * sh)[None, None, :, None] + u
    cols = (np.arange(Yw) * sw)[None, None, None, :] + v
    idx = (rows * W + cols).astype(np.int64)
    return np.ascontiguousarray(y), idx


def maxpool_backward(gy, idx, x_shape, kernel, stride):
    gy = np.ascontiguousarray(gy)
    B, M, H, W = x_shape
    kh, kw = kernel
    sh, sw = stride
    gx = np.zeros((B, M, H * W), dtype=gy.dtype)
    flat_idx = idx.reshape(B, M, -1)
    flat_gy = gy.reshape(B, M, -1)
    if sh >= kh and sw >= kw:
        # windows cannot overlap, so target indices are unique per map
        np.put_along_axis(gx, flat_idx, flat_gy, axis=2)
    else:
        bi, mi = np.ogrid[:B, :M]
        np.add.at(gx, (bi[..., None], mi[..., None], flat_idx), flat_gy)
    return gx.reshape(B, M, H, W)
