# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled convolution and pooling kernels.

Same contract as the numpy fallback: cross-correlation with valid padding,
first-window-position tie break for max pooling, float32 or float64
throughout. Convolutions pack each batch item into an im2col buffer and run
a single BLAS gemm per item; pooling stays as plain loops since it is
memory-bound anyway. Results are reproducible for a fixed BLAS build and
thread count (the CLI pins threads when determinism matters).
"""

import numpy as np

cimport cython
from scipy.linalg.cython_blas cimport dgemm, sgemm

NAME = "compiled"

ctypedef fused real:
    float
    double


cdef void _gemm(char ta, char tb, int m, int n, int k, real *a, int lda,
                real *b, int ldb, real beta, real *c, int ldc) noexcept nogil:
    cdef float fone = 1.0
    cdef double done = 1.0
    cdef float fbeta
    cdef double dbeta
    if real is float:
        fbeta = <float> beta
        sgemm(&ta, &tb, &m, &n, &k, &fone, <float *> a, &lda,
              <float *> b, &ldb, &fbeta, <float *> c, &ldc)
    else:
        dbeta = <double> beta
        dgemm(&ta, &tb, &m, &n, &k, &done, <double *> a, &lda,
              <double *> b, &ldb, &dbeta, <double *> c, &ldc)


cdef void _pack(real[:, :, :, ::1] x, Py_ssize_t bb, Py_ssize_t kh,
                Py_ssize_t kw, Py_ssize_t sh, Py_ssize_t sw,
                Py_ssize_t Yh, Py_ssize_t Yw, real[:, ::1] col) noexcept nogil:
    cdef Py_ssize_t I = x.shape[1]
    cdef Py_ssize_t i, u, v, yy, xx, r
    for i in range(I):
        for u in range(kh):
            for v in range(kw):
                r = (i * kh + u) * kw + v
                for yy in range(Yh):
                    for xx in range(Yw):
                        col[r, yy * Yw + xx] = x[bb, i, yy * sh + u, xx * sw + v]


def _conv_fwd(real[:, :, :, ::1] x, real[:, ::1] wf, real[::1] b,
              Py_ssize_t kh, Py_ssize_t kw, Py_ssize_t sh, Py_ssize_t sw,
              real[:, ::1] col, real[:, :, :, ::1] out):
    cdef Py_ssize_t B = x.shape[0]
    cdef Py_ssize_t Yh = out.shape[2], Yw = out.shape[3]
    cdef int O = <int> wf.shape[0], K = <int> wf.shape[1]
    cdef int N = <int> (Yh * Yw)
    cdef Py_ssize_t bb, o, yy, xx
    cdef char cn = b'N'
    cdef real bv
    with nogil:
        for bb in range(B):
            _pack(x, bb, kh, kw, sh, sw, Yh, Yw, col)
            # row-major out[bb] = wf @ col, phrased for column-major BLAS
            _gemm(cn, cn, N, O, K, &col[0, 0], N, &wf[0, 0], K,
                  <real> 0, &out[bb, 0, 0, 0], N)
            for o in range(O):
                bv = b[o]
                for yy in range(Yh):
                    for xx in range(Yw):
                        out[bb, o, yy, xx] += bv


def _conv_bwd(real[:, :, :, ::1] x, real[:, ::1] wf, Py_ssize_t kh,
              Py_ssize_t kw, Py_ssize_t sh, Py_ssize_t sw,
              real[:, :, :, ::1] gy, real[:, ::1] col, real[:, ::1] gcol,
              real[:, :, :, ::1] gx, real[:, ::1] gwf, real[::1] gb):
    cdef Py_ssize_t B = x.shape[0], I = x.shape[1]
    cdef Py_ssize_t Yh = gy.shape[2], Yw = gy.shape[3]
    cdef int O = <int> wf.shape[0], K = <int> wf.shape[1]
    cdef int N = <int> (Yh * Yw)
    cdef Py_ssize_t bb, o, i, u, v, yy, xx, r
    cdef char cn = b'N', ct = b'T'
    with nogil:
        for bb in range(B):
            for o in range(O):
                for yy in range(Yh):
                    for xx in range(Yw):
                        gb[o] += gy[bb, o, yy, xx]
            _pack(x, bb, kh, kw, sh, sw, Yh, Yw, col)
            # gwf += gy[bb] @ col.T
            _gemm(ct, cn, K, O, N, &col[0, 0], N, &gy[bb, 0, 0, 0], N,
                  <real> 1, &gwf[0, 0], K)
            # gcol = wf.T @ gy[bb]
            _gemm(cn, ct, N, K, O, &gy[bb, 0, 0, 0], N, &wf[0, 0], K,
                  <real> 0, &gcol[0, 0], N)
            for i in range(I):
                for u in range(kh):
                    for v in range(kw):
                        r = (i * kh + u) * kw + v
                        for yy in range(Yh):
                            for xx in range(Yw):
                                gx[bb, i, yy * sh + u, xx * sw + v] += gcol[r, yy * Yw + xx]


def _pool_fwd(real[:, :, :, ::1] x, Py_ssize_t kh, Py_ssize_t kw,
              Py_ssize_t sh, Py_ssize_t sw,
              real[:, :, :, ::1] out, long long[:, :, :, ::1] idx):
    cdef Py_ssize_t B = x.shape[0], M = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t Yh = out.shape[2], Yw = out.shape[3]
    cdef Py_ssize_t bb, m, yy, xx, u, v, r0, c0
    cdef real best, cand
    cdef long long besti
    with nogil:
        for bb in range(B):
            for m in range(M):
                for yy in range(Yh):
                    r0 = yy * sh
                    for xx in range(Yw):
                        c0 = xx * sw
                        best = x[bb, m, r0, c0]
                        besti = r0 * W + c0
                        for u in range(kh):
                            for v in range(kw):
                                cand = x[bb, m, r0 + u, c0 + v]
                                if cand > best:
                                    best = cand
                                    besti = (r0 + u) * W + (c0 + v)
                        out[bb, m, yy, xx] = best
                        idx[bb, m, yy, xx] = besti


def _pool_bwd(real[:, :, :, ::1] gy, long long[:, :, :, ::1] idx,
              real[:, :, :, ::1] gx):
    cdef Py_ssize_t B = gy.shape[0], M = gy.shape[1]
    cdef Py_ssize_t Yh = gy.shape[2], Yw = gy.shape[3]
    cdef Py_ssize_t W = gx.shape[3]
    cdef Py_ssize_t bb, m, yy, xx
    cdef long long flat
    with nogil:
        for bb in range(B):
            for m in range(M):
                for yy in range(Yh):
                    for xx in range(Yw):
                        flat = idx[bb, m, yy, xx]
                        gx[bb, m, flat // W, flat % W] += gy[bb, m, yy, xx]


def conv_forward(x, w, b, stride):
    x = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w, dtype=x.dtype)
    b = np.ascontiguousarray(b, dtype=x.dtype)
    B, I, H, W = x.shape
    O, _, kh, kw = w.shape
    sh, sw = stride
    Yh, Yw = (H - kh) // sh + 1, (W - kw) // sw + 1
    out = np.empty((B, O, Yh, Yw), dtype=x.dtype)
    col = np.empty((I * kh * kw, Yh * Yw), dtype=x.dtype)
    _conv_fwd(x, w.reshape(O, -1), b, kh, kw, sh, sw, col, out)
    return out


def conv_backward(x, w, stride, gy):
    x = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w, dtype=x.dtype)
    gy = np.ascontiguousarray(gy, dtype=x.dtype)
    B, I, H, W = x.shape
    O, _, kh, kw = w.shape
    sh, sw = stride
    Yh, Yw = gy.shape[2], gy.shape[3]
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    gb = np.zeros(O, dtype=x.dtype)
    col = np.empty((I * kh * kw, Yh * Yw), dtype=x.dtype)
    gcol = np.empty_like(col)
    _conv_bwd(x, w.reshape(O, -1), kh, kw, sh, sw, gy, col, gcol,
              gx, gw.reshape(O, -1), gb)
    return gx, gw, gb


def maxpool_forward(x, kernel, stride):
    x = np.ascontiguousarray(x)
    B, M, H, W = x.shape
    kh, kw = kernel
    sh, sw = stride
    Yh, Yw = (H - kh) // sh + 1, (W - kw) // sw + 1
    out = np.empty((B, M, Yh, Yw), dtype=x.dtype)
    idx = np.empty((B, M, Yh, Yw), dtype=np.int64)
    _pool_fwd(x, kh, kw, sh, sw, out, idx)
    return out, idx


def maxpool_backward(gy, idx, x_shape, kernel, stride):
    gy = np.ascontiguousarray(gy)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    gx = np.zeros(x_shape, dtype=gy.dtype)
    _pool_bwd(gy, idx, gx)
    return gx
