# cython: language_level=3, boundscheck=False, wraparound=False
# cython: initializedcheck=False, cdivision=True
"""Compiled convolution kernels. Same contracts as reference.py: NCHW,
stride 1, caller pads. Inner loops run over the last (contiguous) axis so
the C compiler can vectorize them."""

import numpy as np

ctypedef fused real:
    float
    double


def conv2d_forward(const real[:, :, :, ::1] x, const real[:, :, :, ::1] w):
    cdef Py_ssize_t nb = x.shape[0], nc = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t nf = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ho = h - kh + 1, wo = wd - kw + 1
    out_arr = np.zeros((nb, nf, ho, wo), dtype=np.float32 if real is float else np.float64)
    cdef real[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, f, c, i, j, p, q
    cdef real wv
    with nogil:
        for b in range(nb):
            for f in range(nf):
                for c in range(nc):
                    for i in range(kh):
                        for j in range(kw):
                            wv = w[f, c, i, j]
                            for p in range(ho):
                                for q in range(wo):
                                    out[b, f, p, q] += wv * x[b, c, p + i, q + j]
    return out_arr


def conv2d_input_grad(const real[:, :, :, ::1] g, const real[:, :, :, ::1] w):
    cdef Py_ssize_t nb = g.shape[0], nf = g.shape[1], ho = g.shape[2], wo = g.shape[3]
    cdef Py_ssize_t nc = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t h = ho + kh - 1, wd = wo + kw - 1
    out_arr = np.zeros((nb, nc, h, wd), dtype=np.float32 if real is float else np.float64)
    cdef real[:, :, :, ::1] gx = out_arr
    cdef Py_ssize_t b, f, c, i, j, p, q
    cdef real wv
    with nogil:
        for b in range(nb):
            for c in range(nc):
                for f in range(nf):
                    for i in range(kh):
                        for j in range(kw):
                            wv = w[f, c, i, j]
                            for p in range(ho):
                                for q in range(wo):
                                    gx[b, c, p + i, q + j] += wv * g[b, f, p, q]
    return out_arr


def conv2d_weight_grad(const real[:, :, :, ::1] x, const real[:, :, :, ::1] g):
    cdef Py_ssize_t nb = x.shape[0], nc = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t nf = g.shape[1], ho = g.shape[2], wo = g.shape[3]
    cdef Py_ssize_t kh = h - ho + 1, kw = wd - wo + 1
    out_arr = np.zeros((nf, nc, kh, kw), dtype=np.float32 if real is float else np.float64)
    cdef real[:, :, :, ::1] dw = out_arr
    cdef Py_ssize_t b, f, c, i, j, p, q
    cdef real acc
    with nogil:
        for f in range(nf):
            for c in range(nc):
                for i in range(kh):
                    for j in range(kw):
                        acc = 0
                        for b in range(nb):
                            for p in range(ho):
                                for q in range(wo):
                                    acc += x[b, c, p + i, q + j] * g[b, f, p, q]
                        dw[f, c, i, j] = acc
    return out_arr


def depthwise_forward(const real[:, :, :, ::1] x, const real[:, :, :, ::1] w):
    cdef Py_ssize_t nb = x.shape[0], nc = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t nd = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ho = h - kh + 1, wo = wd - kw + 1
    out_arr = np.zeros((nb, nc * nd, ho, wo), dtype=np.float32 if real is float else np.float64)
    cdef real[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, c, d, i, j, p, q
    cdef real wv
    with nogil:
        for b in range(nb):
            for c in range(nc):
                for d in range(nd):
                    for i in range(kh):
                        for j in range(kw):
                            wv = w[c, d, i, j]
                            for p in range(ho):
                                for q in range(wo):
                                    out[b, c * nd + d, p, q] += wv * x[b, c, p + i, q + j]
    return out_arr


def depthwise_input_grad(const real[:, :, :, ::1] g, const real[:, :, :, ::1] w):
    cdef Py_ssize_t nb = g.shape[0], ho = g.shape[2], wo = g.shape[3]
    cdef Py_ssize_t nc = w.shape[0], nd = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t h = ho + kh - 1, wd = wo + kw - 1
    out_arr = np.zeros((nb, nc, h, wd), dtype=np.float32 if real is float else np.float64)
    cdef real[:, :, :, ::1] gx = out_arr
    cdef Py_ssize_t b, c, d, i, j, p, q
    cdef real wv
    with nogil:
        for b in range(nb):
            for c in range(nc):
                for d in range(nd):
                    for i in range(kh):
                        for j in range(kw):
                            wv = w[c, d, i, j]
                            for p in range(ho):
                                for q in range(wo):
                                    gx[b, c, p + i, q + j] += wv * g[b, c * nd + d, p, q]
    return out_arr


def depthwise_weight_grad(const real[:, :, :, ::1] x, const real[:, :, :, ::1] g,
                          Py_ssize_t depth_multiplier):
    cdef Py_ssize_t nb = x.shape[0], nc = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t ho = g.shape[2], wo = g.shape[3]
    cdef Py_ssize_t nd = depth_multiplier
    cdef Py_ssize_t kh = h - ho + 1, kw = wd - wo + 1
    out_arr = np.zeros((nc, nd, kh, kw), dtype=np.float32 if real is float else np.float64)
    cdef real[:, :, :, ::1] dw = out_arr
    cdef Py_ssize_t b, c, d, i, j, p, q
    cdef real acc
    with nogil:
        for c in range(nc):
            for d in range(nd):
                for i in range(kh):
                    for j in range(kw):
                        acc = 0
                        for b in range(nb):
                            for p in range(ho):
                                for q in range(wo):
                                    acc += x[b, c, p + i, q + j] * g[b, c * nd + d, p, q]
                        dw[c, d, i, j] = acc
    return out_arr
