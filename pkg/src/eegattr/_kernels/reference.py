"""Numpy implementations of the convolution kernels.

All functions take NCHW activations, stride 1, no implicit padding (the
engine pads beforehand). They are written around sliding_window_view +
tensordot/einsum so the contraction runs through BLAS.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_forward(x, w):
    """x: (B,C,H,W), w: (F,C,kh,kw) -> (B,F,H-kh+1,W-kw+1)."""
    win = sliding_window_view(x, (w.shape[2], w.shape[3]), axis=(2, 3))
    out = np.tensordot(win, w, axes=([1, 4, 5], [1, 2, 3]))
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2))


def conv2d_input_grad(g, w):
    """Gradient wrt x for conv2d_forward. g: (B,F,Ho,Wo) -> (B,C,H,W).

    Accumulates one shifted channel-mix per kernel offset, which keeps the
    work at forward-pass cost instead of materializing full-padding windows.
    """
    b, f, ho, wo = g.shape
    _, c, kh, kw = w.shape
    gx = np.zeros((b, c, ho + kh - 1, wo + kw - 1), dtype=g.dtype)
    for i in range(kh):
        for j in range(kw):
            gx[:, :, i:i + ho, j:j + wo] += np.einsum(
                "bfhw,fc->bchw", g, w[:, :, i, j], optimize=True
            )
    return gx


def conv2d_weight_grad(x, g):
    """Gradient wrt w. x: (B,C,H,W), g: (B,F,Ho,Wo) -> (F,C,kh,kw)."""
    ho, wo = g.shape[2], g.shape[3]
    win = sliding_window_view(x, (ho, wo), axis=(2, 3))  # (B,C,kh,kw,Ho,Wo)
    return np.tensordot(g, win, axes=([0, 2, 3], [0, 4, 5]))


def depthwise_forward(x, w):
    """x: (B,C,H,W), w: (C,D,kh,kw) -> (B,C*D,Ho,Wo)."""
    b = x.shape[0]
    c, d, kh, kw = w.shape
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))  # (B,C,Ho,Wo,kh,kw)
    out = np.einsum("bchwij,cdij->bcdhw", win, w, optimize=True)
    return np.ascontiguousarray(out.reshape(b, c * d, out.shape[3], out.shape[4]))


def depthwise_input_grad(g, w):
    """Gradient wrt x for depthwise_forward. g: (B,C*D,Ho,Wo) -> (B,C,H,W)."""
    b, _, ho, wo = g.shape
    c, d, kh, kw = w.shape
    gr = g.reshape(b, c, d, ho, wo)
    gx = np.zeros((b, c, ho + kh - 1, wo + kw - 1), dtype=g.dtype)
    for i in range(kh):
        for j in range(kw):
            gx[:, :, i:i + ho, j:j + wo] += np.einsum(
                "bcdhw,cd->bchw", gr, w[:, :, i, j], optimize=True
            )
    return gx


def depthwise_weight_grad(x, g, depth_multiplier):
    """Gradient wrt w. x: (B,C,H,W), g: (B,C*D,Ho,Wo) -> (C,D,kh,kw)."""
    b, c = x.shape[0], x.shape[1]
    ho, wo = g.shape[2], g.shape[3]
    gr = g.reshape(b, c, depth_multiplier, ho, wo)
    win = sliding_window_view(x, (ho, wo), axis=(2, 3))  # (B,C,kh,kw,Ho,Wo)
    return np.einsum("bcijhw,bcdhw->cdij", win, gr, optimize=True)
