"""Layer-wise forward pass with activation recording and a rule-driven
reverse pass.

The forward pass stores each layer's input (and, for activation layers, the
output) so the reverse pass can replay the network backwards. Activation
layers (relu/elu) propagate whatever the selected BackwardRule dictates;
every other layer propagates its exact vector-Jacobian product. Batch
normalization always behaves as a fixed affine map built from the supplied
BatchStats, so attributions depend only on the sample under study; the one
exception is the batch-statistics mode used by training and by
compute_batch_stats, which normalizes with statistics of the batch at hand.

Attribution seeds target the pre-softmax logit: the softmax layer is skipped
on the way back. A network without any activation layer therefore yields the
plain gradient under every rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .errors import ConfigError, NonFiniteError, ShapeError
from .network import PLAIN, BackwardRule, BatchStats, Layer, NetworkSpec, _pad_amounts


@dataclass
class ForwardTrace:
    """Recorded activations of one forward pass.

    caches holds one dict per layer ("x" input, "y" output for activation
    layers, batch-norm normalizers, dropout masks). logits/probabilities are
    (K,) for a single-sample trace and (B, K) for a batched one.
    """

    caches: list[dict] | None
    logits: np.ndarray
    probabilities: np.ndarray
    single: bool = False

    @property
    def logits_2d(self) -> np.ndarray:
        return self.logits[None] if self.single else self.logits

    @property
    def probabilities_2d(self) -> np.ndarray:
        return self.probabilities[None] if self.single else self.probabilities


def _as_batch(net: NetworkSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    want = (net.n_channels, net.n_times)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[1:] != want:
        raise ShapeError(
            f"input shape {tuple(x.shape)} does not match network "
            f"{net.name!r} input {want}"
        )
    return np.ascontiguousarray(x, dtype=net.dtype)


def forward(net: NetworkSpec, sample: np.ndarray, stats: BatchStats | None = None) -> ForwardTrace:
    """Run one (N, T) sample through the network, recording every layer."""
    sample = np.asarray(sample)
    if sample.shape != (net.n_channels, net.n_times):
        raise ShapeError(
            f"sample shape {tuple(sample.shape)} does not match network "
            f"{net.name!r} input {(net.n_channels, net.n_times)}"
        )
    tr = forward_batch(net, sample[None], stats)
    return ForwardTrace(tr.caches, tr.logits[0], tr.probabilities[0], single=True)


def forward_batch(
    net: NetworkSpec,
    x: np.ndarray,
    stats: BatchStats | None = None,
    *,
    batch_stat_norm: bool = False,
    dropout_rngs: dict[str, np.random.Generator] | None = None,
    record: bool = True,
    check: bool = True,
) -> ForwardTrace:
    """Run a (B, N, T) batch. batch_stat_norm normalizes batch_norm layers
    with statistics of this batch instead of the fixed BatchStats; dropout
    layers stay identity unless a generator is supplied for them."""
    x = _as_batch(net, x)
    if check and not np.isfinite(x).all():
        raise NonFiniteError("input batch contains non-finite values")
    act: np.ndarray = x[:, None, :, :]  # (B, 1, N, T)
    caches: list[dict] | None = [] if record else None
    logits = None
    for layer in net.layers:
        act, cache = _layer_forward(layer, act, stats, batch_stat_norm, dropout_rngs)
        if check and not np.isfinite(act).all():
            raise NonFiniteError(f"layer {layer.name!r} produced non-finite activations")
        if record:
            caches.append(cache)
        if layer.kind == "dense":
            logits = act
    if net.layers[-1].kind != "softmax" or logits is None:
        raise ConfigError(f"network {net.name!r} must end with dense followed by softmax")
    probs = act
    if check:
        s = probs.sum(axis=1)
        if np.abs(s - 1.0).max() > 1e-6:
            raise NonFiniteError("softmax probabilities do not sum to 1")
    return ForwardTrace(caches, logits, probs)


def logits_batch(
    net: NetworkSpec,
    x: np.ndarray,
    stats: BatchStats | None = None,
    chunk: int = 256,
) -> tuple[np.ndarray, np.ndarray]:
    """(logits, probabilities) for a possibly large batch, in fixed chunks.

    Only the final outputs are finiteness-checked, which makes this the fast
    path for perturbation metrics."""
    x = _as_batch(net, x)
    outs, probs = [], []
    for start in range(0, x.shape[0], chunk):
        tr = forward_batch(net, x[start:start + chunk], stats, record=False, check=False)
        outs.append(tr.logits)
        probs.append(tr.probabilities)
    logits = np.concatenate(outs, axis=0)
    if not np.isfinite(logits).all():
        raise NonFiniteError("network produced non-finite logits")
    return logits, np.concatenate(probs, axis=0)


# ---------------------------------------------------------------------------
# per-layer forward

def _bn_vectors(layer: Layer, stats: BatchStats | None):
    if stats is None or layer.name not in stats.means:
        raise ConfigError(
            f"batch_norm layer {layer.name!r} needs batch statistics; call "
            "compute_batch_stats on a reference batch first"
        )
    return stats.means[layer.name], stats.stds[layer.name]


def _layer_forward(layer, x, stats, batch_stat_norm, dropout_rngs):
    kind = layer.kind
    cache: dict = {"x": x}
    if kind == "conv2d":
        xp = _pad(x, layer)
        y = kernels.conv2d_forward(xp, layer.params["weight"])
        if "bias" in layer.params:
            y += layer.params["bias"][None, :, None, None]
    elif kind == "depthwise_conv":
        xp = _pad(x, layer)
        y = kernels.depthwise_forward(xp, layer.params["weight"])
        if "bias" in layer.params:
            y += layer.params["bias"][None, :, None, None]
    elif kind == "separable_conv":
        xp = _pad(x, layer)
        mid = kernels.depthwise_forward(xp, layer.params["depthwise"])
        cache["mid"] = mid
        y = np.einsum("bchw,fc->bfhw", mid, layer.params["pointwise"], optimize=True)
        if "bias" in layer.params:
            y += layer.params["bias"][None, :, None, None]
    elif kind == "pointwise_conv":
        y = np.einsum("bchw,fc->bfhw", x, layer.params["weight"], optimize=True)
        if "bias" in layer.params:
            y += layer.params["bias"][None, :, None, None]
    elif kind == "batch_norm":
        # statistics are per activation unit, taken over the batch dimension
        if batch_stat_norm:
            mu = x.mean(axis=0)
            std = np.sqrt(x.var(axis=0))
            std = np.maximum(std, np.asarray(1e-5, dtype=x.dtype))
            cache["batch_mode"] = True
        else:
            mu, std = _bn_vectors(layer, stats)
        xhat = (x - mu[None]) / std[None]
        y = layer.params["gamma"][None, :, None, None] * xhat
        y += layer.params["beta"][None, :, None, None]
        cache["mu"], cache["std"] = mu, std
        if batch_stat_norm:
            cache["xhat"] = xhat
    elif kind == "relu":
        y = np.maximum(x, 0)
        cache["y"] = y
    elif kind == "elu":
        y = np.where(x > 0, x, np.expm1(x))
        cache["y"] = y
    elif kind == "avg_pool":
        ph, pw = layer.config["pool"]
        b, c, h, w = x.shape
        h2, w2 = h // ph, w // pw
        y = x[:, :, : h2 * ph, : w2 * pw].reshape(b, c, h2, ph, w2, pw).mean(axis=(3, 5))
    elif kind == "global_avg_pool":
        y = x.mean(axis=(2, 3), keepdims=True)
    elif kind == "dropout_identity":
        rng = (dropout_rngs or {}).get(layer.name)
        if rng is None:
            y = x
        else:
            rate = layer.config.get("rate", 0.5)
            keep = (rng.random(x.shape) >= rate).astype(x.dtype)
            mask = keep / np.asarray(1.0 - rate, dtype=x.dtype)
            cache["mask"] = mask
            y = x * mask
    elif kind == "dense":
        flat = x.reshape(x.shape[0], -1)
        cache["flat"] = flat
        y = flat @ layer.params["weight"].T
        if "bias" in layer.params:
            y = y + layer.params["bias"][None, :]
    elif kind == "softmax":
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=1, keepdims=True)
    else:  # pragma: no cover
        raise ConfigError(kind)
    return y, cache


def _pad(x, layer):
    kh, kw = layer.config["kernel"]
    pt, pb, pl, pr = _pad_amounts((kh, kw), layer.config.get("padding", "valid"))
    if pt == pb == pl == pr == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (pt, pb), (pl, pr)))


# ---------------------------------------------------------------------------
# reverse pass

def backward(
    net: NetworkSpec,
    trace: ForwardTrace,
    target_class: int,
    rule: BackwardRule = PLAIN,
    baseline_trace: ForwardTrace | None = None,
) -> np.ndarray:
    """Propagate a one-hot seed at the target-class logit back to the input.

    Returns the (N, T) input-space signal under the selected rule. The
    softmax layer is excluded: the seed sits on the pre-softmax logit."""
    out = backward_batch(net, trace, np.asarray([target_class]), rule, baseline_trace)
    return out[0]


def backward_batch(
    net: NetworkSpec,
    trace: ForwardTrace,
    targets: np.ndarray,
    rule: BackwardRule = PLAIN,
    baseline_trace: ForwardTrace | None = None,
) -> np.ndarray:
    if trace.caches is None:
        raise ConfigError("backward needs a recorded trace (forward with record=True)")
    if rule.kind == "deeplift_rescale" and baseline_trace is None:
        raise ConfigError("deeplift_rescale requires the baseline forward trace")
    logits = trace.logits_2d
    b, k = logits.shape
    targets = np.asarray(targets)
    if targets.shape != (b,) or targets.min() < 0 or targets.max() >= k:
        raise ConfigError(f"targets must be {b} class indices below {k}")
    g = np.zeros((b, k), dtype=logits.dtype)
    g[np.arange(b), targets] = 1.0
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        if layer.kind == "softmax":
            continue
        bcache = baseline_trace.caches[i] if baseline_trace is not None else None
        g = _layer_input_grad(layer, g, trace.caches[i], rule, bcache)
    return g[:, 0, :, :]


def _layer_input_grad(layer, g, cache, rule, bcache):
    kind = layer.kind
    if kind == "conv2d":
        gx = kernels.conv2d_input_grad(np.ascontiguousarray(g), layer.params["weight"])
        return _crop(gx, layer, cache["x"].shape)
    if kind == "depthwise_conv":
        gx = kernels.depthwise_input_grad(np.ascontiguousarray(g), layer.params["weight"])
        return _crop(gx, layer, cache["x"].shape)
    if kind == "separable_conv":
        gmid = np.einsum("bfhw,fc->bchw", g, layer.params["pointwise"], optimize=True)
        gx = kernels.depthwise_input_grad(np.ascontiguousarray(gmid), layer.params["depthwise"])
        return _crop(gx, layer, cache["x"].shape)
    if kind == "pointwise_conv":
        return np.einsum("bfhw,fc->bchw", g, layer.params["weight"], optimize=True)
    if kind == "batch_norm":
        gamma = layer.params["gamma"][None, :, None, None]
        scale = gamma / cache["std"][None]
        if cache.get("batch_mode") and "xhat" in cache:
            xhat = cache["xhat"]
            gm = g.mean(axis=0, keepdims=True)
            gx = (g * xhat).mean(axis=0, keepdims=True)
            return scale * (g - gm - xhat * gx)
        return g * scale
    if kind in ("relu", "elu"):
        z0 = f0 = None
        if rule.kind == "deeplift_rescale":
            if bcache is None:
                raise ConfigError("deeplift_rescale requires the baseline forward trace")
            z0, f0 = bcache["x"], bcache["y"]
        return _apply_rule(kind, rule, cache["x"], cache["y"], g, z0, f0)
    if kind == "avg_pool":
        ph, pw = layer.config["pool"]
        b, c, h, w = cache["x"].shape
        h2, w2 = g.shape[2], g.shape[3]
        up = np.repeat(np.repeat(g, ph, axis=2), pw, axis=3) / (ph * pw)
        if h2 * ph == h and w2 * pw == w:
            return up
        gx = np.zeros_like(cache["x"])
        gx[:, :, : h2 * ph, : w2 * pw] = up
        return gx
    if kind == "global_avg_pool":
        b, c, h, w = cache["x"].shape
        return np.broadcast_to(g / (h * w), (b, c, h, w))
    if kind == "dropout_identity":
        mask = cache.get("mask")
        return g if mask is None else g * mask
    if kind == "dense":
        gx = g @ layer.params["weight"]
        return gx.reshape(cache["x"].shape)
    raise ConfigError(kind)  # pragma: no cover


def _crop(gx, layer, want_shape):
    kh, kw = layer.config["kernel"]
    pt, pb, pl, pr = _pad_amounts((kh, kw), layer.config.get("padding", "valid"))
    if pt == pb == pl == pr == 0:
        return gx
    h, w = want_shape[2], want_shape[3]
    return np.ascontiguousarray(gx[:, :, pt:pt + h, pl:pl + w])


def _deriv(kind, z):
    if kind == "relu":
        return (z > 0).astype(z.dtype)
    one = np.asarray(1.0, dtype=z.dtype)
    return np.where(z > 0, one, np.exp(np.minimum(z, 0)))


def _apply_rule(kind, rule, z, fz, g, z0, f0):
    """Propagated value at an activation layer under each rule.

    plain:    g * f'(z)
    deconv:   max(g, 0), ignoring f'
    guided:   g * f'(z) masked to z > 0 and g > 0
    epsilon_lrp: g * f(z) / (z + eps * sign(z)), sign(0) taken as +1
    deeplift_rescale: g * (f(z) - f(z0)) / (z - z0), midpoint derivative
                      when |z - z0| < near_zero_delta
    """
    if rule.kind == "plain":
        return g * _deriv(kind, z)
    if rule.kind == "deconv":
        return np.maximum(g, 0)
    if rule.kind == "guided":
        return g * _deriv(kind, z) * ((z > 0) & (g > 0))
    if rule.kind == "epsilon_lrp":
        one = np.asarray(1.0, dtype=z.dtype)
        denom = z + rule.epsilon * np.where(z >= 0, one, -one)
        return g * (fz / denom)
    if rule.kind == "deeplift_rescale":
        dz = z - z0
        small = np.abs(dz) < rule.near_zero_delta
        safe = np.where(small, np.asarray(1.0, dtype=z.dtype), dz)
        mult = np.where(small, _deriv(kind, (z + z0) * 0.5), (fz - f0) / safe)
        return g * mult
    raise ConfigError(rule.kind)  # pragma: no cover


# ---------------------------------------------------------------------------
# parameter gradients (training support)

def layer_param_grads(layer, g, cache):
    """Gradients of the loss wrt this layer's parameters given the upstream
    gradient g at its output."""
    kind = layer.kind
    grads: dict[str, np.ndarray] = {}
    if kind == "conv2d":
        xp = _pad(cache["x"], layer)
        g = np.ascontiguousarray(g)
        grads["weight"] = kernels.conv2d_weight_grad(xp, g)
        if "bias" in layer.params:
            grads["bias"] = g.sum(axis=(0, 2, 3))
    elif kind == "depthwise_conv":
        xp = _pad(cache["x"], layer)
        g = np.ascontiguousarray(g)
        d = layer.config["depth_multiplier"]
        grads["weight"] = kernels.depthwise_weight_grad(xp, g, d)
        if "bias" in layer.params:
            grads["bias"] = g.sum(axis=(0, 2, 3))
    elif kind == "separable_conv":
        xp = _pad(cache["x"], layer)
        mid = cache["mid"]
        grads["pointwise"] = np.einsum("bfhw,bchw->fc", g, mid, optimize=True)
        gmid = np.einsum("bfhw,fc->bchw", g, layer.params["pointwise"], optimize=True)
        grads["depthwise"] = kernels.depthwise_weight_grad(xp, np.ascontiguousarray(gmid), 1)
        if "bias" in layer.params:
            grads["bias"] = g.sum(axis=(0, 2, 3))
    elif kind == "pointwise_conv":
        grads["weight"] = np.einsum("bfhw,bchw->fc", g, cache["x"], optimize=True)
        if "bias" in layer.params:
            grads["bias"] = g.sum(axis=(0, 2, 3))
    elif kind == "batch_norm":
        xhat = cache.get("xhat")
        if xhat is None:
            xhat = (cache["x"] - cache["mu"][None]) / cache["std"][None]
        grads["gamma"] = (g * xhat).sum(axis=(0, 2, 3))
        grads["beta"] = g.sum(axis=(0, 2, 3))
    elif kind == "dense":
        grads["weight"] = g.T @ cache["flat"]
        if "bias" in layer.params:
            grads["bias"] = g.sum(axis=0)
    return grads


# ---------------------------------------------------------------------------
# finite differences

def finite_diff_gradient(
    net: NetworkSpec,
    sample: np.ndarray,
    stats: BatchStats | None = None,
    target_class: int = 0,
    h: float = 1e-3,
    chunk: int = 512,
) -> np.ndarray:
    """Central-difference gradient of the target logit wrt every input
    coordinate: (f(x + h e) - f(x - h e)) / (2h). Returned in float64."""
    if h <= 0:
        raise ConfigError("finite-difference step h must be positive")
    x = np.ascontiguousarray(sample, dtype=net.dtype)
    if x.shape != (net.n_channels, net.n_times):
        raise ShapeError(
            f"sample shape {tuple(x.shape)} does not match network input "
            f"{(net.n_channels, net.n_times)}"
        )
    flat = x.ravel()
    n = flat.size
    grad = np.empty(n, dtype=np.float64)
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        m = idx.size
        batch = np.repeat(flat[None, :], 2 * m, axis=0)
        batch[np.arange(m), idx] += h
        batch[m + np.arange(m), idx] -= h
        logits, _ = logits_batch(net, batch.reshape(2 * m, *x.shape), stats)
        vals = logits[:, target_class].astype(np.float64)
        grad[idx] = (vals[:m] - vals[m:]) / (2.0 * h)
    return grad.reshape(x.shape)
