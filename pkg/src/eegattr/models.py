"""Builders for the two compact EEG architectures plus batch statistics
and prediction helpers.

Both builders initialize weights with seeded fan-in-scaled uniform draws,
use stride-1 convolutions and carry no kernel-norm constraints. Batch
normalization never tracks running statistics: callers obtain fixed
statistics from compute_batch_stats over a reference batch.
"""

from __future__ import annotations

import numpy as np

from . import engine
from .errors import ConfigError
from .network import BatchStats, Layer, NetworkSpec, make_network


def _uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(float(fan_in))
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


def build_eegnet(
    n_channels: int,
    n_times: int,
    n_classes: int,
    f1: int = 8,
    depth_multiplier: int = 2,
    temporal_kernel: int = 64,
    separable_kernel: int = 16,
    pool1: int = 4,
    pool2: int = 8,
    dropout_rate: float = 0.25,
    seed: int = 0,
) -> NetworkSpec:
    """EEGNet-f1,d: temporal convolution (same padding), spatial depthwise
    convolution over all channels, then a separable convolution block, each
    conv unit followed by batch norm and ELU, the two blocks closed by
    average pooling and dropout, a dense classifier and softmax. Three ELU
    sites in total."""
    if n_channels < 1:
        raise ConfigError("n_channels must be >= 1")
    min_t = max(temporal_kernel, pool1 * (separable_kernel - 1 + pool2))
    if n_times < min_t:
        raise ConfigError(
            f"eegnet needs n_times >= {min_t} for temporal kernel {temporal_kernel}, "
            f"separable kernel {separable_kernel} and pools {pool1}/{pool2}; got {n_times}"
        )
    f2 = f1 * depth_multiplier
    rng = np.random.default_rng(seed)
    t_pooled = n_times // pool1
    t_out = (t_pooled - (separable_kernel - 1)) // pool2
    dense_in = f2 * t_out

    def bn(name, c):
        return Layer("batch_norm", name, params={
            "gamma": np.ones(c, np.float32), "beta": np.zeros(c, np.float32)})

    layers = [
        Layer("conv2d", "temporal_conv",
              config={"filters": f1, "kernel": (1, temporal_kernel), "padding": "same"},
              params={"weight": _uniform(rng, (f1, 1, 1, temporal_kernel), temporal_kernel)}),
        bn("bn1", f1),
        Layer("elu", "elu1"),
        Layer("depthwise_conv", "spatial_conv",
              config={"depth_multiplier": depth_multiplier, "kernel": (n_channels, 1),
                      "padding": "valid"},
              params={"weight": _uniform(rng, (f1, depth_multiplier, n_channels, 1), n_channels)}),
        bn("bn2", f2),
        Layer("elu", "elu2"),
        Layer("avg_pool", "pool1", config={"pool": (1, pool1)}),
        Layer("dropout_identity", "drop1", config={"rate": dropout_rate}),
        Layer("separable_conv", "separable_conv",
              config={"filters": f2, "kernel": (1, separable_kernel), "padding": "valid"},
              params={"depthwise": _uniform(rng, (f2, 1, 1, separable_kernel), separable_kernel),
                      "pointwise": _uniform(rng, (f2, f2), f2)}),
        bn("bn3", f2),
        Layer("elu", "elu3"),
        Layer("avg_pool", "pool2", config={"pool": (1, pool2)}),
        Layer("dropout_identity", "drop2", config={"rate": dropout_rate}),
        Layer("dense", "dense", config={"units": n_classes},
              params={"weight": _uniform(rng, (n_classes, dense_in), dense_in),
                      "bias": np.zeros(n_classes, np.float32)}),
        Layer("softmax", "softmax"),
    ]
    hyper = {"f1": f1, "depth_multiplier": depth_multiplier,
             "temporal_kernel": temporal_kernel, "separable_kernel": separable_kernel,
             "pool1": pool1, "pool2": pool2, "dropout_rate": dropout_rate, "seed": seed}
    return make_network("eegnet", n_channels, n_times, n_classes, layers, hyper)


def build_interpretable_cnn(
    n_channels: int,
    n_times: int,
    n_classes: int,
    n_temporal_filters: int = 16,
    temporal_kernel: int = 64,
    depth_multiplier: int = 2,
    seed: int = 0,
) -> NetworkSpec:
    """Seven-layer compact CNN: per-channel temporal convolution, spatial
    depthwise convolution spanning all channels, relu, batch norm, global
    average pooling, dense classifier, softmax. One ReLU site."""
    if n_channels < 1:
        raise ConfigError("n_channels must be >= 1")
    if n_times < temporal_kernel:
        raise ConfigError(
            f"interpretable_cnn needs n_times >= {temporal_kernel}; got {n_times}"
        )
    rng = np.random.default_rng(seed)
    f = n_temporal_filters
    f_out = f * depth_multiplier
    layers = [
        Layer("conv2d", "temporal_conv",
              config={"filters": f, "kernel": (1, temporal_kernel), "padding": "valid"},
              params={"weight": _uniform(rng, (f, 1, 1, temporal_kernel), temporal_kernel),
                      "bias": np.zeros(f, np.float32)}),
        Layer("depthwise_conv", "spatial_conv",
              config={"depth_multiplier": depth_multiplier, "kernel": (n_channels, 1),
                      "padding": "valid"},
              params={"weight": _uniform(rng, (f, depth_multiplier, n_channels, 1), n_channels),
                      "bias": np.zeros(f_out, np.float32)}),
        Layer("relu", "relu"),
        Layer("batch_norm", "bn", params={"gamma": np.ones(f_out, np.float32),
                                          "beta": np.zeros(f_out, np.float32)}),
        Layer("global_avg_pool", "gap"),
        Layer("dense", "dense", config={"units": n_classes},
              params={"weight": _uniform(rng, (n_classes, f_out), f_out),
                      "bias": np.zeros(n_classes, np.float32)}),
        Layer("softmax", "softmax"),
    ]
    hyper = {"n_temporal_filters": f, "temporal_kernel": temporal_kernel,
             "depth_multiplier": depth_multiplier, "seed": seed}
    return make_network("interpretable_cnn", n_channels, n_times, n_classes, layers, hyper)


BUILDERS = {"eegnet": build_eegnet, "interpretable_cnn": build_interpretable_cnn}


def compute_batch_stats(net: NetworkSpec, batch) -> BatchStats:
    """Per-unit mean/std of the pre-normalization activations at every
    batch_norm layer, taken over the batch dimension in one forward pass
    (population std, floored at 1e-5). The pass itself normalizes with
    these same statistics."""
    x = np.asarray(batch, dtype=net.dtype)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[0] < 1:
        raise ConfigError("compute_batch_stats needs a non-empty batch of (N, T) samples")
    trace = engine.forward_batch(net, x, batch_stat_norm=True)
    means, stds = {}, {}
    for layer, cache in zip(net.layers, trace.caches):
        if layer.kind == "batch_norm":
            means[layer.name] = cache["mu"]
            stds[layer.name] = cache["std"]
    return BatchStats(means, stds)


def predict(net: NetworkSpec, sample: np.ndarray, stats: BatchStats | None = None):
    """(predicted class, probabilities) for one sample. Ties resolve to the
    lowest class index."""
    trace = engine.forward(net, sample, stats)
    probs = trace.probabilities
    return int(np.argmax(probs)), probs
