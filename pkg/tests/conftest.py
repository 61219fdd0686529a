import numpy as np
import pytest

from eegattr import models
from eegattr.network import Layer, make_network


def make_dense_net(weight, n_channels, n_times, bias=None, name="linear"):
    """A dense-only network: logits = W @ flatten(x) (+ b), then softmax."""
    w = np.asarray(weight, np.float32)
    params = {"weight": w}
    if bias is not None:
        params["bias"] = np.asarray(bias, np.float32)
    layers = [
        Layer("dense", "dense", config={"units": w.shape[0]}, params=params),
        Layer("softmax", "softmax"),
    ]
    return make_network(name, n_channels, n_times, w.shape[0], layers)


def make_relu_net(n_channels, n_times, n_classes=2, filters=4, kernel=8,
                  seed=0, conv_bias=True, dense_bias=True):
    """conv2d -> relu -> dense -> softmax with seeded weights."""
    rng = np.random.default_rng(seed)
    t_out = n_times - kernel + 1
    dense_in = filters * n_channels * t_out
    conv_params = {"weight": rng.standard_normal((filters, 1, 1, kernel)).astype(np.float32) * 0.4}
    if conv_bias:
        conv_params["bias"] = rng.standard_normal(filters).astype(np.float32) * 0.1
    dense_params = {"weight": rng.standard_normal((n_classes, dense_in)).astype(np.float32) * 0.1}
    if dense_bias:
        dense_params["bias"] = rng.standard_normal(n_classes).astype(np.float32) * 0.1
    layers = [
        Layer("conv2d", "conv", config={"filters": filters, "kernel": (1, kernel),
                                        "padding": "valid"}, params=conv_params),
        Layer("relu", "relu"),
        Layer("dense", "dense", config={"units": n_classes}, params=dense_params),
        Layer("softmax", "softmax"),
    ]
    return make_network("relu_net", n_channels, n_times, n_classes, layers)


@pytest.fixture(scope="session")
def icnn_small():
    net = models.build_interpretable_cnn(5, 96, 2, n_temporal_filters=4, seed=11)
    batch = np.random.default_rng(12).standard_normal((8, 5, 96)).astype(np.float32)
    stats = models.compute_batch_stats(net, batch)
    return net, stats


@pytest.fixture(scope="session")
def eegnet_small():
    net = models.build_eegnet(4, 96, 3, f1=4, seed=13)
    batch = np.random.default_rng(14).standard_normal((8, 4, 96)).astype(np.float32)
    stats = models.compute_batch_stats(net, batch)
    return net, stats
