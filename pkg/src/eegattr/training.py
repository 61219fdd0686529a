"""Adam trainer with class-weighted cross-entropy.

Batch normalization layers normalize with the statistics of the current
batch (no running estimates are kept), dropout layers draw their masks from
generators derived from (seed, epoch, batch, layer) so a run is exactly
reproducible, and the per-sample loss is scaled by the weight of its class.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import engine
from .errors import ConfigError, TrainingDivergedError
from .network import PLAIN, NetworkSpec


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 50
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    class_weights: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("beta1/beta2 must lie in [0, 1)")
        if self.class_weights is not None and any(w <= 0 for w in self.class_weights):
            raise ConfigError("class_weights must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


def _as_arrays(dataset):
    if isinstance(dataset, tuple):
        data, labels = dataset
    else:
        data, labels = dataset.data, dataset.labels
    return np.asarray(data, np.float32), np.asarray(labels)


def train(net: NetworkSpec, dataset, config: TrainConfig):
    """Returns (trained network, per-epoch history of loss and accuracy).

    With epochs=0 the input network is returned unchanged."""
    data, labels = _as_arrays(dataset)
    k = net.n_classes
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= k:
        raise ConfigError(f"labels must lie in [0, {k})")
    if data.shape[0] != labels.shape[0]:
        raise ConfigError("data and labels disagree on the number of samples")
    if config.class_weights is None:
        weights = np.ones(k, np.float32)
    else:
        if len(config.class_weights) != k:
            raise ConfigError(f"class_weights must have {k} entries")
        weights = np.asarray(config.class_weights, np.float32)
    if config.epochs == 0:
        return net, []

    params = {}
    for layer in net.layers:
        for pname, arr in layer.params.items():
            params[(layer.name, pname)] = arr.astype(np.float32).copy()
    m = {key: np.zeros_like(v) for key, v in params.items()}
    v = {key: np.zeros_like(val) for key, val in params.items()}
    t = 0
    n = data.shape[0]
    history = []
    dropout_layers = [l.name for l in net.layers if l.kind == "dropout_identity"]

    for epoch in range(config.epochs):
        order = np.random.default_rng([config.seed, epoch]).permutation(n)
        losses, correct = [], 0
        for bi, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            xb, yb = data[idx], labels[idx]
            cur = _with_params(net, params)
            rngs = {
                name: np.random.default_rng([config.seed, epoch, bi, li])
                for li, name in enumerate(dropout_layers)
            }
            trace = engine.forward_batch(
                cur, xb, batch_stat_norm=True, dropout_rngs=rngs, check=False
            )
            logits = trace.logits
            zmax = logits.max(axis=1, keepdims=True)
            logp = logits - zmax - np.log(np.exp(logits - zmax).sum(axis=1, keepdims=True))
            wb = weights[yb]
            batch_loss = float(-(wb * logp[np.arange(len(yb)), yb]).mean())
            if not np.isfinite(batch_loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {bi}"
                )
            losses.append(batch_loss)
            correct += int((logits.argmax(axis=1) == yb).sum())

            g = (trace.probabilities - _one_hot(yb, k, logits.dtype))
            g *= wb[:, None] / len(yb)
            grads = _param_grads(cur, trace, g)
            t += 1
            c1 = 1.0 - config.beta1 ** t
            c2 = 1.0 - config.beta2 ** t
            for key, grad in grads.items():
                m[key] = config.beta1 * m[key] + (1 - config.beta1) * grad
                v[key] = config.beta2 * v[key] + (1 - config.beta2) * grad * grad
                step = config.learning_rate * (m[key] / c1) / (np.sqrt(v[key] / c2) + 1e-8)
                params[key] = params[key] - step
        history.append({
            "epoch": epoch,
            "loss": float(np.mean(losses)),
            "accuracy": correct / n,
        })
    return _with_params(net, params), history


def _one_hot(y, k, dtype):
    out = np.zeros((len(y), k), dtype=dtype)
    out[np.arange(len(y)), y] = 1.0
    return out


def _with_params(net: NetworkSpec, params) -> NetworkSpec:
    layers = tuple(
        replace(l, params={p: params[(l.name, p)] for p in l.params})
        for l in net.layers
    )
    return replace(net, layers=layers)


def _param_grads(net, trace, glogits):
    grads = {}
    g = glogits
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        if layer.kind == "softmax":
            continue
        for pname, arr in engine.layer_param_grads(layer, g, trace.caches[i]).items():
            grads[(layer.name, pname)] = arr
        if i > 0:
            g = engine._layer_input_grad(layer, g, trace.caches[i], PLAIN, None)
    return grads
