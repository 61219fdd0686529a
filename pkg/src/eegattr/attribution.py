"""The seven backpropagation-based contribution-map methods plus the random
baseline.

Every method targets the pre-softmax logit of the predicted class (or an
explicit target) and treats batch normalization as a fixed affine map from
the supplied statistics, so a map depends only on the sample, the weights
and those statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .errors import ConfigError, NonFiniteError
from .network import BackwardRule, BatchStats, NetworkSpec

METHOD_KINDS = (
    "saliency",
    "deconvolution",
    "guided_backprop",
    "grad_x_input",
    "integrated_gradients",
    "epsilon_lrp",
    "deeplift_rescale",
)


@dataclass(frozen=True)
class MethodSpec:
    """An attribution method and its parameters.

    steps is the number of path points for integrated_gradients (right-end
    Riemann average with exactly `steps` gradient evaluations); epsilon
    stabilizes epsilon_lrp; near_zero_delta is the deeplift_rescale fallback
    threshold. baseline defaults to the all-zero sample."""

    kind: str
    steps: int = 100
    epsilon: float = 1e-4
    near_zero_delta: float = 1e-6
    baseline: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ConfigError(
                f"unknown attribution method {self.kind!r}; choose from {METHOD_KINDS}"
            )
        if self.steps < 1:
            raise ConfigError("integrated_gradients needs steps >= 1")
        if self.epsilon <= 0 or self.near_zero_delta <= 0:
            raise ConfigError("epsilon and near_zero_delta must be positive")


@dataclass(frozen=True)
class ContributionMap:
    values: np.ndarray  # (N, T)
    method: str
    target_class: int


@dataclass(frozen=True)
class ChannelContributionMap:
    values: np.ndarray  # (N,)
    method: str
    target_class: int


def attribute(
    net: NetworkSpec,
    sample: np.ndarray,
    stats: BatchStats | None,
    method: MethodSpec,
    target_class: int | None = None,
) -> ContributionMap:
    """Contribution map of one sample; target defaults to the predicted class."""
    sample = np.asarray(sample, dtype=net.dtype)
    targets = None if target_class is None else np.asarray([target_class])
    values, used = attribute_batch(net, sample[None], stats, method, targets)
    return ContributionMap(values[0], method.kind, int(used[0]))


def attribute_batch(
    net: NetworkSpec,
    samples: np.ndarray,
    stats: BatchStats | None,
    method: MethodSpec,
    targets: np.ndarray | None = None,
    chunk: int = 64,
):
    """(maps, targets) for a (B, N, T) stack of samples."""
    samples = np.asarray(samples, dtype=net.dtype)
    out = np.empty_like(samples)
    used = np.empty(samples.shape[0], dtype=np.int64)
    for start in range(0, samples.shape[0], chunk):
        stop = min(start + chunk, samples.shape[0])
        sub_t = None if targets is None else np.asarray(targets)[start:stop]
        try:
            vals, tgt = _attribute_chunk(net, samples[start:stop], stats, method, sub_t)
        except NonFiniteError as exc:
            raise NonFiniteError(f"{method.kind}: {exc}") from exc
        if not np.isfinite(vals).all():
            raise NonFiniteError(f"{method.kind}: contribution map contains non-finite values")
        out[start:stop] = vals
        used[start:stop] = tgt
    return out, used


def _baseline(method: MethodSpec, net: NetworkSpec) -> np.ndarray:
    if method.baseline is None:
        return np.zeros((net.n_channels, net.n_times), dtype=net.dtype)
    base = np.asarray(method.baseline, dtype=net.dtype)
    if base.shape != (net.n_channels, net.n_times):
        raise ConfigError(
            f"baseline shape {base.shape} does not match input "
            f"{(net.n_channels, net.n_times)}"
        )
    return base


def _attribute_chunk(net, xs, stats, method, targets):
    trace = engine.forward_batch(net, xs, stats)
    if targets is None:
        targets = trace.probabilities.argmax(axis=1)
    kind = method.kind
    if kind == "saliency":
        return np.abs(engine.backward_batch(net, trace, targets)), targets
    if kind == "deconvolution":
        return engine.backward_batch(net, trace, targets, BackwardRule("deconv")), targets
    if kind == "guided_backprop":
        return engine.backward_batch(net, trace, targets, BackwardRule("guided")), targets
    if kind == "grad_x_input":
        return engine.backward_batch(net, trace, targets) * xs, targets
    if kind == "epsilon_lrp":
        rule = BackwardRule("epsilon_lrp", epsilon=method.epsilon)
        return engine.backward_batch(net, trace, targets, rule) * xs, targets
    if kind == "deeplift_rescale":
        base = _baseline(method, net)
        btrace = engine.forward_batch(net, base[None], stats)
        rule = BackwardRule("deeplift_rescale", near_zero_delta=method.near_zero_delta)
        grads = engine.backward_batch(net, trace, targets, rule, baseline_trace=btrace)
        return grads * (xs - base[None]), targets
    if kind == "integrated_gradients":
        base = _baseline(method, net)
        diff = xs - base[None]
        out = np.empty_like(xs)
        alphas = np.arange(1, method.steps + 1, dtype=net.dtype) / method.steps
        for i in range(xs.shape[0]):
            path = base[None] + alphas[:, None, None] * diff[i][None]
            ptrace = engine.forward_batch(net, path, stats)
            tgt = np.full(method.steps, targets[i])
            grads = engine.backward_batch(net, ptrace, tgt)
            out[i] = grads.mean(axis=0) * diff[i]
        return out, targets
    raise ConfigError(kind)  # pragma: no cover


def channel_contribution(cmap: ContributionMap) -> ChannelContributionMap:
    """Temporal mean of each channel row."""
    return ChannelContributionMap(cmap.values.mean(axis=1), cmap.method, cmap.target_class)


def random_baseline_map(n_channels: int, n_times: int, seed: int) -> ContributionMap:
    """I.i.d. standard-normal map from a counter-based (Philox) generator;
    deterministic per (n_channels, n_times, seed)."""
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    gen = np.random.Generator(np.random.Philox(key=seed))
    values = gen.standard_normal((n_channels, n_times)).astype(np.float32)
    return ContributionMap(values, "random", -1)
