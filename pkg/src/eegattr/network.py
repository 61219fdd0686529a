"""Network description: layers, batch statistics and shape checking.

A network is an ordered tuple of Layer records. Activations flow through as
(C, H, W) feature stacks where the input sample (N channels x T points) enters
as (1, N, T); dense and softmax layers work on flat (K,) vectors. Everything
is immutable after construction: parameter arrays are marked read-only so a
network can be shared freely across threads and worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import ConfigError, ShapeError

LAYER_KINDS = (
    "conv2d",
    "depthwise_conv",
    "separable_conv",
    "pointwise_conv",
    "batch_norm",
    "elu",
    "relu",
    "avg_pool",
    "global_avg_pool",
    "dropout_identity",
    "dense",
    "softmax",
)

NONLINEAR_KINDS = ("relu", "elu")


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr and arr.flags.writeable:
        out = arr.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Layer:
    kind: str
    name: str
    config: dict[str, Any] = field(default_factory=dict)
    params: dict[str, np.ndarray] = field(default_factory=dict)
    input_shape: tuple[int, ...] = ()
    output_shape: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ConfigError(f"unknown layer kind {self.kind!r} (layer {self.name!r})")
        object.__setattr__(self, "params", {k: _frozen(v) for k, v in self.params.items()})


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    n_channels: int
    n_times: int
    n_classes: int
    layers: tuple[Layer, ...]
    hyper: dict[str, Any] = field(default_factory=dict)

    @property
    def dtype(self):
        for layer in self.layers:
            for arr in layer.params.values():
                return arr.dtype
        return np.dtype(np.float32)

    def astype(self, dtype) -> "NetworkSpec":
        layers = tuple(
            replace(l, params={k: v.astype(dtype) for k, v in l.params.items()})
            for l in self.layers
        )
        return replace(self, layers=layers)

    def layer(self, name: str) -> Layer:
        for l in self.layers:
            if l.name == name:
                return l
        raise KeyError(name)

    def nonlinearity_sites(self) -> list[tuple[int, str]]:
        """(index, kind) of every activation layer the backward rules touch."""
        return [(i, l.kind) for i, l in enumerate(self.layers) if l.kind in NONLINEAR_KINDS]

    def batch_norm_names(self) -> list[str]:
        return [l.name for l in self.layers if l.kind == "batch_norm"]

    def n_parameters(self) -> int:
        return sum(int(a.size) for l in self.layers for a in l.params.values())


@dataclass(frozen=True)
class BatchStats:
    """Fixed per-unit mean/std for every batch_norm layer, keyed by layer name;
    each tensor has the shape of that layer's feature stack."""

    means: dict[str, np.ndarray] = field(default_factory=dict)
    stds: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "means", {k: _frozen(v) for k, v in self.means.items()})
        stds = {}
        for k, v in self.stds.items():
            if not np.all(v > 0):
                raise ConfigError(f"batch stats for {k!r} contain non-positive std")
            stds[k] = _frozen(v)
        object.__setattr__(self, "stds", stds)

    def astype(self, dtype) -> "BatchStats":
        return BatchStats(
            means={k: v.astype(dtype) for k, v in self.means.items()},
            stds={k: v.astype(dtype) for k, v in self.stds.items()},
        )


@dataclass(frozen=True)
class BackwardRule:
    """Selects what an activation layer propagates during the reverse pass.

    kind is one of "plain", "deconv", "guided", "epsilon_lrp",
    "deeplift_rescale". epsilon stabilizes the epsilon_lrp denominator;
    near_zero_delta switches deeplift_rescale to a midpoint derivative when
    the input and baseline pre-activations nearly coincide.
    """

    kind: str = "plain"
    epsilon: float = 1e-4
    near_zero_delta: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("plain", "deconv", "guided", "epsilon_lrp", "deeplift_rescale"):
            raise ConfigError(f"unknown backward rule {self.kind!r}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.near_zero_delta <= 0:
            raise ConfigError("near_zero_delta must be positive")


PLAIN = BackwardRule("plain")


def _pad_amounts(kernel: tuple[int, int], padding: str) -> tuple[int, int, int, int]:
    if padding == "valid":
        return (0, 0, 0, 0)
    if padding == "same":
        th, tw = kernel[0] - 1, kernel[1] - 1
        return (th // 2, th - th // 2, tw // 2, tw - tw // 2)
    raise ConfigError(f"unknown padding {padding!r}")


def _conv_out(c: int, h: int, w: int, layer: Layer) -> tuple[int, int, int]:
    cfg = layer.config
    kh, kw = cfg["kernel"]
    pt, pb, pl, pr = _pad_amounts((kh, kw), cfg.get("padding", "valid"))
    ho, wo = h + pt + pb - kh + 1, w + pl + pr - kw + 1
    if ho < 1 or wo < 1:
        raise ShapeError(
            f"layer {layer.name!r}: kernel {kh}x{kw} does not fit input {h}x{w}"
        )
    return ho, wo, 0


def infer_shapes(layers: list[Layer], n_channels: int, n_times: int, n_classes: int) -> tuple[Layer, ...]:
    """Walk the layer chain, check parameter/shape consistency and fill in
    the per-layer input/output shapes. Raises ShapeError naming the first
    offending layer."""
    shape: tuple[int, ...] = (1, n_channels, n_times)
    out: list[Layer] = []
    for layer in layers:
        cfg, params = layer.config, layer.params
        if layer.kind in ("dense", "softmax"):
            pass
        elif len(shape) != 3:
            raise ShapeError(f"layer {layer.name!r} expects a (C,H,W) input, got {shape}")
        c = shape[0] if len(shape) == 3 else 0
        if layer.kind == "conv2d":
            f = cfg["filters"]
            kh, kw = cfg["kernel"]
            _check_param(layer, "weight", (f, c, kh, kw))
            if "bias" in params:
                _check_param(layer, "bias", (f,))
            ho, wo, _ = _conv_out(c, shape[1], shape[2], layer)
            new = (f, ho, wo)
        elif layer.kind == "depthwise_conv":
            d = cfg["depth_multiplier"]
            kh, kw = cfg["kernel"]
            _check_param(layer, "weight", (c, d, kh, kw))
            if "bias" in params:
                _check_param(layer, "bias", (c * d,))
            ho, wo, _ = _conv_out(c, shape[1], shape[2], layer)
            new = (c * d, ho, wo)
        elif layer.kind == "separable_conv":
            f = cfg["filters"]
            kh, kw = cfg["kernel"]
            _check_param(layer, "depthwise", (c, 1, kh, kw))
            _check_param(layer, "pointwise", (f, c))
            if "bias" in params:
                _check_param(layer, "bias", (f,))
            ho, wo, _ = _conv_out(c, shape[1], shape[2], layer)
            new = (f, ho, wo)
        elif layer.kind == "pointwise_conv":
            f = cfg["filters"]
            _check_param(layer, "weight", (f, c))
            if "bias" in params:
                _check_param(layer, "bias", (f,))
            new = (f, shape[1], shape[2])
        elif layer.kind == "batch_norm":
            _check_param(layer, "gamma", (c,))
            _check_param(layer, "beta", (c,))
            new = shape
        elif layer.kind in NONLINEAR_KINDS or layer.kind == "dropout_identity":
            new = shape
        elif layer.kind == "avg_pool":
            ph, pw = cfg["pool"]
            ho, wo = shape[1] // ph, shape[2] // pw
            if ho < 1 or wo < 1:
                raise ShapeError(
                    f"layer {layer.name!r}: pool {ph}x{pw} does not fit input "
                    f"{shape[1]}x{shape[2]}"
                )
            new = (c, ho, wo)
        elif layer.kind == "global_avg_pool":
            new = (c, 1, 1)
        elif layer.kind == "dense":
            m = int(np.prod(shape))
            units = cfg["units"]
            _check_param(layer, "weight", (units, m))
            if "bias" in params:
                _check_param(layer, "bias", (units,))
            new = (units,)
        elif layer.kind == "softmax":
            if len(shape) != 1:
                raise ShapeError(f"layer {layer.name!r} expects a flat input, got {shape}")
            new = shape
        else:  # pragma: no cover - kinds are validated in Layer
            raise ConfigError(layer.kind)
        out.append(replace(layer, input_shape=shape, output_shape=new))
        shape = new
    if shape != (n_classes,):
        raise ShapeError(
            f"network output shape {shape} does not match declared {n_classes} classes"
        )
    return tuple(out)


def _check_param(layer: Layer, name: str, expected: tuple[int, ...]) -> None:
    arr = layer.params.get(name)
    if arr is None:
        raise ShapeError(f"layer {layer.name!r} is missing parameter {name!r}")
    if tuple(arr.shape) != expected:
        raise ShapeError(
            f"layer {layer.name!r} parameter {name!r} has shape {tuple(arr.shape)}, "
            f"expected {expected}"
        )


def make_network(name: str, n_channels: int, n_times: int, n_classes: int,
                 layers: list[Layer], hyper: dict | None = None) -> NetworkSpec:
    """Assemble and shape-check a NetworkSpec from raw layers."""
    if n_channels < 1 or n_times < 1 or n_classes < 1:
        raise ConfigError("channels, times and classes must all be >= 1")
    names = [l.name for l in layers]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate layer names in {name!r}")
    checked = infer_shapes(layers, n_channels, n_times, n_classes)
    return NetworkSpec(name, n_channels, n_times, n_classes, checked, dict(hyper or {}))
