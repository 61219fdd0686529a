"""Contribution-map processing: normalize, threshold, smooth.

The sample map goes through all three steps in that order; the channel map
has no temporal axis and gets only the first two. A point or channel counts
as highlighted when its final value is positive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class PipelineConfig:
    sample_threshold: float = 2.0
    channel_threshold: float = 1.0
    smoothing_window: int = 5
    colormap_floor: float = -1.0
    colormap_ceiling: float = 1.0

    def __post_init__(self):
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ConfigError("smoothing_window must be an odd integer >= 1")
        if self.colormap_floor >= self.colormap_ceiling:
            raise ConfigError("colormap floor must be below its ceiling")


@dataclass(frozen=True)
class ProcessedMaps:
    sample_map: np.ndarray  # (N, T) after normalize/threshold/smooth
    channel_map: np.ndarray  # (N,) after normalize/threshold
    point_mask: np.ndarray  # bool (N, T), True where highlighted
    channel_mask: np.ndarray  # bool (N,)
    sample_degenerate: bool = False
    channel_degenerate: bool = False


def _normalize(values):
    values = np.asarray(values, np.float64)
    std = float(values.std())
    if std == 0.0:
        return np.zeros_like(values), True
    return (values - values.mean()) / std, False


def normalize(values) -> np.ndarray:
    """Zero mean, unit population std. A constant map comes back all-zero
    with a warning."""
    out, degenerate = _normalize(values)
    if degenerate:
        warnings.warn("normalize: zero-variance map, returning zeros", stacklevel=2)
    return out


def apply_threshold(values, threshold: float) -> np.ndarray:
    """Subtract the threshold and clamp at the colormap floor of -1."""
    return np.maximum(np.asarray(values, np.float64) - threshold, -1.0)


def smooth(values, window: int) -> np.ndarray:
    """Centered moving average along the last axis; the window shrinks at the
    edges instead of inventing padding values. The window must be odd."""
    values = np.asarray(values, np.float64)
    t = values.shape[-1]
    if window % 2 == 0:
        raise ConfigError("smoothing window must be odd")
    if not 1 <= window <= t:
        raise ConfigError(f"smoothing window must lie in [1, {t}]")
    if window == 1:
        return values.copy()
    half = window // 2
    cs = np.concatenate(
        [np.zeros(values.shape[:-1] + (1,)), np.cumsum(values, axis=-1)], axis=-1
    )
    idx = np.arange(t)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, t)
    return (cs[..., hi] - cs[..., lo]) / (hi - lo)


def process(sample_map, channel_map, config: PipelineConfig) -> ProcessedMaps:
    """normalize -> threshold -> smooth for the sample map; normalize ->
    threshold for the channel map. Highlighted means final value > 0."""
    sample_map = np.asarray(sample_map)
    channel_map = np.asarray(channel_map)
    if sample_map.ndim != 2 or channel_map.shape != (sample_map.shape[0],):
        raise ConfigError(
            f"inconsistent shapes: sample map {sample_map.shape}, "
            f"channel map {channel_map.shape}"
        )
    s_norm, s_flag = _normalize(sample_map)
    s_thr = apply_threshold(s_norm, config.sample_threshold)
    s_out = smooth(s_thr, config.smoothing_window)
    c_norm, c_flag = _normalize(channel_map)
    c_out = apply_threshold(c_norm, config.channel_threshold)
    return ProcessedMaps(
        s_out, c_out, s_out > 0, c_out > 0,
        sample_degenerate=s_flag, channel_degenerate=c_flag,
    )
