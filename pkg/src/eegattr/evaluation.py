"""Quantitative quality metrics for contribution maps.

Patch sensitivity correlates the summed attribution inside zeroed
single-channel windows with the resulting drop of the predicted-class logit
(original minus perturbed). Deletion curves zero the top-ranked points
cumulatively and track the predicted-class probability; their mean is the
AUPC (lower is better). Trial randomness comes from generators derived from
(seed, fraction index, trial index), so results do not depend on execution
order or worker scheduling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import engine
from .errors import ConfigError
from .network import BatchStats, NetworkSpec

DEFAULT_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5)


def pearson(xs, ys):
    """Pearson correlation coefficient, or None when either series has zero
    variance."""
    xs = np.asarray(xs, np.float64)
    ys = np.asarray(ys, np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise ConfigError(f"pearson needs equal-length 1-d series, got {xs.shape} vs {ys.shape}")
    if xs.size < 2:
        raise ConfigError("pearson needs at least two points")
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    sx = math.sqrt(float((xc * xc).mean()))
    sy = math.sqrt(float((yc * yc).mean()))
    if sx == 0.0 or sy == 0.0:
        return None
    return float((xc * yc).mean() / (sx * sy))


@dataclass(frozen=True)
class SensitivityResult:
    fractions: tuple[float, ...]
    r_values: tuple  # float or None per fraction
    trials: int
    seed: int


@dataclass(frozen=True)
class DeletionCurve:
    probabilities: tuple[float, ...]
    aupc: float


def _map_values(m) -> np.ndarray:
    return np.asarray(getattr(m, "values", m))


def _predicted(net, sample, stats):
    logits, probs = engine.logits_batch(net, np.asarray(sample)[None], stats)
    c = int(np.argmax(probs[0]))
    return c, logits[0], probs[0]


def _patch_windows(n_channels, n_times, fractions, trials, seed):
    """Per fraction: (window length, [(channel, start), ...]). Each trial has
    its own generator keyed by (seed, fraction index, trial index)."""
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    schedule = []
    for fi, frac in enumerate(fractions):
        length = int(round(frac * n_times))
        if length < 1:
            raise ConfigError(f"fraction {frac} gives an empty patch for T={n_times}")
        if length > n_times:
            raise ConfigError(f"fraction {frac} exceeds the sample length")
        picks = []
        for ti in range(trials):
            rng = np.random.default_rng([seed, fi, ti])
            ch = int(rng.integers(0, n_channels))
            st = int(rng.integers(0, n_times - length + 1))
            picks.append((ch, st))
        schedule.append((length, picks))
    return schedule


def _patch_deltas(net, sample, stats, schedule):
    """Predicted class plus the logit drop for every scheduled window."""
    sample = np.asarray(sample, dtype=net.dtype)
    c, logits0, _ = _predicted(net, sample, stats)
    total = sum(len(picks) for _, picks in schedule)
    batch = np.repeat(sample[None], total, axis=0)
    i = 0
    for length, picks in schedule:
        for ch, st in picks:
            batch[i, ch, st:st + length] = 0.0
            i += 1
    logits, _ = engine.logits_batch(net, batch, stats)
    deltas = np.float64(logits0[c]) - logits[:, c].astype(np.float64)
    out = []
    i = 0
    for length, picks in schedule:
        out.append(deltas[i:i + len(picks)])
        i += len(picks)
    return c, out


def _window_sums(map_values, schedule):
    values = np.asarray(map_values, np.float64)
    out = []
    for length, picks in schedule:
        out.append(np.asarray([values[ch, st:st + length].sum() for ch, st in picks]))
    return out


def patch_sensitivity(
    net: NetworkSpec,
    sample: np.ndarray,
    stats: BatchStats | None,
    cmap,
    fractions=DEFAULT_FRACTIONS,
    trials: int = 100,
    seed: int = 0,
) -> SensitivityResult:
    """Pearson r between in-window attribution sums and logit drops, per
    patch fraction of the sample length. Windows live on a single channel
    and may overlap across trials."""
    values = _map_values(cmap)
    sample = np.asarray(sample)
    if values.shape != sample.shape:
        raise ConfigError(
            f"map shape {values.shape} does not match sample shape {sample.shape}"
        )
    schedule = _patch_windows(sample.shape[0], sample.shape[1], fractions, trials, seed)
    _, deltas = _patch_deltas(net, sample, stats, schedule)
    sums = _window_sums(values, schedule)
    rs = tuple(pearson(s, d) for s, d in zip(sums, deltas))
    return SensitivityResult(tuple(fractions), rs, trials, seed)


def patch_sensitivity_many(net, sample, stats, maps: dict, fractions=DEFAULT_FRACTIONS,
                           trials: int = 100, seed: int = 0) -> dict:
    """Same as patch_sensitivity for several maps of one sample, sharing the
    perturbation forwards across maps."""
    sample = np.asarray(sample)
    schedule = _patch_windows(sample.shape[0], sample.shape[1], fractions, trials, seed)
    _, deltas = _patch_deltas(net, sample, stats, schedule)
    out = {}
    for name, cmap in maps.items():
        sums = _window_sums(_map_values(cmap), schedule)
        rs = tuple(pearson(s, d) for s, d in zip(sums, deltas))
        out[name] = SensitivityResult(tuple(fractions), rs, trials, seed)
    return out


def channel_deltas(net, sample, stats):
    """Logit drop of the predicted class when zeroing each channel once."""
    sample = np.asarray(sample, dtype=net.dtype)
    n = sample.shape[0]
    c, logits0, _ = _predicted(net, sample, stats)
    batch = np.repeat(sample[None], n, axis=0)
    for i in range(n):
        batch[i, i, :] = 0.0
    logits, _ = engine.logits_batch(net, batch, stats)
    return c, np.float64(logits0[c]) - logits[:, c].astype(np.float64)


def channel_sensitivity(net, sample, stats, channel_map):
    """Single r from perturbing each channel once: channel-map row sums
    (mean times T) against per-channel logit drops."""
    values = _map_values(channel_map)
    sample = np.asarray(sample)
    if sample.shape[0] < 2:
        raise ConfigError("channel sensitivity needs at least two channels")
    if values.shape != (sample.shape[0],):
        raise ConfigError(
            f"channel map shape {values.shape} does not match {sample.shape[0]} channels"
        )
    _, deltas = channel_deltas(net, sample, stats)
    sums = values.astype(np.float64) * sample.shape[1]
    return pearson(sums, deltas)


def _ranking(values):
    """Flat indices in descending score order; ties keep (channel, time)
    lexicographic order."""
    flat = np.asarray(values).ravel()
    return np.argsort(-flat, kind="stable")


def deletion_curve(net, sample, stats, cmap) -> DeletionCurve:
    """Cumulatively zero the top n% ranked points for n = 1..100 and record
    the predicted-class probability at each step; AUPC is their mean."""
    values = _map_values(cmap)
    sample = np.asarray(sample, dtype=net.dtype)
    if values.shape != sample.shape:
        raise ConfigError(
            f"map shape {values.shape} does not match sample shape {sample.shape}"
        )
    c, _, _ = _predicted(net, sample, stats)
    order = _ranking(values)
    total = sample.size
    flat = sample.ravel()
    batch = np.repeat(flat[None], 100, axis=0)
    for step, n in enumerate(range(1, 101)):
        k = int(round(n * total / 100.0))
        batch[step, order[:k]] = 0.0
    _, probs = engine.logits_batch(net, batch.reshape(100, *sample.shape), stats)
    curve = probs[:, c].astype(np.float64)
    return DeletionCurve(tuple(float(p) for p in curve), float(curve.mean()))


def channel_deletion_curve(net, sample, stats, channel_map, cumulative: bool = True) -> DeletionCurve:
    """Delete channels in descending channel-contribution order (ties by
    index). Cumulative by default; cumulative=False re-zeroes one channel at
    a time instead."""
    values = _map_values(channel_map)
    sample = np.asarray(sample, dtype=net.dtype)
    n = sample.shape[0]
    if values.shape != (n,):
        raise ConfigError(f"channel map shape {values.shape} does not match {n} channels")
    c, _, _ = _predicted(net, sample, stats)
    order = np.argsort(-np.asarray(values), kind="stable")
    batch = np.repeat(sample[None], n, axis=0)
    for step in range(n):
        if cumulative:
            batch[step, order[:step + 1], :] = 0.0
        else:
            batch[step, order[step], :] = 0.0
    _, probs = engine.logits_batch(net, batch, stats)
    curve = probs[:, c].astype(np.float64)
    return DeletionCurve(tuple(float(p) for p in curve), float(curve.mean()))


# ---------------------------------------------------------------------------
# per-sample records and aggregation

@dataclass(frozen=True)
class SampleResult:
    sample_id: int
    subject: str
    method: str
    target_class: int
    fractions: tuple[float, ...]
    sensitivity_r: tuple  # float or None per fraction
    channel_r: float | None
    aupc: float | None
    deletion_curve: tuple[float, ...] | None
    channel_aupc: float | None
    channel_deletion_curve: tuple[float, ...] | None

    def to_json_line(self) -> str:
        rec = {
            "sample": self.sample_id,
            "subject": self.subject,
            "method": self.method,
            "target": self.target_class,
            "fractions": list(self.fractions),
            "sensitivity_r": list(self.sensitivity_r),
            "channel_r": self.channel_r,
            "aupc": self.aupc,
            "deletion_curve": None if self.deletion_curve is None else list(self.deletion_curve),
            "channel_aupc": self.channel_aupc,
            "channel_deletion_curve": (
                None if self.channel_deletion_curve is None
                else list(self.channel_deletion_curve)
            ),
        }
        return json.dumps(rec, separators=(",", ":"))

    @staticmethod
    def from_json_line(line: str) -> "SampleResult":
        rec = json.loads(line)
        return SampleResult(
            rec["sample"], rec["subject"], rec["method"], rec["target"],
            tuple(rec["fractions"]), tuple(rec["sensitivity_r"]), rec["channel_r"],
            rec["aupc"],
            None if rec["deletion_curve"] is None else tuple(rec["deletion_curve"]),
            rec["channel_aupc"],
            None if rec["channel_deletion_curve"] is None
            else tuple(rec["channel_deletion_curve"]),
        )


@dataclass(frozen=True)
class Distribution:
    count: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float


def distribution(values) -> Distribution | None:
    """Sort-free summary via linear-interpolation quantiles; None entries are
    skipped by the caller."""
    arr = np.asarray(values, np.float64)
    if arr.size == 0:
        return None
    q1, med, q3 = np.quantile(arr, [0.25, 0.5, 0.75])
    return Distribution(int(arr.size), float(arr.min()), float(q1), float(med),
                        float(q3), float(arr.max()), float(arr.mean()))


@dataclass(frozen=True)
class MethodSummary:
    method: str
    sensitivity_r: Distribution | None
    channel_r: Distribution | None
    aupc: Distribution | None
    channel_aupc: Distribution | None
    undefined_r: int
    mean_deletion_curve: tuple[float, ...] | None


@dataclass(frozen=True)
class EvalSummary:
    methods: dict[str, MethodSummary]


def aggregate(results: list[SampleResult]) -> EvalSummary:
    """Per-method distribution statistics over a sample set. Undefined r
    entries are excluded and counted; raises if nothing is defined at all."""
    if not results:
        raise ConfigError("aggregate needs at least one sample result")
    methods: dict[str, MethodSummary] = {}
    order = []
    for res in results:
        if res.method not in order:
            order.append(res.method)
    any_defined = False
    for method in order:
        group = [r for r in results if r.method == method]
        rs = [v for r in group for v in r.sensitivity_r if v is not None]
        undef = sum(1 for r in group for v in r.sensitivity_r if v is None)
        undef += sum(1 for r in group if r.channel_r is None)
        ch_rs = [r.channel_r for r in group if r.channel_r is not None]
        aupcs = [r.aupc for r in group if r.aupc is not None]
        ch_aupcs = [r.channel_aupc for r in group if r.channel_aupc is not None]
        curves = [r.deletion_curve for r in group if r.deletion_curve is not None]
        mean_curve = None
        if curves:
            mean_curve = tuple(float(v) for v in np.mean(np.asarray(curves), axis=0))
        summary = MethodSummary(
            method,
            distribution(rs), distribution(ch_rs),
            distribution(aupcs), distribution(ch_aupcs),
            undef, mean_curve,
        )
        if any(d is not None for d in (summary.sensitivity_r, summary.channel_r,
                                       summary.aupc, summary.channel_aupc)):
            any_defined = True
        methods[method] = summary
    if not any_defined:
        raise ConfigError("aggregate got only undefined metric values")
    return EvalSummary(methods)


def evaluate_sample(
    net: NetworkSpec,
    stats: BatchStats | None,
    sample: np.ndarray,
    maps: dict,  # method name -> (N, T) values or ContributionMap
    fractions=DEFAULT_FRACTIONS,
    trials: int = 100,
    seed: int = 0,
    sample_id: int = 0,
    subject: str = "",
    deletion_methods=None,
) -> list[SampleResult]:
    """All metrics for one sample over several maps, sharing the patch and
    channel perturbation forwards across maps. deletion_methods restricts
    which maps get (channel) deletion curves; None means all."""
    sample = np.asarray(sample)
    n_channels, n_times = sample.shape
    schedule = _patch_windows(n_channels, n_times, fractions, trials, seed)
    target, deltas = _patch_deltas(net, sample, stats, schedule)
    _, ch_deltas = channel_deltas(net, sample, stats)
    results = []
    for name, cmap in maps.items():
        values = _map_values(cmap)
        sums = _window_sums(values, schedule)
        rs = tuple(pearson(s, d) for s, d in zip(sums, deltas))
        ch_values = values.mean(axis=1)
        ch_r = (
            pearson(ch_values.astype(np.float64) * n_times, ch_deltas)
            if n_channels >= 2 else None
        )
        if deletion_methods is None or name in deletion_methods:
            curve = deletion_curve(net, sample, stats, values)
            ch_curve = channel_deletion_curve(net, sample, stats, ch_values)
            results.append(SampleResult(
                sample_id, subject, name, target, tuple(fractions), rs, ch_r,
                curve.aupc, curve.probabilities, ch_curve.aupc, ch_curve.probabilities,
            ))
        else:
            results.append(SampleResult(
                sample_id, subject, name, target, tuple(fractions), rs, ch_r,
                None, None, None, None,
            ))
    return results
