"""Per-sample evaluation reports.

A report head carries the subject, sample id, true label and the class
probabilities; the four content lines give (1) the model, method, smoothing
window and thresholds, (2) the sensitivity results of the original map,
(3) the probability after deleting exactly the highlighted points plus the
deleted portion and the top contributing channels, and (4) the probability
after deleting the highlighted channels. The sensitivity line always refers
to the unprocessed map; the deletion lines refer to the processed one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .evaluation import SensitivityResult
from .pipeline import PipelineConfig, ProcessedMaps


@dataclass(frozen=True)
class Report:
    subject: str
    sample_id: int
    true_label: str
    predicted_label: str
    probabilities: tuple[float, ...]
    model: str
    method: str
    window: int
    sample_threshold: float
    channel_threshold: float
    fractions: tuple[float, ...]
    sensitivity_r: tuple  # float or None per fraction
    channel_r: float | None
    base_probability: float
    deletion_probability: float
    deleted_portion: float
    top_channels: tuple[tuple[str, float], ...]  # (name, share of deleted points)
    channel_deletion_probability: float
    deleted_channels: tuple[str, ...]

    def to_text(self) -> str:
        probs = ", ".join(f"{p:.4f}" for p in self.probabilities)
        rs = " ".join(
            f"{f:g}={_fmt_r(r)}" for f, r in zip(self.fractions, self.sensitivity_r)
        )
        tops = " ".join(f"{name}={share:.4f}" for name, share in self.top_channels)
        lines = [
            f"subject {self.subject} sample {self.sample_id:04d} "
            f"label {self.true_label} predicted {self.predicted_label} "
            f"probabilities [{probs}]",
            f"model={self.model} method={self.method} window={self.window} "
            f"thresholds={self.sample_threshold:.2f}/{self.channel_threshold:.2f}",
            f"sensitivity r: {rs} | channel r={_fmt_r(self.channel_r)}",
            f"deletion: p={self.base_probability:.4f} -> {self.deletion_probability:.4f} "
            f"| portion={self.deleted_portion:.4f} | top channels: {tops or 'none'}",
            f"channel deletion: p={self.base_probability:.4f} -> "
            f"{self.channel_deletion_probability:.4f} | channels: "
            f"{','.join(self.deleted_channels) or 'none'}",
        ]
        return "\n".join(lines) + "\n"


def _fmt_r(r) -> str:
    return "n/a" if r is None else f"{r:.4f}"


def generate_report(
    net,
    stats,
    sample: np.ndarray,
    method_name: str,
    processed: ProcessedMaps,
    sensitivity: SensitivityResult,
    channel_r,
    config: PipelineConfig,
    subject: str = "",
    sample_id: int = 0,
    true_label: str = "",
    channel_names=None,
    class_names=None,
) -> Report:
    """Assemble the report for one sample. Deletion here removes exactly the
    highlighted points/channels of the processed maps and re-runs the model."""
    sample = np.asarray(sample, dtype=net.dtype)
    n_channels, n_times = sample.shape
    if channel_names is None:
        channel_names = tuple(f"C{i:02d}" for i in range(n_channels))
    trace = engine.forward(net, sample, stats)
    probs = trace.probabilities
    target = int(np.argmax(probs))

    mask = processed.point_mask
    deleted = sample.copy()
    deleted[mask] = 0.0
    dtrace = engine.forward(net, deleted, stats)
    counts = mask.sum(axis=1)
    total = int(mask.sum())
    top = []
    if total > 0:
        order = np.argsort(-counts, kind="stable")
        for ch in order[:3]:
            if counts[ch] == 0:
                break
            top.append((channel_names[ch], float(counts[ch] / total)))

    ch_deleted = sample.copy()
    ch_deleted[processed.channel_mask, :] = 0.0
    ctrace = engine.forward(net, ch_deleted, stats)
    ch_names = tuple(
        channel_names[i] for i in range(n_channels) if processed.channel_mask[i]
    )

    def label_of(idx):
        if class_names is not None and 0 <= idx < len(class_names):
            return class_names[idx]
        return str(idx)

    return Report(
        subject=subject,
        sample_id=sample_id,
        true_label=true_label or label_of(target),
        predicted_label=label_of(target),
        probabilities=tuple(float(p) for p in probs),
        model=net.name,
        method=method_name,
        window=config.smoothing_window,
        sample_threshold=config.sample_threshold,
        channel_threshold=config.channel_threshold,
        fractions=sensitivity.fractions,
        sensitivity_r=sensitivity.r_values,
        channel_r=channel_r,
        base_probability=float(probs[target]),
        deletion_probability=float(dtrace.probabilities[target]),
        deleted_portion=float(total / mask.size),
        top_channels=tuple(top),
        channel_deletion_probability=float(ctrace.probabilities[target]),
        deleted_channels=ch_names,
    )
