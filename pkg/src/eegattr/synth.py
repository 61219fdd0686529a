"""Deterministic synthetic EEG-like data with class-discriminative features.

Samples are pink-noise backgrounds with injected feature archetypes: alpha
spindles (Hann-windowed ~10 Hz carrier), short biphasic blink pulses on
designated channels, band-limited 30-50 Hz EMG bursts, and a negative-then-
positive transient at a configurable latency. Generation is a pure function
of (configuration, seed): every sample draws from its own generator keyed by
(seed, subject, class, index).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

FEATURE_KINDS = ("alpha_spindle", "blink_pulse", "emg_noise", "frn_transient", "pink_background")


@dataclass(frozen=True)
class FeatureSpec:
    kind: str
    amplitude: float = 1.0
    channels: tuple[int, ...] = ()  # empty = every channel
    freq: float = 10.0
    band: tuple[float, float] = (30.0, 50.0)
    duration: float = 0.75
    latency: float | None = None

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ConfigError(f"unknown feature kind {self.kind!r}; choose from {FEATURE_KINDS}")
        if self.duration <= 0:
            raise ConfigError("feature duration must be positive")
        if self.band[0] >= self.band[1]:
            raise ConfigError("feature band must be (low, high) with low < high")


@dataclass(frozen=True)
class ClassSpec:
    name: str
    features: tuple[FeatureSpec, ...] = ()


@dataclass(frozen=True)
class EEGSample:
    data: np.ndarray  # (N, T)
    label: int
    subject: str
    channel_names: tuple[str, ...]
    sample_id: int


@dataclass
class Dataset:
    data: np.ndarray  # (S, N, T) float32
    labels: np.ndarray  # (S,)
    subjects: tuple[str, ...]  # per sample
    channel_names: tuple[str, ...]
    rate: float
    class_names: tuple[str, ...]
    sample_ids: np.ndarray  # (S,)

    def __len__(self):
        return self.data.shape[0]

    @property
    def n_channels(self):
        return self.data.shape[1]

    @property
    def n_times(self):
        return self.data.shape[2]

    def sample(self, i: int) -> EEGSample:
        return EEGSample(self.data[i], int(self.labels[i]), self.subjects[i],
                         self.channel_names, int(self.sample_ids[i]))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        return Dataset(self.data[idx], self.labels[idx],
                       tuple(self.subjects[i] for i in idx),
                       self.channel_names, self.rate, self.class_names,
                       self.sample_ids[idx])

    def subject_list(self) -> tuple[str, ...]:
        seen = []
        for s in self.subjects:
            if s not in seen:
                seen.append(s)
        return tuple(seen)


DEFAULT_CHANNEL_NAMES = (
    "FP1", "FP2", "F7", "F3", "FZ", "F4", "F8", "FT7", "FC3", "FCZ",
    "FC4", "FT8", "T3", "C3", "CZ", "C4", "T4", "TP7", "CP3", "CPZ",
    "CP4", "TP8", "T5", "P3", "PZ", "P4", "T6", "O1", "OZ", "O2",
)


def generate_dataset(
    n_channels: int,
    n_times: int,
    rate: float,
    classes: list[ClassSpec] | tuple[ClassSpec, ...],
    samples_per_class: int,
    n_subjects: int,
    seed: int,
    background_amplitude: float = 1.0,
    channel_names: tuple[str, ...] | None = None,
) -> Dataset:
    """Balanced per subject and class: every subject contributes
    samples_per_class samples of each class."""
    if n_channels < 1 or n_times < 8:
        raise ConfigError("need n_channels >= 1 and n_times >= 8")
    if not classes:
        raise ConfigError("at least one class specification is required")
    if samples_per_class < 1 or n_subjects < 1:
        raise ConfigError("samples_per_class and n_subjects must be >= 1")
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    for cls in classes:
        for feat in cls.features:
            _validate_feature(feat, n_channels, n_times, rate)
    if channel_names is None:
        if n_channels <= len(DEFAULT_CHANNEL_NAMES):
            channel_names = DEFAULT_CHANNEL_NAMES[:n_channels]
        else:
            channel_names = tuple(f"C{i:02d}" for i in range(n_channels))
    if len(channel_names) != n_channels:
        raise ConfigError("channel_names length must equal n_channels")

    total = n_subjects * len(classes) * samples_per_class
    data = np.empty((total, n_channels, n_times), np.float32)
    labels = np.empty(total, np.int64)
    subjects = []
    i = 0
    for si in range(n_subjects):
        gain = 0.85 + 0.3 * float(np.random.default_rng([seed, si, 7001]).random())
        for ci, cls in enumerate(classes):
            for k in range(samples_per_class):
                rng = np.random.default_rng([seed, si, ci, k])
                x = _background(rng, n_channels, n_times, background_amplitude)
                for feat in cls.features:
                    _apply_feature(x, feat, rng, rate, gain)
                data[i] = x
                labels[i] = ci
                subjects.append(f"S{si:02d}")
                i += 1
    return Dataset(data, labels, tuple(subjects), tuple(channel_names), float(rate),
                   tuple(c.name for c in classes), np.arange(total))


def split_leave_one_subject_out(dataset: Dataset, held_out: str):
    """(train, test) partition by subject id; test holds exactly held_out."""
    known = dataset.subject_list()
    if held_out not in known:
        raise ConfigError(f"unknown subject {held_out!r}; dataset has {list(known)}")
    mask = np.asarray([s == held_out for s in dataset.subjects])
    return dataset.subset(np.flatnonzero(~mask)), dataset.subset(np.flatnonzero(mask))


# ---------------------------------------------------------------------------

def _validate_feature(feat: FeatureSpec, n_channels, n_times, rate):
    nyquist = rate / 2.0
    if feat.kind == "alpha_spindle" and feat.freq >= nyquist:
        raise ConfigError(f"spindle frequency {feat.freq} exceeds Nyquist {nyquist}")
    if feat.kind == "emg_noise" and feat.band[1] >= nyquist:
        raise ConfigError(f"EMG band top {feat.band[1]} exceeds Nyquist {nyquist}")
    if int(feat.duration * rate) > n_times:
        raise ConfigError(
            f"feature duration {feat.duration}s does not fit {n_times} points at {rate} Hz"
        )
    for ch in feat.channels:
        if not 0 <= ch < n_channels:
            raise ConfigError(f"feature channel {ch} out of range for {n_channels} channels")


def _background(rng, n_channels, n_times, amplitude):
    x = np.empty((n_channels, n_times), np.float32)
    for ch in range(n_channels):
        x[ch] = amplitude * _pink(rng, n_times)
    return x


def _pink(rng, t):
    """Unit-variance 1/f noise via spectral shaping."""
    freqs = np.fft.rfftfreq(t)
    spec = rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)
    scale = np.zeros_like(freqs)
    scale[1:] = 1.0 / np.sqrt(freqs[1:])
    x = np.fft.irfft(spec * scale, t)
    std = x.std()
    return (x / std if std > 0 else x).astype(np.float32)


def _target_channels(feat, n_channels):
    return feat.channels if feat.channels else tuple(range(n_channels))


def _place(rng, feat, n_times, rate, length):
    if feat.latency is not None:
        start = int(round(feat.latency * rate))
        start = min(max(start, 0), n_times - length)
    else:
        start = int(rng.integers(0, n_times - length + 1))
    return start


def _apply_feature(x, feat, rng, rate, gain):
    n_channels, n_times = x.shape
    amp = np.float32(feat.amplitude * gain)
    if feat.kind == "pink_background":
        for ch in _target_channels(feat, n_channels):
            x[ch] += amp * _pink(rng, n_times)
        return
    if feat.kind == "alpha_spindle":
        length = int(feat.duration * rate)
        start = _place(rng, feat, n_times, rate, length)
        f = feat.freq + rng.uniform(-0.5, 0.5)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        tt = np.arange(length) / rate
        wave = np.hanning(length) * np.sin(2.0 * np.pi * f * tt + phase)
        for ch in _target_channels(feat, n_channels):
            x[ch, start:start + length] += amp * wave.astype(np.float32)
        return
    if feat.kind == "emg_noise":
        length = int(feat.duration * rate)
        start = _place(rng, feat, n_times, rate, length)
        noise = rng.standard_normal(length)
        freqs = np.fft.rfftfreq(length, 1.0 / rate)
        mask = (freqs >= feat.band[0]) & (freqs <= feat.band[1])
        shaped = np.fft.irfft(np.fft.rfft(noise) * mask, length)
        std = shaped.std()
        if std > 0:
            shaped = shaped / std
        wave = np.hanning(length) * shaped
        for ch in _target_channels(feat, n_channels):
            x[ch, start:start + length] += amp * wave.astype(np.float32)
        return
    if feat.kind == "blink_pulse":
        length = max(int(feat.duration * rate), 4)
        start = _place(rng, feat, n_times, rate, length)
        u = np.arange(length) / length
        wave = np.hanning(length) * np.sin(2.0 * np.pi * u)  # one biphasic cycle
        for ch in _target_channels(feat, n_channels):
            x[ch, start:start + length] += amp * wave.astype(np.float32)
        return
    if feat.kind == "frn_transient":
        lat = 0.25 if feat.latency is None else feat.latency
        lat = lat + float(rng.uniform(-0.02, 0.02))
        tt = np.arange(n_times) / rate
        neg = np.exp(-0.5 * ((tt - lat) / 0.03) ** 2)
        pos = np.exp(-0.5 * ((tt - lat - 0.15) / 0.05) ** 2)
        wave = -neg + 0.7 * pos
        for ch in _target_channels(feat, n_channels):
            x[ch] += amp * wave.astype(np.float32)
        return
    raise ConfigError(feat.kind)  # pragma: no cover


def demo_classes(n_channels: int) -> tuple[ClassSpec, ClassSpec]:
    """Two desk-scale classes: alpha spindles on central channels vs EMG
    bursts on temporal channels."""
    mid = max(n_channels // 2, 1)
    spindle_ch = tuple(range(1, min(4, n_channels))) or (0,)
    emg_ch = tuple(c for c in range(mid, min(mid + 3, n_channels))) or (n_channels - 1,)
    return (
        ClassSpec("spindle", (FeatureSpec("alpha_spindle", amplitude=2.5,
                                          channels=spindle_ch, freq=10.0, duration=0.75),)),
        ClassSpec("emg", (FeatureSpec("emg_noise", amplitude=2.0, channels=emg_ch,
                                      band=(30.0, 50.0), duration=0.75),)),
    )
