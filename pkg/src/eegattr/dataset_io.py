"""Dataset, contribution-map and electrode-layout persistence.

Datasets and contribution maps share one container format: a UTF-8 manifest
of "key value" lines, a "---" separator, then a blob of little-endian
float32 values in sample-major row-major order. The manifest carries a
CRC-32 of the blob; any blob corruption or truncation fails the checksum.

Electrode layouts are plain text: one "NAME x y" line per channel with
coordinates inside the unit circle, '#' starting a comment.
"""

from __future__ import annotations

import importlib.resources
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ChecksumError, ConfigError, FormatError, ShapeError, VersionError
from .synth import Dataset

_MAGIC = "EEGATTR-DATA"
_VERSION = 1


def _write_container(path, lines: list[str], blob: bytes) -> None:
    head = [f"{_MAGIC} {_VERSION}"] + lines
    head.append(f"crc32 {zlib.crc32(blob)}")
    head.append(f"blob_bytes {len(blob)}")
    text = "\n".join(head) + "\n---\n"
    with open(path, "wb") as fh:
        fh.write(text.encode("utf-8"))
        fh.write(blob)


def _read_container(path) -> tuple[dict[str, str], bytes]:
    raw = Path(path).read_bytes()
    sep = raw.find(b"\n---\n")
    if sep < 0:
        raise FormatError(f"{path}: missing manifest/blob separator")
    header = raw[:sep].decode("utf-8").splitlines()
    blob = raw[sep + 5:]
    if not header:
        raise FormatError(f"{path}: empty manifest")
    magic, _, version = header[0].partition(" ")
    if magic != _MAGIC:
        raise FormatError(f"{path}: not an {_MAGIC} file (got {magic!r})")
    if version.strip() != str(_VERSION):
        raise VersionError(f"{path}: unsupported format version {version.strip()!r}")
    fields: dict[str, str] = {}
    for ln, line in enumerate(header[1:], start=2):
        key, _, value = line.partition(" ")
        if not key:
            raise FormatError(f"{path}:{ln}: malformed manifest line")
        fields[key] = value
    try:
        declared = int(fields["blob_bytes"])
        crc = int(fields["crc32"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: missing or malformed crc32/blob_bytes") from exc
    if len(blob) != declared:
        raise ChecksumError(
            f"{path}: blob is {len(blob)} bytes, manifest declares {declared}"
        )
    if zlib.crc32(blob) != crc:
        raise ChecksumError(f"{path}: blob CRC-32 mismatch")
    return fields, blob


def _field(fields, path, key):
    if key not in fields:
        raise FormatError(f"{path}: manifest is missing {key!r}")
    return fields[key]


def save_dataset(dataset: Dataset, path) -> None:
    s, n, t = dataset.data.shape
    lines = [
        "kind samples",
        f"channels {n}",
        f"times {t}",
        f"rate {dataset.rate!r}",
        f"count {s}",
        "names " + ",".join(dataset.channel_names),
        "classes " + ",".join(dataset.class_names),
        "subjects " + ",".join(dataset.subjects),
        "labels " + ",".join(str(int(v)) for v in dataset.labels),
        "ids " + ",".join(str(int(v)) for v in dataset.sample_ids),
    ]
    blob = np.ascontiguousarray(dataset.data, dtype="<f4").tobytes()
    _write_container(path, lines, blob)


def load_dataset(path) -> Dataset:
    fields, blob = _read_container(path)
    if _field(fields, path, "kind") != "samples":
        raise FormatError(f"{path}: not a sample dataset (kind={fields['kind']!r})")
    n = int(_field(fields, path, "channels"))
    t = int(_field(fields, path, "times"))
    s = int(_field(fields, path, "count"))
    rate = float(_field(fields, path, "rate"))
    names = tuple(_field(fields, path, "names").split(","))
    classes = tuple(_field(fields, path, "classes").split(","))
    subjects = tuple(_field(fields, path, "subjects").split(","))
    labels = np.asarray([int(v) for v in _field(fields, path, "labels").split(",")])
    ids = np.asarray([int(v) for v in _field(fields, path, "ids").split(",")])
    if len(blob) != s * n * t * 4:
        raise ShapeError(f"{path}: blob holds {len(blob) // 4} floats, expected {s * n * t}")
    if len(names) != n or len(subjects) != s or len(labels) != s or len(ids) != s:
        raise ShapeError(f"{path}: manifest field lengths disagree with count/channels")
    data = np.frombuffer(blob, dtype="<f4").reshape(s, n, t).astype(np.float32)
    return Dataset(data, labels, subjects, names, rate, classes, ids)


@dataclass(frozen=True)
class MapsFile:
    """Contribution maps for a sample selection, one method per file."""

    values: np.ndarray  # (S, N, T)
    method: str
    targets: np.ndarray  # (S,) target class per map
    sample_ids: np.ndarray  # (S,) ids into the source dataset
    channel_names: tuple[str, ...]


def save_contribution_maps(maps: MapsFile, path) -> None:
    s, n, t = maps.values.shape
    lines = [
        "kind contribution_maps",
        f"method {maps.method}",
        f"channels {n}",
        f"times {t}",
        f"count {s}",
        "names " + ",".join(maps.channel_names),
        "targets " + ",".join(str(int(v)) for v in maps.targets),
        "ids " + ",".join(str(int(v)) for v in maps.sample_ids),
    ]
    blob = np.ascontiguousarray(maps.values, dtype="<f4").tobytes()
    _write_container(path, lines, blob)


def load_contribution_maps(path) -> MapsFile:
    fields, blob = _read_container(path)
    if _field(fields, path, "kind") != "contribution_maps":
        raise FormatError(f"{path}: not a contribution-map file")
    n = int(_field(fields, path, "channels"))
    t = int(_field(fields, path, "times"))
    s = int(_field(fields, path, "count"))
    method = _field(fields, path, "method")
    names = tuple(_field(fields, path, "names").split(","))
    targets = np.asarray([int(v) for v in _field(fields, path, "targets").split(",")])
    ids = np.asarray([int(v) for v in _field(fields, path, "ids").split(",")])
    if len(blob) != s * n * t * 4:
        raise ShapeError(f"{path}: blob holds {len(blob) // 4} floats, expected {s * n * t}")
    if len(targets) != s or len(ids) != s or len(names) != n:
        raise ShapeError(f"{path}: manifest field lengths disagree with count/channels")
    values = np.frombuffer(blob, dtype="<f4").reshape(s, n, t).astype(np.float32)
    return MapsFile(values, method, targets, ids, names)


# ---------------------------------------------------------------------------
# electrode layouts

@dataclass(frozen=True)
class ElectrodeLayout:
    names: tuple[str, ...]
    coords: np.ndarray  # (N, 2) inside the unit circle

    def subset(self, names) -> "ElectrodeLayout":
        index = {n: i for i, n in enumerate(self.names)}
        missing = [n for n in names if n not in index]
        if missing:
            raise ConfigError(f"layout has no coordinates for channels {missing}")
        idx = [index[n] for n in names]
        return ElectrodeLayout(tuple(names), self.coords[idx])


def load_layout(path) -> ElectrodeLayout:
    names: list[str] = []
    coords: list[tuple[float, float]] = []
    text = Path(path).read_text(encoding="utf-8")
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}:{ln}: expected 'NAME x y', got {line!r}")
        name = parts[0]
        try:
            x, y = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise FormatError(f"{path}:{ln}: non-numeric coordinate in {line!r}") from exc
        if x * x + y * y > 1.0 + 1e-9:
            raise FormatError(f"{path}:{ln}: electrode {name!r} lies outside the unit circle")
        if name in names:
            raise FormatError(f"{path}:{ln}: duplicate electrode name {name!r}")
        names.append(name)
        coords.append((x, y))
    if not names:
        raise FormatError(f"{path}: layout file has no electrodes")
    return ElectrodeLayout(tuple(names), np.asarray(coords, np.float64))


def default_layout() -> ElectrodeLayout:
    """The bundled 30-channel 10-20 layout."""
    ref = importlib.resources.files("eegattr") / "layouts" / "standard_30.txt"
    with importlib.resources.as_file(ref) as path:
        return load_layout(path)
