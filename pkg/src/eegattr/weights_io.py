"""Weight persistence: UTF-8 manifest plus a float32 little-endian blob.

The manifest names the architecture and its build hyperparameters, lists
every tensor as "tensor <layer>.<param> <shape> <byte offset>" and closes
with the CRC-32 of the blob. Loading rebuilds the architecture from the
manifest and fails with distinct errors on version, checksum and tensor
shape problems. Round trips are bit-exact.
"""

from __future__ import annotations

import zlib
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ChecksumError, FormatError, ShapeError, VersionError
from .models import BUILDERS
from .network import NetworkSpec

_MAGIC = "EEGATTR-WEIGHTS"
_VERSION = 1


def _tensor_items(net: NetworkSpec):
    for layer in net.layers:
        for pname in sorted(layer.params):
            yield layer.name, pname, layer.params[pname]


def save_weights(net: NetworkSpec, path) -> None:
    if net.name not in BUILDERS:
        raise FormatError(
            f"only builder architectures {sorted(BUILDERS)} can be persisted, "
            f"got {net.name!r}"
        )
    chunks: list[bytes] = []
    tensor_lines: list[str] = []
    offset = 0
    for lname, pname, arr in _tensor_items(net):
        raw = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        shape = ",".join(str(d) for d in arr.shape)
        tensor_lines.append(f"tensor {lname}.{pname} {shape} {offset}")
        chunks.append(raw)
        offset += len(raw)
    blob = b"".join(chunks)
    lines = [
        f"{_MAGIC} {_VERSION}",
        f"architecture {net.name}",
        f"channels {net.n_channels}",
        f"times {net.n_times}",
        f"classes {net.n_classes}",
    ]
    for key in sorted(net.hyper):
        lines.append(f"hyper {key} {net.hyper[key]!r}")
    lines.extend(tensor_lines)
    lines.append(f"crc32 {zlib.crc32(blob)}")
    lines.append(f"blob_bytes {len(blob)}")
    text = "\n".join(lines) + "\n---\n"
    with open(path, "wb") as fh:
        fh.write(text.encode("utf-8"))
        fh.write(blob)


def load_weights(path) -> NetworkSpec:
    raw = Path(path).read_bytes()
    sep = raw.find(b"\n---\n")
    if sep < 0:
        raise FormatError(f"{path}: missing manifest/blob separator")
    header = raw[:sep].decode("utf-8").splitlines()
    blob = raw[sep + 5:]
    magic, _, version = header[0].partition(" ")
    if magic != _MAGIC:
        raise FormatError(f"{path}: not an {_MAGIC} file (got {magic!r})")
    if version.strip() != str(_VERSION):
        raise VersionError(f"{path}: unsupported weight format version {version.strip()!r}")

    arch = None
    dims: dict[str, int] = {}
    hyper: dict = {}
    tensors: list[tuple[str, tuple[int, ...], int]] = []
    crc = declared_bytes = None
    for ln, line in enumerate(header[1:], start=2):
        key, _, rest = line.partition(" ")
        if key == "architecture":
            arch = rest.strip()
        elif key in ("channels", "times", "classes"):
            dims[key] = _int(path, ln, rest)
        elif key == "hyper":
            hname, _, hval = rest.partition(" ")
            hyper[hname] = _literal(path, ln, hval)
        elif key == "tensor":
            name, shape_s, offset_s = rest.split()
            shape = tuple(int(d) for d in shape_s.split(","))
            tensors.append((name, shape, _int(path, ln, offset_s)))
        elif key == "crc32":
            crc = _int(path, ln, rest)
        elif key == "blob_bytes":
            declared_bytes = _int(path, ln, rest)
        else:
            raise FormatError(f"{path}:{ln}: unknown manifest key {key!r}")
    if arch not in BUILDERS:
        raise FormatError(f"{path}: unknown architecture {arch!r}")
    for key in ("channels", "times", "classes"):
        if key not in dims:
            raise FormatError(f"{path}: manifest is missing {key!r}")
    if crc is None or declared_bytes is None:
        raise FormatError(f"{path}: manifest is missing crc32/blob_bytes")
    if len(blob) != declared_bytes:
        raise ChecksumError(
            f"{path}: blob is {len(blob)} bytes, manifest declares {declared_bytes}"
        )
    if zlib.crc32(blob) != crc:
        raise ChecksumError(f"{path}: blob CRC-32 mismatch")

    net = BUILDERS[arch](dims["channels"], dims["times"], dims["classes"], **hyper)
    by_name = {f"{l}.{p}": (l, p, a) for l, p, a in _tensor_items(net)}
    if set(by_name) != {t[0] for t in tensors}:
        raise ShapeError(
            f"{path}: manifest tensors do not match the {arch!r} architecture"
        )
    loaded: dict[tuple[str, str], np.ndarray] = {}
    for name, shape, offset in tensors:
        lname, pname, expected = by_name[name]
        if shape != tuple(expected.shape):
            raise ShapeError(
                f"{path}: tensor {name} has shape {shape}, architecture expects "
                f"{tuple(expected.shape)}"
            )
        nbytes = int(np.prod(shape)) * 4
        if offset < 0 or offset + nbytes > len(blob):
            raise FormatError(f"{path}: tensor {name} runs past the end of the blob")
        arr = np.frombuffer(blob, dtype="<f4", count=int(np.prod(shape)), offset=offset)
        loaded[(lname, pname)] = arr.reshape(shape).astype(np.float32)
    layers = tuple(
        replace(l, params={p: loaded[(l.name, p)] for p in l.params})
        for l in net.layers
    )
    return replace(net, layers=layers)


def _int(path, ln, text):
    try:
        return int(text.strip())
    except ValueError as exc:
        raise FormatError(f"{path}:{ln}: expected an integer, got {text!r}") from exc


def _literal(path, ln, text):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    if text.startswith("'") and text.endswith("'"):
        return text[1:-1]
    raise FormatError(f"{path}:{ln}: cannot parse hyperparameter value {text!r}")
