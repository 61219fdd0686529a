"""Deterministic SVG rendering: colored signal traces and scalp topomaps.

Colors come from a diverging blue -> light gray -> red map over [-1, +1]
(stops #3B4CC0, #DCDCDC, #B40426, linear in RGB). Output is a plain SVG
string with fixed number formatting, so identical inputs give identical
bytes.
"""

from __future__ import annotations

import numpy as np

from .dataset_io import ElectrodeLayout
from .errors import ConfigError

_BLUE = (0x3B, 0x4C, 0xC0)
_GRAY = (0xDC, 0xDC, 0xDC)
_RED = (0xB4, 0x04, 0x26)


def color_hex(value: float, floor: float = -1.0, ceiling: float = 1.0) -> str:
    """Diverging colormap value -> '#rrggbb'; values are clipped to range."""
    v = min(max(float(value), floor), ceiling)
    mid = (floor + ceiling) / 2.0
    if v <= mid:
        t = (v - floor) / (mid - floor)
        lo, hi = _BLUE, _GRAY
    else:
        t = (v - mid) / (ceiling - mid)
        lo, hi = _GRAY, _RED
    rgb = tuple(int(round(a + t * (b - a))) for a, b in zip(lo, hi))
    return "#{:02X}{:02X}{:02X}".format(*rgb)


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_sample_view(sample, processed, channel_names, header: str = "",
                       width: int = 900) -> str:
    """Stacked per-channel signal traces, each segment colored by the
    processed sample map. Returns the SVG document as a string."""
    sample = np.asarray(sample, np.float64)
    values = np.asarray(processed.sample_map if hasattr(processed, "sample_map") else processed)
    n, t = sample.shape
    if len(channel_names) != n:
        raise ConfigError(f"got {len(channel_names)} channel names for {n} channels")
    if values.shape != (n, t):
        raise ConfigError("processed map shape does not match the sample")
    band = 46
    top = 46
    left = 64
    height = top + n * band + 12
    plot_w = width - left - 12
    xs = left + np.arange(t) * (plot_w / max(t - 1, 1))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if header:
        out.append(
            f'<text x="{left}" y="24" font-family="monospace" font-size="14">'
            f"{_escape(header)}</text>"
        )
    # per-channel amplitude scaling keeps every trace inside its band
    for ch in range(n):
        base = top + ch * band + band / 2
        amp = float(np.abs(sample[ch]).max())
        scale = (band * 0.42) / amp if amp > 0 else 0.0
        ys = base - sample[ch] * scale
        out.append(
            f'<text x="6" y="{_f(base + 4)}" font-family="monospace" '
            f'font-size="11">{_escape(channel_names[ch])}</text>'
        )
        out.append(f'<g id="trace{ch}">')
        # merge runs of equal quantized color into single paths
        start = 0
        cur = _quantize(values[ch, 0])
        for i in range(1, t):
            q = _quantize(values[ch, i])
            if q != cur:
                out.append(_path(xs, ys, start, i, _color_q(cur)))
                start, cur = i, q
        if start < t - 1 or t == 1:
            out.append(_path(xs, ys, start, t - 1, _color_q(cur)))
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _quantize(v: float, levels: int = 64) -> int:
    v = min(max(float(v), -1.0), 1.0)
    return int(round((v + 1.0) / 2.0 * (levels - 1)))


def _color_q(q: int, levels: int = 64) -> str:
    return color_hex(q / (levels - 1) * 2.0 - 1.0)


def _path(xs, ys, start, stop, color) -> str:
    pts = " L".join(f"{_f(xs[i])} {_f(ys[i])}" for i in range(start, stop + 1))
    return f'<path d="M{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>'


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def render_topomap(channel_values, layout: ElectrodeLayout, grid: int = 64,
                   size: int = 360, header: str = "") -> str:
    """Inverse-distance-weighted (power 2) interpolation of per-channel
    values over a unit-disc grid, with electrode markers."""
    values = np.asarray(getattr(channel_values, "values", channel_values), np.float64)
    coords = np.asarray(layout.coords, np.float64)
    if values.shape != (coords.shape[0],):
        raise ConfigError(
            f"{values.shape[0]} channel values for a layout with {coords.shape[0]} electrodes"
        )
    for i in range(coords.shape[0]):
        for j in range(i + 1, coords.shape[0]):
            if np.allclose(coords[i], coords[j]):
                raise ConfigError(
                    f"duplicate electrode coordinates: {layout.names[i]!r} and "
                    f"{layout.names[j]!r}"
                )
    margin = 28
    span = size - 2 * margin
    cell = span / grid
    centers = -1.0 + (np.arange(grid) + 0.5) * (2.0 / grid)
    gx, gy = np.meshgrid(centers, centers)
    inside = gx * gx + gy * gy <= 1.0
    d2 = (gx[..., None] - coords[:, 0]) ** 2 + (gy[..., None] - coords[:, 1]) ** 2
    exact = d2.min(axis=-1) < 1e-12
    nearest = d2.argmin(axis=-1)
    with np.errstate(divide="ignore"):
        w = 1.0 / np.maximum(d2, 1e-12)
    field = (w * values).sum(axis=-1) / w.sum(axis=-1)
    field[exact] = values[nearest[exact]]

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if header:
        out.append(
            f'<text x="{margin}" y="18" font-family="monospace" font-size="12">'
            f"{_escape(header)}</text>"
        )

    def to_px(x, y):
        return margin + (x + 1.0) / 2.0 * span, margin + (1.0 - y) / 2.0 * span

    for iy in range(grid):
        for ix in range(grid):
            if not inside[iy, ix]:
                continue
            px, py = to_px(centers[ix] - 1.0 / grid, centers[iy] + 1.0 / grid)
            out.append(
                f'<rect x="{_f(px)}" y="{_f(py)}" width="{_f(cell + 0.5)}" '
                f'height="{_f(cell + 0.5)}" fill="{color_hex(field[iy, ix])}"/>'
            )
    cx, cy = to_px(0.0, 0.0)
    out.append(
        f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(span / 2)}" fill="none" '
        f'stroke="black" stroke-width="1.5"/>'
    )
    for name, (x, y) in zip(layout.names, coords):
        px, py = to_px(x, y)
        out.append(
            f'<circle cx="{_f(px)}" cy="{_f(py)}" r="2.5" fill="black"/>'
        )
        out.append(
            f'<text x="{_f(px + 4)}" y="{_f(py - 3)}" font-family="monospace" '
            f'font-size="9">{_escape(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
