"""Schematic scalp maps: per-channel values to CSV and an SVG disc.

Electrode coordinates follow the usual top-view cap layout (nose up): the
row prefix sets the front-to-back position, the site number sets the
lateral offset (odd left, even right, z on the midline). The rendering is
deliberately simple — inverse-distance interpolation on a coarse grid with
a diverging colormap — since the goal is a readable activation sketch, not
a publication plot.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .core import Montage
from .errors import ChannelMismatch, DatasetIoError

# front-to-back coordinate per row prefix (+1 nose, -1 inion)
_ROW_Y = {
    "FP": 0.85,
    "AF": 0.68,
    "F": 0.50,
    "FT": 0.32,
    "FC": 0.32,
    "C": 0.0,
    "T": 0.0,
    "CP": -0.32,
    "TP": -0.32,
    "P": -0.50,
    "PO": -0.68,
    "O": -0.85,
    "I": -0.98,
}

_NAME_RE = re.compile(r"^([A-Za-z]+?)(z|\d+)$")


def electrode_position(name: str) -> tuple[float, float]:
    """Approximate (x, y) inside the unit head disc for a 10/20-style name."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise ChannelMismatch(f"cannot place channel {name!r} on the scalp")
    prefix, site = m.group(1).upper(), m.group(2)
    if prefix not in _ROW_Y:
        raise ChannelMismatch(f"unknown electrode row in {name!r}")
    y = _ROW_Y[prefix]
    if site in ("z", "Z"):
        return (0.0, y)
    n = int(site)
    lateral = (n + 1) // 2  # 1,2 -> 1; 3,4 -> 2; ...
    side = -1.0 if n % 2 == 1 else 1.0
    # widest usable half-chord at this row, with margin for the disc edge
    half = 0.92 * np.sqrt(max(1.0 - y * y, 0.05))
    x = side * min(lateral / 4.6, 1.0) * half
    return (float(x), float(y))


def _diverging_color(v: float) -> str:
    """Blue (-1) through white (0) to red (+1)."""
    v = float(np.clip(v, -1.0, 1.0))
    if v >= 0:
        r, g, b = 255, round(255 * (1 - v)), round(255 * (1 - v))
    else:
        r, g, b = round(255 * (1 + v)), round(255 * (1 + v)), 255
    return f"rgb({r},{g},{b})"


def _interpolate(xs, ys, values, grid_n=48):
    """Inverse-distance-squared interpolation over the unit disc."""
    coords = np.linspace(-1.0, 1.0, grid_n)
    gx, gy = np.meshgrid(coords, coords)
    inside = gx**2 + gy**2 <= 1.0
    d2 = (gx[..., None] - xs) ** 2 + (gy[..., None] - ys) ** 2
    wts = 1.0 / (d2 + 1e-4)
    field = (wts * values).sum(-1) / wts.sum(-1)
    return coords, field, inside


def export_topomap(values, montage: Montage, svg_path, csv_path=None) -> None:
    """Write (channel, value) CSV plus an interpolated SVG disc.

    values must align with montage.channel_names. csv_path defaults to the
    SVG path with a .csv suffix.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (montage.n_channels,):
        raise ChannelMismatch(
            f"{values.shape} values for {montage.n_channels} channels"
        )
    svg_path = Path(svg_path)
    csv_path = svg_path.with_suffix(".csv") if csv_path is None else Path(csv_path)

    lines = ["channel,value"]
    lines += [f"{n},{v:.10g}" for n, v in zip(montage.channel_names, values)]
    positions = np.array([electrode_position(n) for n in montage.channel_names])
    xs, ys = positions[:, 0], positions[:, 1]

    span = float(np.abs(values).max())
    scaled = values / span if span > 0 else np.zeros_like(values)
    coords, field, inside = _interpolate(xs, ys, scaled)

    size, rad = 400, 180
    cx = cy = size // 2
    cell = 2.0 * rad / len(coords)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i, gy_val in enumerate(coords):
        for j, gx_val in enumerate(coords):
            if not inside[i, j]:
                continue
            px = cx + gx_val * rad - cell / 2
            py = cy - gy_val * rad - cell / 2
            parts.append(
                f'<rect x="{px:.1f}" y="{py:.1f}" width="{cell:.1f}" height="{cell:.1f}" '
                f'fill="{_diverging_color(field[i, j])}"/>'
            )
    # head outline, nose, ears
    parts.append(
        f'<circle cx="{cx}" cy="{cy}" r="{rad}" fill="none" stroke="black" stroke-width="2"/>'
    )
    parts.append(
        f'<path d="M {cx - 14} {cy - rad + 2} L {cx} {cy - rad - 16} L {cx + 14} {cy - rad + 2}" '
        f'fill="none" stroke="black" stroke-width="2"/>'
    )
    for name, x, y in zip(montage.channel_names, xs, ys):
        px, py = cx + x * rad, cy - y * rad
        parts.append(
            f'<circle cx="{px:.1f}" cy="{py:.1f}" r="3" fill="black"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{py - 5:.1f}" font-size="9" text-anchor="middle" '
            f'fill="black">{name}</text>'
        )
    parts.append("</svg>")

    try:
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        svg_path.parent.mkdir(parents=True, exist_ok=True)
        svg_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DatasetIoError(f"cannot write topomap: {exc}") from exc
