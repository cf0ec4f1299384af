"""Minimal standalone SVG plots (no raster dependencies).

Every plotted quote becomes exactly one circle marker, which downstream
checks rely on. All coordinates are formatted with fixed precision so
reruns emit byte-identical files.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

CLASS_COLORS = {"c": "#2c7fb8", "e": "#fe9929", "t": "#d7301f", "ce": "#41ab5d"}
_FALLBACK_COLORS = ("#6a51a3", "#637939", "#8c6d31", "#843c39")

WIDTH = 640
HEIGHT = 480
MARGIN = 56


def _color(label, palette: dict) -> str:
    if label in palette:
        return palette[label]
    return _FALLBACK_COLORS[sum(ord(ch) for ch in str(label)) % len(_FALLBACK_COLORS)]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Scale:
    def __init__(self, lo: float, hi: float, out_lo: float, out_hi: float):
        if hi <= lo:
            hi = lo + 1.0
        pad = 0.05 * (hi - lo)
        self.lo = lo - pad
        self.hi = hi + pad
        self.out_lo = out_lo
        self.out_hi = out_hi

    def __call__(self, v: float) -> float:
        frac = (v - self.lo) / (self.hi - self.lo)
        return self.out_lo + frac * (self.out_hi - self.out_lo)

    def ticks(self, count: int = 5) -> list[float]:
        return list(np.linspace(self.lo, self.hi, count))


def _axes(parts: list[str], sx: _Scale, sy: _Scale, xlabel: str, ylabel: str,
          title: str) -> None:
    x0 = MARGIN
    y0 = HEIGHT - MARGIN
    parts.append(
        f'<rect x="{MARGIN}" y="{MARGIN}" '
        f'width="{WIDTH - 2 * MARGIN}" height="{HEIGHT - 2 * MARGIN}" '
        'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    for tv in sx.ticks():
        px = sx(tv)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{y0 + 18}" font-size="10" text-anchor="middle">{_fmt(tv)}</text>'
        )
    for tv in sy.ticks():
        py = sy(tv)
        parts.append(
            f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(py + 3)}" font-size="10" text-anchor="end">{_fmt(tv)}</text>'
        )
    parts.append(
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 14}" font-size="12" '
        f'text-anchor="middle">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="16" y="{HEIGHT // 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {HEIGHT // 2})">{escape(ylabel)}</text>'
    )
    parts.append(
        f'<text x="{WIDTH // 2}" y="24" font-size="14" '
        f'text-anchor="middle">{escape(title)}</text>'
    )


def _document(parts: list[str]) -> str:
    body = "\n".join(parts)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>\n'
        f"{body}\n</svg>\n"
    )


def scatter_svg(points: np.ndarray, labels, *, title: str,
                xlabel: str = "LDA dimension 1", ylabel: str = "LDA dimension 2",
                track: np.ndarray | None = None,
                regions: tuple | None = None,
                palette: dict | None = None) -> str:
    """Class-coloured 2-D scatter with an optional track polyline and
    optional decision-region shading.

    ``regions`` is (grid_labels, extent) where grid_labels is a (ny, nx)
    label array over the plot area from extent = (xmin, xmax, ymin, ymax).
    """
    palette = palette or CLASS_COLORS
    points = np.asarray(points, dtype=float)
    xs = points[:, 0]
    ys = points[:, 1]
    all_x = xs if track is None else np.concatenate([xs, np.asarray(track)[:, 0]])
    all_y = ys if track is None else np.concatenate([ys, np.asarray(track)[:, 1]])
    sx = _Scale(float(all_x.min()), float(all_x.max()), MARGIN, WIDTH - MARGIN)
    sy = _Scale(float(all_y.min()), float(all_y.max()), HEIGHT - MARGIN, MARGIN)
    parts: list[str] = []
    if regions is not None:
        grid, extent = regions
        grid = np.asarray(grid, dtype=object)
        ny, nx = grid.shape
        gx = np.linspace(extent[0], extent[1], nx + 1)
        gy = np.linspace(extent[2], extent[3], ny + 1)
        for iy in range(ny):
            for ix in range(nx):
                x_left = sx(gx[ix])
                x_right = sx(gx[ix + 1])
                y_top = sy(gy[iy + 1])
                y_bot = sy(gy[iy])
                parts.append(
                    f'<rect x="{_fmt(x_left)}" y="{_fmt(y_top)}" '
                    f'width="{_fmt(x_right - x_left)}" height="{_fmt(y_bot - y_top)}" '
                    f'fill="{_color(grid[iy, ix], palette)}" fill-opacity="0.18"/>'
                )
    _axes(parts, sx, sy, xlabel, ylabel, title)
    if track is not None and len(track):
        coords = " ".join(
            f"{_fmt(sx(px))},{_fmt(sy(py))}" for px, py in np.asarray(track, dtype=float)
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#000000" stroke-width="1.5"/>'
        )
    for (px, py), lab in zip(points, labels):
        parts.append(
            f'<circle class="marker" cx="{_fmt(sx(px))}" cy="{_fmt(sy(py))}" '
            f'r="3" fill="{_color(lab, palette)}" fill-opacity="0.8"/>'
        )
    return _document(parts)


def timeline_svg(times, values, labels, *, track_times=None, track_values=None,
                 band: np.ndarray | None = None, title: str,
                 xlabel: str = "time (years)", ylabel: str = "LDA dimension 2",
                 palette: dict | None = None) -> str:
    """Measurements (one marker each) and the tracked mean over time, with
    an optional +/-2 sigma band."""
    palette = palette or CLASS_COLORS
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    all_y = [values]
    if track_values is not None:
        all_y.append(np.asarray(track_values, dtype=float))
    if band is not None:
        all_y.extend([np.asarray(band[0]), np.asarray(band[1])])
    ally = np.concatenate(all_y)
    sx = _Scale(float(times.min()), float(times.max()), MARGIN, WIDTH - MARGIN)
    sy = _Scale(float(ally.min()), float(ally.max()), HEIGHT - MARGIN, MARGIN)
    parts: list[str] = []
    _axes(parts, sx, sy, xlabel, ylabel, title)
    if band is not None and track_times is not None:
        for side in band:
            coords = " ".join(
                f"{_fmt(sx(t))},{_fmt(sy(v))}" for t, v in zip(track_times, side)
            )
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="#999999" '
                'stroke-width="1" stroke-dasharray="4 3"/>'
            )
    if track_values is not None and track_times is not None:
        coords = " ".join(
            f"{_fmt(sx(t))},{_fmt(sy(v))}" for t, v in zip(track_times, track_values)
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#000000" stroke-width="1.5"/>'
        )
    for t, v, lab in zip(times, values, labels):
        parts.append(
            f'<circle class="marker" cx="{_fmt(sx(t))}" cy="{_fmt(sy(v))}" '
            f'r="3" fill="{_color(lab, palette)}" fill-opacity="0.8"/>'
        )
    return _document(parts)
