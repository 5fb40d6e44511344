"""Static SVG 1.1 charts: layer-profile bars, layer-by-layer heatmaps, forecast overlays.

Every plotted number is also written into the element as an ``rd:value``
attribute using the same fixed-precision formatting as the CSV writers, so
a chart can be checked against its CSV byte for byte.

Heatmap colour map: linear interpolation in RGB from white ``(255, 255, 255)``
at 0 to dark blue ``(8, 48, 107)`` at 1. Every channel decreases with the
value, so the map is monotone in lightness. Values outside [0, 1] are
clipped for colouring only; their ``rd:value`` keeps the exact number.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .errors import UserInputError

SVG_NS = "http://www.w3.org/2000/svg"
RD_NS = "urn:rnndcor:chart"
CHART_KINDS = ("bar-profile", "heatmap", "forecast-overlay")

LOW_RGB = (255, 255, 255)
HIGH_RGB = (8, 48, 107)
SERIES_COLORS = ("#1f4e79", "#c55a11", "#548235", "#7f6000")


@dataclass(frozen=True)
class SvgChart:
    text: str
    kind: str
    source: str | None = None   # CSV file holding the plotted numbers

    def save(self, path: str | Path) -> Path:
        p = Path(path)
        p.write_text(self.text, encoding="utf-8")
        return p


def fmt(x: float, precision: int) -> str:
    return f"{float(x):.{precision}f}"


def colormap(v: float) -> str:
    """Hex colour for ``v`` on the white-to-dark-blue scale over [0, 1]."""
    t = min(1.0, max(0.0, float(v)))
    rgb = [round(lo + (hi - lo) * t) for lo, hi in zip(LOW_RGB, HIGH_RGB)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _num(x: float) -> str:
    # geometry only; two decimals keeps the output short and stable
    return f"{x:.2f}"


def _open(width: float, height: float, kind: str, title: str, source: str | None) -> list[str]:
    head = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="{SVG_NS}" xmlns:rd="{RD_NS}" version="1.1" '
        f'width="{_num(width)}" height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}" '
        f'rd:kind="{kind}"' + (f" rd:source={quoteattr(source)}" if source else "") + ">",
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{_num(width)}" height="{_num(height)}" fill="#ffffff" class="background"/>',
    ]
    return head


def _text(x: float, y: float, s: str, anchor: str = "middle", size: int = 12, cls: str = "",
          rotate: bool = False) -> str:
    extra = f' transform="rotate(-90 {_num(x)} {_num(y)})"' if rotate else ""
    c = f' class="{cls}"' if cls else ""
    return (f'<text x="{_num(x)}" y="{_num(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}"{c}{extra}>{escape(s)}</text>')


def _check_finite(name: str, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise UserInputError(f"{name} contains non-finite values")


def render_bar_chart(series: Mapping[str, Sequence[float]], *, title: str = "",
                     xlabel: str = "activation layer", ylabel: str = "",
                     categories: Sequence[str] | None = None, precision: int = 6,
                     source: str | None = None) -> SvgChart:
    """Grouped bars, one group per category and one bar per series in each group.

    A layer profile is ``{"dcor": r, "acf": acf}`` with categories 1..T.
    """
    if not series:
        raise UserInputError("nothing to plot")
    names = list(series)
    data = [np.asarray(series[k], dtype=float).ravel() for k in names]
    n = data[0].size
    if n == 0:
        raise UserInputError("empty profile")
    for k, d in zip(names, data):
        if d.size != n:
            raise UserInputError(f"series {k!r} has {d.size} values, expected {n}")
        _check_finite(k, d)
    cats = [str(c) for c in (categories if categories is not None else range(1, n + 1))]
    if len(cats) != n:
        raise UserInputError("one category label per value is required")

    lo = min(0.0, min(float(d.min()) for d in data))
    hi = max(0.0, max(float(d.max()) for d in data))
    if hi == lo:
        hi = 1.0

    left, right, top, bottom = 60.0, 20.0, 40.0, 55.0
    group_w = 36.0 if len(names) > 1 else 24.0
    plot_w = group_w * n
    plot_h = 260.0
    width, height = left + plot_w + right, top + plot_h + bottom + 18.0 * len(names)

    def y_of(v: float) -> float:
        return top + plot_h * (hi - v) / (hi - lo)

    out = _open(width, height, "bar-profile", title or "profile", source)
    if title:
        out.append(_text(width / 2, 22, title, size=14, cls="title"))
    # axes and ticks
    y0 = y_of(0.0)
    out.append(f'<line x1="{_num(left)}" y1="{_num(top)}" x2="{_num(left)}" y2="{_num(top + plot_h)}" '
               'stroke="#000000" stroke-width="1"/>')
    out.append(f'<line x1="{_num(left)}" y1="{_num(y0)}" x2="{_num(left + plot_w)}" y2="{_num(y0)}" '
               'stroke="#000000" stroke-width="1"/>')
    for tick in np.linspace(lo, hi, 5):
        ty = y_of(float(tick))
        out.append(f'<line x1="{_num(left - 4)}" y1="{_num(ty)}" x2="{_num(left)}" y2="{_num(ty)}" '
                   'stroke="#000000" stroke-width="1"/>')
        out.append(_text(left - 6, ty + 4, f"{tick:.2f}", anchor="end", size=10))

    bar_w = (group_w - 6.0) / len(names)
    for s, (name, d) in enumerate(zip(names, data)):
        color = SERIES_COLORS[s % len(SERIES_COLORS)]
        out.append(f'<g class="series" rd:series={quoteattr(name)} fill="{color}">')
        for i, v in enumerate(d):
            x = left + i * group_w + 3.0 + s * bar_w
            ya, yb = sorted((y_of(float(v)), y0))
            out.append(f'<rect x="{_num(x)}" y="{_num(ya)}" width="{_num(bar_w)}" height="{_num(yb - ya)}" '
                       f'class="bar" rd:series={quoteattr(name)} rd:category={quoteattr(cats[i])} '
                       f'rd:value="{fmt(v, precision)}"/>')
        out.append("</g>")
    for i, c in enumerate(cats):
        out.append(_text(left + (i + 0.5) * group_w, top + plot_h + 14, c, size=10))
    out.append(_text(left + plot_w / 2, top + plot_h + 34, xlabel, cls="xlabel"))
    if ylabel:
        out.append(_text(16, top + plot_h / 2, ylabel, cls="ylabel", rotate=True))
    # legend
    ly = top + plot_h + 50
    for s, name in enumerate(names):
        color = SERIES_COLORS[s % len(SERIES_COLORS)]
        out.append(f'<rect x="{_num(left)}" y="{_num(ly + 18 * s - 9)}" width="10" height="10" '
                   f'fill="{color}" class="legend-swatch"/>')
        out.append(_text(left + 16, ly + 18 * s, name, anchor="start", size=11, cls="legend"))
    out.append("</svg>")
    return SvgChart("\n".join(out) + "\n", "bar-profile", source)


def render_heatmap(grid, labels: tuple[str, str] = ("model 1", "model 2"), *, title: str = "",
                   caption: Sequence[str] = (), precision: int = 6,
                   source: str | None = None) -> SvgChart:
    """Cell (v, m) coloured by grid[v-1, m-1]; rows run top to bottom, columns left to right."""
    g = np.asarray(grid, dtype=float)
    if g.ndim != 2 or g.size == 0:
        raise UserInputError(f"heatmap grid must be a non-empty 2-d array, got shape {g.shape}")
    _check_finite("grid", g)
    rows, cols = g.shape
    cell = 24.0
    left, top = 70.0, 40.0
    legend_w = 70.0
    plot_w, plot_h = cell * cols, cell * rows
    width = left + plot_w + legend_w + 20.0
    height = top + plot_h + 50.0 + 16.0 * len(caption)

    out = _open(width, height, "heatmap", title or "heatmap", source)
    if title:
        out.append(_text(width / 2, 22, title, size=14, cls="title"))
    out.append('<g class="cells">')
    for v in range(rows):
        for m in range(cols):
            val = g[v, m]
            out.append(f'<rect x="{_num(left + m * cell)}" y="{_num(top + v * cell)}" width="{_num(cell)}" '
                       f'height="{_num(cell)}" fill="{colormap(val)}" class="cell" rd:row="{v + 1}" '
                       f'rd:col="{m + 1}" rd:value="{fmt(val, precision)}"/>')
    out.append("</g>")
    for m in range(cols):
        out.append(_text(left + (m + 0.5) * cell, top + plot_h + 14, str(m + 1), size=10))
    for v in range(rows):
        out.append(_text(left - 6, top + (v + 0.5) * cell + 4, str(v + 1), anchor="end", size=10))
    out.append(_text(left + plot_w / 2, top + plot_h + 32, f"{labels[1]} layer", cls="xlabel"))
    out.append(_text(18, top + plot_h / 2, f"{labels[0]} layer", cls="ylabel", rotate=True))

    # colour scale: 20 steps from 1 (top) to 0 (bottom)
    lx, steps = left + plot_w + 16.0, 20
    step_h = plot_h / steps
    out.append('<g class="legend-scale">')
    for k in range(steps):
        v = 1.0 - (k + 0.5) / steps
        out.append(f'<rect x="{_num(lx)}" y="{_num(top + k * step_h)}" width="14" '
                   f'height="{_num(step_h)}" fill="{colormap(v)}" class="legend-step"/>')
    out.append("</g>")
    out.append(_text(lx + 18, top + 8, "1", anchor="start", size=10, cls="legend-max"))
    out.append(_text(lx + 18, top + plot_h, "0", anchor="start", size=10, cls="legend-min"))
    for i, line in enumerate(caption):
        out.append(_text(left, top + plot_h + 50 + 16 * i, line, anchor="start", size=11, cls="caption"))
    out.append("</svg>")
    return SvgChart("\n".join(out) + "\n", "heatmap", source)


def render_forecast_overlay(index, actual, forecast, *, title: str = "", precision: int = 6,
                            source: str | None = None) -> SvgChart:
    """Actual and forecast values as two polylines over the target index."""
    idx = np.asarray(index, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    f = np.asarray(forecast, dtype=float).ravel()
    if idx.size == 0:
        raise UserInputError("nothing to plot")
    if not (idx.size == a.size == f.size):
        raise UserInputError("index, actual and forecast must have the same length")
    for name, d in (("index", idx), ("actual", a), ("forecast", f)):
        _check_finite(name, d)

    left, right, top, bottom = 60.0, 20.0, 40.0, 60.0
    plot_w, plot_h = 720.0, 260.0
    width, height = left + plot_w + right, top + plot_h + bottom
    lo, hi = float(min(a.min(), f.min())), float(max(a.max(), f.max()))
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    x0, x1 = float(idx.min()), float(idx.max())
    span = x1 - x0 if x1 > x0 else 1.0

    def pts(d: np.ndarray) -> str:
        xs = left + plot_w * (idx - x0) / span
        ys = top + plot_h * (hi - d) / (hi - lo)
        return " ".join(f"{_num(x)},{_num(y)}" for x, y in zip(xs, ys))

    out = _open(width, height, "forecast-overlay", title or "forecast", source)
    if title:
        out.append(_text(width / 2, 22, title, size=14, cls="title"))
    out.append(f'<rect x="{_num(left)}" y="{_num(top)}" width="{_num(plot_w)}" height="{_num(plot_h)}" '
               'fill="none" stroke="#000000" stroke-width="1"/>')
    for name, d, color in (("actual", a, SERIES_COLORS[0]), ("forecast", f, SERIES_COLORS[1])):
        vals = " ".join(fmt(v, precision) for v in d)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" class="line" '
                   f'rd:series="{name}" rd:values="{vals}" points="{pts(d)}"/>')
    out.append(_text(left - 6, top + 4, f"{hi:.2f}", anchor="end", size=10))
    out.append(_text(left - 6, top + plot_h, f"{lo:.2f}", anchor="end", size=10))
    out.append(_text(left, top + plot_h + 14, f"{x0:.0f}", anchor="start", size=10))
    out.append(_text(left + plot_w, top + plot_h + 14, f"{x1:.0f}", anchor="end", size=10))
    out.append(_text(left + plot_w / 2, top + plot_h + 32, "time index", cls="xlabel"))
    for i, (name, color) in enumerate((("actual", SERIES_COLORS[0]), ("forecast", SERIES_COLORS[1]))):
        lx = left + 140 * i
        out.append(f'<line x1="{_num(lx)}" y1="{_num(top + plot_h + 48)}" x2="{_num(lx + 20)}" '
                   f'y2="{_num(top + plot_h + 48)}" stroke="{color}" stroke-width="2"/>')
        out.append(_text(lx + 26, top + plot_h + 52, name, anchor="start", size=11, cls="legend"))
    out.append("</svg>")
    return SvgChart("\n".join(out) + "\n", "forecast-overlay", source)
