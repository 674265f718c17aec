"""Self-contained SVG charts: scatter, line (with legend) and histogram.

Everything is inline SVG with no scripts, fonts or external references, so a
chart can be dropped next to the CSV it was drawn from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .fitting import _field

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
KINDS = ("scatter", "line", "histogram")

# A y series is a record field name or a (label, record -> value) pair.
YSpec = Union[str, tuple[str, Callable]]


@dataclass
class PlotSpec:
    kind: str = "scatter"
    x_field: str = "n"
    y_fields: Sequence[YSpec] = ("queries_distinct_total",)
    log_x: bool = False
    log_y: bool = False
    title: str = ""
    x_label: str | None = None
    y_label: str | None = None
    bins: int = 20
    width: int = 640
    height: int = 420

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.bins < 1:
            raise ValueError("bins must be positive")


@dataclass
class _Frame:
    x0: float
    x1: float
    y0: float
    y1: float
    left: int = 70
    right: int = 20
    top: int = 40
    bottom: int = 50
    width: int = 640
    height: int = 420
    log_x: bool = False
    log_y: bool = False
    parts: list[str] = field(default_factory=list)

    def _t(self, v, log):
        return math.log10(v) if log else v

    def px(self, x):
        a, b = self._t(self.x0, self.log_x), self._t(self.x1, self.log_x)
        span = (b - a) or 1.0
        return self.left + (self._t(x, self.log_x) - a) / span * (self.width - self.left - self.right)

    def py(self, y):
        a, b = self._t(self.y0, self.log_y), self._t(self.y1, self.log_y)
        span = (b - a) or 1.0
        h = self.height - self.top - self.bottom
        return self.height - self.bottom - (self._t(y, self.log_y) - a) / span * h


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0 ** k for k in range(a, b + 1) if lo <= 10.0 ** k <= hi] or [lo, hi]
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, 5))


def _fmt_tick(v: float) -> str:
    if v != 0 and (abs(v) >= 1e5 or abs(v) < 1e-3):
        return f"{v:.0e}"
    return f"{v:.4g}"


def _pad_range(vals: np.ndarray, log: bool) -> tuple[float, float]:
    lo, hi = float(vals.min()), float(vals.max())
    if log:
        if lo <= 0:
            raise ValueError("log axis needs strictly positive values")
        return (lo / 1.5, hi * 1.5) if lo == hi else (lo, hi)
    if lo == hi:
        return lo - 1.0, hi + 1.0
    return lo, hi


def _axes(f: _Frame, spec: PlotSpec, x_label: str, y_label: str) -> None:
    x_axis_y = f.height - f.bottom
    f.parts.append(f'<line x1="{f.left}" y1="{x_axis_y}" x2="{f.width - f.right}" '
                   f'y2="{x_axis_y}" stroke="black"/>')
    f.parts.append(f'<line x1="{f.left}" y1="{f.top}" x2="{f.left}" y2="{x_axis_y}" '
                   f'stroke="black"/>')
    for t in _ticks(f.x0, f.x1, f.log_x):
        x = f.px(t)
        f.parts.append(f'<line x1="{x:.2f}" y1="{x_axis_y}" x2="{x:.2f}" '
                       f'y2="{x_axis_y + 5}" stroke="black"/>')
        f.parts.append(f'<text x="{x:.2f}" y="{x_axis_y + 18}" font-size="11" '
                       f'text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in _ticks(f.y0, f.y1, f.log_y):
        y = f.py(t)
        f.parts.append(f'<line x1="{f.left - 5}" y1="{y:.2f}" x2="{f.left}" '
                       f'y2="{y:.2f}" stroke="black"/>')
        f.parts.append(f'<text x="{f.left - 8}" y="{y + 4:.2f}" font-size="11" '
                       f'text-anchor="end">{_fmt_tick(t)}</text>')
    f.parts.append(f'<text x="{(f.left + f.width - f.right) / 2:.1f}" y="{f.height - 10}" '
                   f'font-size="12" text-anchor="middle">{escape(x_label)}</text>')
    f.parts.append(f'<text x="15" y="{(f.top + x_axis_y) / 2:.1f}" font-size="12" '
                   f'text-anchor="middle" transform="rotate(-90 15 {(f.top + x_axis_y) / 2:.1f})">'
                   f'{escape(y_label)}</text>')
    if spec.title:
        f.parts.append(f'<text x="{f.width / 2:.1f}" y="22" font-size="14" '
                       f'text-anchor="middle">{escape(spec.title)}</text>')


def _wrap(f: _Frame, attrs: str = "") -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{f.width}" height="{f.height}" '
            f'viewBox="0 0 {f.width} {f.height}"{attrs}>')
    bg = f'<rect width="{f.width}" height="{f.height}" fill="white"/>'
    return "\n".join([head, bg, *f.parts, "</svg>"]) + "\n"


def _series(records: list, spec: PlotSpec) -> list[tuple[str, np.ndarray, np.ndarray]]:
    out = []
    xs = np.array([float(_field(r, spec.x_field)) for r in records])
    for ys in spec.y_fields:
        label, get = (ys, lambda r, k=ys: _field(r, k)) if isinstance(ys, str) else ys
        yv = np.array([float(get(r)) for r in records])
        out.append((label, xs, yv))
    return out


def _cell_means(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ux = np.unique(xs)
    return ux, np.array([ys[xs == x].mean() for x in ux])


def _xy_chart(records: list, spec: PlotSpec) -> str:
    series = _series(records, spec)
    if spec.kind == "line":
        series = [(lab, *_cell_means(x, y)) for lab, x, y in series]
    all_x = np.concatenate([s[1] for s in series])
    all_y = np.concatenate([s[2] for s in series])
    if not (np.all(np.isfinite(all_x)) and np.all(np.isfinite(all_y))):
        raise ValueError("plot values must be finite")
    x0, x1 = _pad_range(all_x, spec.log_x)
    y0, y1 = _pad_range(all_y, spec.log_y)
    f = _Frame(x0, x1, y0, y1, width=spec.width, height=spec.height,
               log_x=spec.log_x, log_y=spec.log_y)
    y_label = spec.y_label or ", ".join(s[0] for s in series)
    _axes(f, spec, spec.x_label or spec.x_field, y_label)
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        f.parts.append(f'<g class="series" data-label={quoteattr(label)} '
                       f'data-count="{xs.size}">')
        if spec.kind == "line" and xs.size > 1:
            pts = " ".join(f"{f.px(x):.2f},{f.py(y):.2f}" for x, y in zip(xs, ys))
            f.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                           f'stroke-width="1.5"/>')
        for x, y in zip(xs, ys):
            f.parts.append(f'<circle class="marker" cx="{f.px(x):.2f}" cy="{f.py(y):.2f}" '
                           f'r="3" fill="{color}"/>')
        f.parts.append("</g>")
    if len(series) > 1:
        lx = f.width - f.right - 170
        f.parts.append('<g class="legend">')
        for i, (label, _, _) in enumerate(series):
            y = f.top + 8 + 16 * i
            color = PALETTE[i % len(PALETTE)]
            f.parts.append(f'<rect x="{lx}" y="{y - 8}" width="12" height="8" fill="{color}"/>')
            f.parts.append(f'<text x="{lx + 18}" y="{y}" font-size="11">{escape(label)}</text>')
        f.parts.append("</g>")
    return _wrap(f)


def _histogram(records: list, spec: PlotSpec) -> str:
    vals = np.array([float(_field(r, spec.x_field)) for r in records])
    if not np.all(np.isfinite(vals)):
        raise ValueError("histogram values must be finite")
    counts, edges = np.histogram(vals, bins=spec.bins)
    f = _Frame(float(edges[0]), float(edges[-1]), 0.0, float(max(counts.max(), 1)),
               width=spec.width, height=spec.height)
    _axes(f, spec, spec.x_label or spec.x_field, spec.y_label or "count")
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        xa, xb, yt = f.px(a), f.px(b), f.py(c)
        f.parts.append(f'<rect class="bin" x="{xa:.2f}" y="{yt:.2f}" '
                       f'width="{max(xb - xa - 1, 0.5):.2f}" height="{f.py(0) - yt:.2f}" '
                       f'fill="{PALETTE[0]}" data-count="{int(c)}" '
                       f'data-lo="{float(a)!r}" data-hi="{float(b)!r}"/>')
    return _wrap(f, f' data-sample-size="{vals.size}"')


def emit_plot(records: Iterable, spec: PlotSpec, path: Path | str | None = None) -> str:
    """Render ``records`` (dicts or record objects) as SVG; optionally write it."""
    records = list(records)
    if not records:
        raise ValueError("nothing to plot: empty record selection")
    svg = _histogram(records, spec) if spec.kind == "histogram" else _xy_chart(records, spec)
    if path is not None:
        Path(path).write_text(svg, encoding="utf-8")
    return svg
