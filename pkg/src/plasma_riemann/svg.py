"""Minimal deterministic SVG line charts.

Coordinates are written with a fixed number of significant digits so repeated
runs produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#7f7f7f")


def _num(x: float) -> str:
    return format(float(x), ".6g")


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if not hi > lo:
        return [lo]
    raw = (hi - lo) / max(count, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    ticks = []
    k = 0
    while start + k * step <= hi + 1e-12 * step:
        ticks.append(float(round(start + k * step, 12)))
        k += 1
    return ticks


@dataclass
class _Series:
    kind: str  # "line", "fill", "marker"
    x: np.ndarray
    y: np.ndarray
    color: str
    label: Optional[str]
    dash: Optional[str] = None
    width: float = 1.5
    opacity: float = 1.0


@dataclass
class Chart:
    """One panel with axes, polylines, shaded polygons and markers."""

    title: str
    xlabel: str
    ylabel: str
    width: int = 640
    height: int = 420
    series: list = field(default_factory=list)

    def line(self, x, y, label=None, color=None, dash=None, width=1.5):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        color = color or PALETTE[len([s for s in self.series if s.kind == "line"]) % len(PALETTE)]
        self.series.append(_Series("line", x, y, color, label, dash, width))
        return self

    def fill(self, x, y, color="#1f77b4", opacity=0.15, label=None):
        self.series.append(_Series("fill", np.asarray(x, float), np.asarray(y, float), color, label, opacity=opacity))
        return self

    def markers(self, x, y, color="#000000", label=None):
        self.series.append(_Series("marker", np.asarray(x, float), np.asarray(y, float), color, label))
        return self

    def _bounds(self):
        xs = np.concatenate([s.x[np.isfinite(s.x)] for s in self.series] or [np.zeros(1)])
        ys = np.concatenate([s.y[np.isfinite(s.y)] for s in self.series] or [np.zeros(1)])
        x0, x1 = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
        y0, y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
        if x1 == x0:
            x0, x1 = x0 - 1, x1 + 1
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1
        pad = 0.05 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self) -> str:
        left, right, top, bottom = 70, 20, 40, 55
        pw, ph = self.width - left - right, self.height - top - bottom
        x0, x1, y0, y1 = self._bounds()

        def px(x):
            return left + (np.asarray(x) - x0) / (x1 - x0) * pw

        def py(y):
            return top + (y1 - np.asarray(y)) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="#ffffff"/>',
            f'<text x="{self.width / 2}" y="22" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
            f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>',
        ]
        for tx in nice_ticks(x0, x1):
            X = _num(px(tx))
            out.append(f'<line x1="{X}" y1="{top + ph}" x2="{X}" y2="{top + ph + 5}" stroke="#000000"/>')
            out.append(f'<text x="{X}" y="{top + ph + 18}" text-anchor="middle">{_num(tx)}</text>')
        for ty in nice_ticks(y0, y1):
            Y = _num(py(ty))
            out.append(f'<line x1="{left - 5}" y1="{Y}" x2="{left}" y2="{Y}" stroke="#000000"/>')
            out.append(f'<text x="{left - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">{_num(ty)}</text>')
        out.append(f'<text x="{left + pw / 2}" y="{self.height - 12}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(
            f'<text x="16" y="{top + ph / 2}" text-anchor="middle" transform="rotate(-90 16 {top + ph / 2})">'
            f"{escape(self.ylabel)}</text>"
        )
        out.append(f'<clipPath id="plot"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath>')
        out.append('<g clip-path="url(#plot)">')
        for s in self.series:
            ok = np.isfinite(s.x) & np.isfinite(s.y)
            if s.kind == "marker":
                for x, y in zip(px(s.x[ok]), py(s.y[ok])):
                    out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="4" fill="{s.color}"/>')
                continue
            pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in zip(px(s.x[ok]), py(s.y[ok])))
            if s.kind == "fill":
                out.append(f'<polygon points="{pts}" fill="{s.color}" fill-opacity="{s.opacity}" stroke="none"/>')
            else:
                dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
                out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" stroke-width="{s.width}"{dash}/>')
        out.append("</g>")
        labelled = [s for s in self.series if s.label]
        for i, s in enumerate(labelled):
            y = top + 14 + 16 * i
            if s.kind == "line":
                dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
                glyph = f'<line x1="{left + pw - 150}" y1="{y}" x2="{left + pw - 125}" y2="{y}" stroke="{s.color}" stroke-width="2"{dash}/>'
            elif s.kind == "marker":
                glyph = f'<circle cx="{left + pw - 137.5}" cy="{y}" r="4" fill="{s.color}"/>'
            else:
                glyph = f'<rect x="{left + pw - 150}" y="{y - 5}" width="25" height="10" fill="{s.color}" fill-opacity="0.4"/>'
            out.append(glyph)
            out.append(f'<text x="{left + pw - 118}" y="{y}" dominant-baseline="middle">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def write(chart: Chart, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(chart.render())


def stack(charts: Sequence[Chart]) -> str:
    """Render several charts one above the other in a single SVG."""
    width = max(c.width for c in charts)
    height = sum(c.height for c in charts)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">']
    offset = 0
    for c in charts:
        body = c.render().replace('<clipPath id="plot">', f'<clipPath id="plot{offset}">').replace(
            'url(#plot)', f"url(#plot{offset})"
        )
        parts.append(f'<g transform="translate(0 {offset})">{body}</g>')
        offset += c.height
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
