"""Minimal SVG rendering for log-log scatter plots and categorical heatmaps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from html import escape
from typing import Mapping, Sequence

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 150, 40, 60


@dataclass
class Series:
    label: str
    points: Sequence[tuple[float, float]]
    color: str = PALETTE[0]


@dataclass
class Curve:
    label: str
    points: Sequence[tuple[float, float]]
    color: str = PALETTE[0]
    dashed: bool = True


@dataclass
class _LogAxis:
    lo: float
    hi: float
    start: float
    length: float
    flip: bool = False

    def __call__(self, value: float) -> float:
        frac = (math.log10(value) - self.lo) / (self.hi - self.lo)
        if self.flip:
            frac = 1.0 - frac
        return self.start + frac * self.length


def _log_range(values: Sequence[float]) -> tuple[float, float]:
    logs = [math.log10(v) for v in values if v > 0 and math.isfinite(v)]
    if not logs:
        return 0.0, 1.0
    lo, hi = math.floor(min(logs)), math.ceil(max(logs))
    if hi <= lo:
        hi = lo + 1
    return lo, hi


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]


def scatter_loglog(series: Sequence[Series], curves: Sequence[Curve] = (), title: str = "",
                   xlabel: str = "", ylabel: str = "") -> str:
    """Scatter points plus polylines on log10 axes; non-positive values are dropped."""
    xs = [x for s in series for x, _ in s.points] + [x for c in curves for x, _ in c.points]
    ys = [y for s in series for _, y in s.points] + [y for c in curves for _, y in c.points]
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    fx = _LogAxis(*_log_range(xs), MARGIN_L, plot_w)
    fy = _LogAxis(*_log_range(ys), MARGIN_T, plot_h, flip=True)

    out = _header(title)
    out.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
               'fill="none" stroke="black"/>')
    for e in range(int(fx.lo), int(fx.hi) + 1):
        x = fx(10.0**e)
        out.append(f'<line x1="{x:.1f}" y1="{MARGIN_T + plot_h}" x2="{x:.1f}" '
                   f'y2="{MARGIN_T + plot_h + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{MARGIN_T + plot_h + 18}" text-anchor="middle">1e{e}</text>')
    for e in range(int(fy.lo), int(fy.hi) + 1):
        y = fy(10.0**e)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{y:.1f}" x2="{MARGIN_L}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.1f}" text-anchor="end">1e{e}</text>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{HEIGHT - 15}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN_T + plot_h / 2:.1f})">{escape(ylabel)}</text>')

    legend = []
    for s in series:
        pts = [(x, y) for x, y in s.points if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)]
        for x, y in pts:
            out.append(f'<circle class="point" cx="{fx(x):.2f}" cy="{fy(y):.2f}" r="2.5" '
                       f'fill="{s.color}" fill-opacity="0.6"/>')
        legend.append((s.label, s.color, False))
    for c in curves:
        pts = sorted((x, y) for x, y in c.points if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y))
        if not pts:
            continue
        coords = " ".join(f"{fx(x):.2f},{fy(y):.2f}" for x, y in pts)
        dash = ' stroke-dasharray="6,3"' if c.dashed else ""
        out.append(f'<polyline class="curve" points="{coords}" fill="none" stroke="{c.color}" '
                   f'stroke-width="1.5"{dash}/>')
        legend.append((c.label, c.color, True))

    lx = WIDTH - MARGIN_R + 12
    for i, (label, color, line) in enumerate(legend):
        ly = MARGIN_T + 12 + 18 * i
        if line:
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 14}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        else:
            out.append(f'<circle cx="{lx + 7}" cy="{ly}" r="4" fill="{color}"/>')
        out.append(f'<text x="{lx + 20}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


@dataclass
class HeatCell:
    color: str
    text: str = ""


def heatmap(xs: Sequence[float], ys: Sequence[float], cells: Mapping[tuple[float, float], HeatCell],
            title: str = "", xlabel: str = "", ylabel: str = "",
            legend: Sequence[tuple[str, str]] = (),
            overlay: Sequence[tuple[float, float]] = ()) -> str:
    """Grid of coloured rectangles, x along columns and y along rows (bottom to top).

    ``overlay`` is a polyline in data coordinates, interpolated linearly
    between cell centres.
    """
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    cw, ch = plot_w / len(xs), plot_h / len(ys)
    out = _header(title)
    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            cell = cells.get((x, y))
            if cell is None:
                continue
            px, py = MARGIN_L + ix * cw, MARGIN_T + plot_h - (iy + 1) * ch
            out.append(f'<rect class="cell" x="{px:.1f}" y="{py:.1f}" width="{cw:.1f}" height="{ch:.1f}" '
                       f'fill="{cell.color}" stroke="white"/>')
            if cell.text:
                out.append(f'<text x="{px + cw / 2:.1f}" y="{py + ch / 2 + 4:.1f}" text-anchor="middle" '
                           f'font-size="9">{escape(cell.text)}</text>')
    for ix, x in enumerate(xs):
        out.append(f'<text x="{MARGIN_L + (ix + 0.5) * cw:.1f}" y="{MARGIN_T + plot_h + 18}" '
                   f'text-anchor="middle">{x:g}</text>')
    for iy, y in enumerate(ys):
        out.append(f'<text x="{MARGIN_L - 8}" y="{MARGIN_T + plot_h - (iy + 0.5) * ch + 4:.1f}" '
                   f'text-anchor="end">{y:g}</text>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN_T + plot_h / 2:.1f})">{escape(ylabel)}</text>')

    if overlay and len(xs) > 1 and len(ys) > 1:
        def to_px(x, y):
            fx = (x - xs[0]) / (xs[-1] - xs[0]) * (len(xs) - 1) + 0.5
            fy = (y - ys[0]) / (ys[-1] - ys[0]) * (len(ys) - 1) + 0.5
            fy = min(max(fy, 0.0), len(ys))
            return MARGIN_L + fx * cw, MARGIN_T + plot_h - fy * ch

        coords = " ".join("{:.2f},{:.2f}".format(*to_px(x, y)) for x, y in overlay)
        out.append(f'<polyline class="overlay" points="{coords}" fill="none" stroke="#1f3fbf" stroke-width="2"/>')

    lx = WIDTH - MARGIN_R + 12
    for i, (label, color) in enumerate(legend):
        ly = MARGIN_T + 12 + 18 * i
        out.append(f'<rect x="{lx}" y="{ly - 6}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{lx + 18}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
