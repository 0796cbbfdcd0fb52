"""Minimal self-contained SVG line charts.

Output depends only on the input numbers: coordinates are printed with a
fixed number of decimals and nothing time- or platform-dependent is written.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .table import SweepTable

WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 72, 24, 24, 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


class PlotError(ValueError):
    pass


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    return [float(k) for k in range(math.ceil(lo - 1e-12), math.floor(hi + 1e-12) + 1)]


def _label(v: float, log: bool) -> str:
    if log:
        return f"1e{int(v)}"
    return f"{v:.4g}"


def render_svg(table: SweepTable, x: str, ys: Sequence[str], log_x: bool = False, log_y: bool = False,
               title: str = "") -> str:
    if not table.rows:
        raise PlotError("table is empty")
    if not ys:
        raise PlotError("no y columns requested")
    for name in (x, *ys):
        if name not in table.columns:
            raise PlotError(f"unknown column {name!r}; have {', '.join(table.columns)}")
    xs = table.column(x)
    series = {name: table.column(name) for name in ys}

    def tx(v):
        if log_x:
            return math.log10(v) if v > 0 else None
        return v

    def ty(v):
        if log_y:
            return math.log10(v) if v > 0 else None
        return v

    curves = {}
    for name, vals in series.items():
        pts = [(tx(a), ty(b)) for a, b in zip(xs, vals)]
        curves[name] = [(a, b) for a, b in pts if a is not None and b is not None and math.isfinite(b)]
    all_pts = [p for c in curves.values() for p in c]
    if not all_pts:
        raise PlotError("no plottable points (log axis with nonpositive data?)")
    x_lo, x_hi = min(p[0] for p in all_pts), max(p[0] for p in all_pts)
    y_lo, y_hi = min(p[1] for p in all_pts), max(p[1] for p in all_pts)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(v):
        return MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return MARGIN_TOP + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
    ]
    x_ticks = _log_ticks(x_lo, x_hi) if log_x else _nice_ticks(x_lo, x_hi)
    y_ticks = _log_ticks(y_lo, y_hi) if log_y else _nice_ticks(y_lo, y_hi)
    base = MARGIN_TOP + plot_h
    for v in x_ticks:
        p = px(v)
        out.append(f'<line x1="{p:.2f}" y1="{base}" x2="{p:.2f}" y2="{base + 5}" stroke="#444"/>')
        out.append(f'<text x="{p:.2f}" y="{base + 18}" text-anchor="middle">{_label(v, log_x)}</text>')
    for v in y_ticks:
        p = py(v)
        out.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{p:.2f}" x2="{MARGIN_LEFT}" y2="{p:.2f}" stroke="#444"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{p + 4:.2f}" text-anchor="end">{_label(v, log_y)}</text>')
    out.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 14}" text-anchor="middle">'
               f'{escape(x)}{" (log)" if log_x else ""}</text>')
    if title:
        out.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{MARGIN_TOP - 8}" '
                   f'text-anchor="middle">{escape(title)}</text>')
    for k, (name, pts) in enumerate(curves.items()):
        color = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{coords}"/>')
        ly = MARGIN_TOP + 14 + 14 * k
        lx = MARGIN_LEFT + plot_w - 140
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly}">{escape(name)}{" (log)" if log_y else ""}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(table: SweepTable, x: str, ys: Sequence[str], path: str | Path, log_x: bool = False,
             log_y: bool = False, title: str = "") -> None:
    text = render_svg(table, x, ys, log_x=log_x, log_y=log_y, title=title)
    Path(path).write_text(text, encoding="utf-8")
