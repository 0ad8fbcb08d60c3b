"""Minimal SVG line plots for scaling tables (log-log by default)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_plot_svg(
    series: dict[str, tuple[list[float], list[float]]],
    title: str = "",
    xlabel: str = "x",
    ylabel: str = "y",
    log: bool = True,
    width: int = 560,
    height: int = 400,
) -> str:
    """Render named (x, y) series as polylines with markers; non-positive points are dropped on log axes."""
    tf = (lambda z: math.log10(z)) if log else (lambda z: z)
    pts = {}
    for name, (xs, ys) in series.items():
        keep = [(tf(x), tf(y)) for x, y in zip(xs, ys)
                if (x > 0 and y > 0 or not log) and math.isfinite(x) and math.isfinite(y)]
        if keep:
            pts[name] = keep
    ml, mr, mt, mb = 70, 20, 30, 50
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" '
           f'font-size="11">', f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')
    if not pts:
        out.append(f'<text x="{width / 2}" y="{height / 2}" text-anchor="middle">no data</text></svg>')
        return "\n".join(out)
    allx = [p[0] for v in pts.values() for p in v]
    ally = [p[1] for v in pts.values() for p in v]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pw, ph = width - ml - mr, height - mt - mb
    X = lambda x: ml + (x - x0) / (x1 - x0) * pw
    Y = lambda y: mt + ph - (y - y0) / (y1 - y0) * ph
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    fmt = (lambda z: f"1e{z:.2g}") if log else (lambda z: f"{z:.3g}")
    for t in _ticks(x0, x1):
        out.append(f'<text x="{X(t):.1f}" y="{mt + ph + 16}" text-anchor="middle">{fmt(t)}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{ml - 6}" y="{Y(t) + 4:.1f}" text-anchor="end">{fmt(t)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {mt + ph / 2})">{escape(ylabel)}</text>')
    for i, (name, p) in enumerate(pts.items()):
        c = _COLORS[i % len(_COLORS)]
        path = " ".join(f"{X(x):.1f},{Y(y):.1f}" for x, y in p)
        out.append(f'<polyline points="{path}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        out.extend(f'<circle cx="{X(x):.1f}" cy="{Y(y):.1f}" r="2.5" fill="{c}"/>' for x, y in p)
        out.append(f'<text x="{ml + 8}" y="{mt + 14 + 14 * i}" fill="{c}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out)
