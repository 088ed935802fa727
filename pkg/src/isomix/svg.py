"""Minimal static SVG line charts for risk sweeps."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 190, 50, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_chart(series: dict[str, tuple[list[float], list[float]]], title: str,
               xlabel: str, ylabel: str) -> str:
    """One polyline per entry of ``series`` (label -> (xs, ys)), with axes and a legend."""
    xs = [x for xv, _ in series.values() for x in xv]
    ys = [y for _, yv in series.values() for y in yv]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    pad = 0.05 * (y1 - y0) if y1 > y0 else max(abs(y0) * 0.05, 1e-3)
    y0, y1 = y0 - pad, y1 + pad
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN_T + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="28" text-anchor="middle" font-size="18" font-family="sans-serif">{escape(title)}</text>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ph}" x2="{MARGIN_L + pw}" y2="{MARGIN_T + ph}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + ph}" stroke="black"/>',
    ]
    for t in nice_ticks(x0, x1):
        if x0 - 1e-12 <= t <= x1 + 1e-12:
            X = px(t)
            out.append(f'<line x1="{X:.2f}" y1="{MARGIN_T + ph}" x2="{X:.2f}" y2="{MARGIN_T + ph + 6}" stroke="black"/>')
            out.append(f'<text x="{X:.2f}" y="{MARGIN_T + ph + 22}" text-anchor="middle" font-size="12" '
                       f'font-family="sans-serif">{_fmt(t)}</text>')
    for t in nice_ticks(y0, y1):
        if y0 - 1e-12 <= t <= y1 + 1e-12:
            Y = py(t)
            out.append(f'<line x1="{MARGIN_L - 6}" y1="{Y:.2f}" x2="{MARGIN_L}" y2="{Y:.2f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN_L - 10}" y="{Y + 4:.2f}" text-anchor="end" font-size="12" '
                       f'font-family="sans-serif">{_fmt(t)}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" font-size="14" '
               f'font-family="sans-serif">{escape(xlabel)}</text>')
    out.append(f'<text x="20" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" font-size="14" font-family="sans-serif" '
               f'transform="rotate(-90 20 {MARGIN_T + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (label, (xv, yv)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xv, yv))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = MARGIN_T + 10 + 22 * i
        lx = WIDTH - MARGIN_R + 20
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 28}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 36}" y="{ly + 4}" font-size="13" font-family="sans-serif">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
