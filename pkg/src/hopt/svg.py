"""Minimal deterministic SVG line and scatter plots."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = (70, 20, 40, 55)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        pad = abs(lo) * 0.05 or 1.0
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _plot(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    mode: str,
) -> str:
    if not series:
        raise ValueError("nothing to plot")
    xs = np.concatenate([np.asarray(s[0], dtype=float) for s in series.values()])
    ys = np.concatenate([np.asarray(s[1], dtype=float) for s in series.values()])
    ok = np.isfinite(xs) & np.isfinite(ys)
    if not ok.any():
        raise ValueError("no finite values to plot")
    (x0, x1), (y0, y1) = _range(xs[ok]), _range(ys[ok])
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{_f(px(t))}" y1="{top + ph}" x2="{_f(px(t))}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_f(px(t))}" y="{top + ph + 16}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{left - 4}" y1="{_f(py(t))}" x2="{left}" y2="{_f(py(t))}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{_f(py(t) + 4)}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2})">{escape(ylabel)}</text>'
    )
    for k, (name, (sx, sy)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        pts = [(px(x), py(y)) for x, y in zip(sx, sy) if np.isfinite(x) and np.isfinite(y)]
        if mode == "line" and pts:
            d = " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            out.extend(f'<circle cx="{_f(a)}" cy="{_f(b)}" r="3" fill="{color}"/>' for a, b in pts)
        ly = top + 14 + 14 * k
        out.append(f'<rect x="{left + pw - 150}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{left + pw - 135}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_plot(series, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """SVG text for one polyline per named ``(x, y)`` series."""
    return _plot(series, title, xlabel, ylabel, "line")


def scatter_plot(series, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    return _plot(series, title, xlabel, ylabel, "scatter")
