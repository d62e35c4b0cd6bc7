"""Minimal polyline plots written directly as SVG text."""

from __future__ import annotations

import math
from typing import Sequence

WIDTH, HEIGHT, PAD = 480, 320, 48


def _fmt(v: float) -> str:
    return f"{v:.9f}".rstrip("0").rstrip(".")


def line_plot(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    log_y: bool = False,
    comment: str | None = None,
) -> str:
    """One polyline per ``(label, xs, ys)``; nonpositive values are dropped on a log axis."""
    pts = []
    for label, xs, ys in series:
        keep = [(float(x), float(y)) for x, y in zip(xs, ys)
                if math.isfinite(y) and (y > 0 or not log_y)]
        pts.append((label, [(x, math.log10(y) if log_y else y) for x, y in keep]))
    allx = [x for _, p in pts for x, _ in p] or [0.0, 1.0]
    ally = [y for _, p in pts for _, y in p] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    if comment:
        out.append(f"<!-- {comment} -->")
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">')
    out.append(f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
               'fill="none" stroke="#888"/>')
    out.append(f'<text x="{WIDTH / 2}" y="{PAD / 2}" text-anchor="middle">{title}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 8}" text-anchor="middle">{xlabel}</text>')
    ylab = f"log10 {ylabel}" if log_y else ylabel
    out.append(f'<text x="12" y="{HEIGHT / 2}" transform="rotate(-90 12 {HEIGHT / 2})" '
               f'text-anchor="middle">{ylab}</text>')
    out.append(f'<text x="{PAD}" y="{HEIGHT - PAD + 14}" font-size="10">{_fmt(x0)}</text>')
    out.append(f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 14}" font-size="10" '
               f'text-anchor="end">{_fmt(x1)}</text>')
    out.append(f'<text x="{PAD - 4}" y="{HEIGHT - PAD}" font-size="10" text-anchor="end">{_fmt(y0)}</text>')
    out.append(f'<text x="{PAD - 4}" y="{PAD + 10}" font-size="10" text-anchor="end">{_fmt(y1)}</text>')
    for i, (label, p) in enumerate(pts):
        colour = colours[i % len(colours)]
        path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in p)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{path}"/>')
        out.append(f'<text x="{WIDTH - PAD - 4}" y="{PAD + 14 + 14 * i}" font-size="11" '
                   f'text-anchor="end" fill="{colour}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
