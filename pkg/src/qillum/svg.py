"""Minimal deterministic SVG emission: line plots and histograms.

Single-file output, no external assets, stable formatting; identical inputs
produce byte-identical markup so emitted artifacts can be diffed.
"""

from __future__ import annotations

import math

import numpy as np

WIDTH = 640
HEIGHT = 420
LEFT, RIGHT, TOP, BOTTOM = 76, 18, 30, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return format(v, ".6g")


def _nice_step(span: float) -> float:
    if span <= 0.0:
        return 1.0
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float) -> list[float]:
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def _finite_range(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        return 0.0, 1.0
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        pad = abs(hi) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Canvas:
    def __init__(self, x_range, y_range, title, x_label, y_label):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        ]
        self._frame(title, x_label, y_label)

    def px(self, x: float) -> float:
        span = self.x1 - self.x0
        return LEFT + (x - self.x0) / span * (WIDTH - LEFT - RIGHT)

    def py(self, y: float) -> float:
        span = self.y1 - self.y0
        return HEIGHT - BOTTOM - (y - self.y0) / span * (HEIGHT - TOP - BOTTOM)

    def _frame(self, title, x_label, y_label):
        p = self.parts
        p.append(f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" '
                 f'height="{HEIGHT - TOP - BOTTOM}" fill="none" '
                 f'stroke="#333" stroke-width="1"/>')
        if title:
            p.append(f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{title}</text>')
        if x_label:
            p.append(f'<text x="{(LEFT + WIDTH - RIGHT) // 2}" y="{HEIGHT - 10}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="12">{x_label}</text>')
        if y_label:
            p.append(f'<text x="16" y="{(TOP + HEIGHT - BOTTOM) // 2}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="12" transform="rotate(-90 16 '
                     f'{(TOP + HEIGHT - BOTTOM) // 2})">{y_label}</text>')
        for t in _ticks(self.x0, self.x1):
            x = self.px(t)
            p.append(f'<line x1="{x:.2f}" y1="{HEIGHT - BOTTOM}" x2="{x:.2f}" '
                     f'y2="{HEIGHT - BOTTOM + 5}" stroke="#333"/>')
            p.append(f'<text x="{x:.2f}" y="{HEIGHT - BOTTOM + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{_fmt(t)}</text>')
        for t in _ticks(self.y0, self.y1):
            y = self.py(t)
            p.append(f'<line x1="{LEFT - 5}" y1="{y:.2f}" x2="{LEFT}" '
                     f'y2="{y:.2f}" stroke="#333"/>')
            p.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')

    def finish(self) -> str:
        self.parts.append("</svg>")
        return "\n".join(self.parts)


def line_plot(series, *, title: str = "", x_label: str = "",
              y_label: str = "") -> str:
    """Render (label, xs, ys) series as polylines with a small legend.

    Non-finite points split the polyline rather than being drawn.
    """
    all_x = np.concatenate([np.asarray(xs, dtype=float) for _, xs, _ in series])
    all_y = np.concatenate([np.asarray(ys, dtype=float) for _, _, ys in series])
    cv = _Canvas(_finite_range(all_x), _finite_range(all_y),
                 title, x_label, y_label)
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        run = []
        segments = []
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y):
                run.append(f"{cv.px(x):.2f},{cv.py(y):.2f}")
            elif run:
                segments.append(run)
                run = []
        if run:
            segments.append(run)
        for seg in segments:
            if len(seg) == 1:
                x, y = seg[0].split(",")
                cv.parts.append(f'<circle cx="{x}" cy="{y}" r="2.5" '
                                f'fill="{color}"/>')
            else:
                cv.parts.append(f'<polyline points="{" ".join(seg)}" '
                                f'fill="none" stroke="{color}" '
                                f'stroke-width="1.5"/>')
        ly = TOP + 16 + 16 * k
        cv.parts.append(f'<line x1="{WIDTH - RIGHT - 150}" y1="{ly - 4}" '
                        f'x2="{WIDTH - RIGHT - 126}" y2="{ly - 4}" '
                        f'stroke="{color}" stroke-width="2"/>')
        cv.parts.append(f'<text x="{WIDTH - RIGHT - 120}" y="{ly}" '
                        f'font-family="sans-serif" font-size="11">'
                        f'{label}</text>')
    return cv.finish()


def histogram(edges, counts, *, reference: float | None = None,
              title: str = "", x_label: str = "",
              y_label: str = "count") -> str:
    """Render a bar histogram with an optional vertical reference line."""
    edges = np.asarray(edges, dtype=float)
    counts = np.asarray(counts, dtype=float)
    xs = [edges[0], edges[-1]]
    if reference is not None:
        xs.append(reference)
    cv = _Canvas(_finite_range(xs), (0.0, max(float(counts.max()), 1.0) * 1.05),
                 title, x_label, y_label)
    for i, c in enumerate(counts):
        if c <= 0:
            continue
        x_l, x_r = cv.px(edges[i]), cv.px(edges[i + 1])
        y_t = cv.py(float(c))
        cv.parts.append(f'<rect x="{x_l:.2f}" y="{y_t:.2f}" '
                        f'width="{max(x_r - x_l, 0.5):.2f}" '
                        f'height="{HEIGHT - BOTTOM - y_t:.2f}" '
                        f'fill="{PALETTE[0]}" fill-opacity="0.75"/>')
    if reference is not None:
        x = cv.px(reference)
        cv.parts.append(f'<line x1="{x:.2f}" y1="{TOP}" x2="{x:.2f}" '
                        f'y2="{HEIGHT - BOTTOM}" stroke="{PALETTE[1]}" '
                        f'stroke-width="1.5" stroke-dasharray="5,3"/>')
    return cv.finish()
