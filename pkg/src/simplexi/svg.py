"""Self-contained SVG chart writer for the benchmark reports.

Line and bar charts are emitted as plain XML with axes, ticks, and a
small legend; no plotting dependency is involved, so report generation
works anywhere the package imports.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

__all__ = ["line_chart", "bar_chart"]

_WIDTH, _HEIGHT = 640, 420
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 40, 55
_COLORS = ["#7b2d8b", "#2457a8", "#1f9e55", "#d2691e", "#b22222", "#555555"]


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + (abs(lo) if lo else 1.0)
    span = hi - lo
    raw = span / max(count - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 0.5 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
            f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
            f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
            f'<text x="{_WIDTH / 2}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{escape(title)}</text>',
            f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 12}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>',
            f'<text x="16" y="{_HEIGHT / 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {_HEIGHT / 2})">{escape(ylabel)}</text>',
        ]

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _scales(xs: list[float], ys: list[float]):
    x_ticks = _nice_ticks(min(xs), max(xs))
    y_ticks = _nice_ticks(min(ys + [0.0]), max(ys))
    x0, x1 = x_ticks[0], x_ticks[-1]
    y0, y1 = y_ticks[0], y_ticks[-1]
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x0) / (x1 - x0) * plot_w

    def sy(y: float) -> float:
        return _HEIGHT - _MARGIN_B - (y - y0) / (y1 - y0) * plot_h

    return sx, sy, x_ticks, y_ticks


def _axes(canvas: _Canvas, sx, sy, x_ticks, y_ticks) -> None:
    left, bottom = _MARGIN_L, _HEIGHT - _MARGIN_B
    right, top = _WIDTH - _MARGIN_R, _MARGIN_T
    canvas.add(
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>'
    )
    canvas.add(f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>')
    for t in x_ticks:
        x = sx(t)
        canvas.add(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 5}" stroke="black"/>')
        canvas.add(
            f'<text x="{x:.2f}" y="{bottom + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{t:g}</text>'
        )
    for t in y_ticks:
        y = sy(t)
        canvas.add(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        canvas.add(
            f'<line x1="{left}" y1="{y:.2f}" x2="{right}" y2="{y:.2f}" '
            f'stroke="#dddddd" stroke-dasharray="3,3"/>'
        )
        canvas.add(
            f'<text x="{left - 8}" y="{y + 3:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{t:g}</text>'
        )


def _legend(canvas: _Canvas, names: list[str]) -> None:
    x = _WIDTH - _MARGIN_R - 180
    y = _MARGIN_T + 8
    for i, name in enumerate(names):
        color = _COLORS[i % len(_COLORS)]
        canvas.add(
            f'<rect x="{x}" y="{y + 16 * i - 8}" width="12" height="8" fill="{color}"/>'
        )
        canvas.add(
            f'<text x="{x + 18}" y="{y + 16 * i}" font-family="sans-serif" '
            f'font-size="11">{escape(name)}</text>'
        )


def line_chart(
    title: str,
    xlabel: str,
    ylabel: str,
    series: dict[str, tuple[list[float], list[float]]],
) -> str:
    """Multi-series line chart; each series maps name -> (xs, ys)."""
    if not series:
        raise ValueError("line_chart needs at least one series")
    all_x = [x for xs, _ in series.values() for x in xs]
    all_y = [y for _, ys in series.values() for y in ys]
    canvas = _Canvas(title, xlabel, ylabel)
    sx, sy, x_ticks, y_ticks = _scales(all_x, all_y)
    _axes(canvas, sx, sy, x_ticks, y_ticks)
    for i, (name, (xs, ys)) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        canvas.add(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        for x, y in zip(xs, ys):
            canvas.add(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.6" fill="{color}"/>')
    _legend(canvas, list(series.keys()))
    return canvas.finish()


def bar_chart(
    title: str,
    xlabel: str,
    ylabel: str,
    labels: list[str],
    series: dict[str, list[float]],
) -> str:
    """Grouped bar chart: one group per label, one bar per series."""
    if not series or not labels:
        raise ValueError("bar_chart needs labels and at least one series")
    all_y = [y for ys in series.values() for y in ys]
    canvas = _Canvas(title, xlabel, ylabel)
    y_ticks = _nice_ticks(min(all_y + [0.0]), max(all_y))
    y0, y1 = y_ticks[0], y_ticks[-1]
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B
    bottom = _HEIGHT - _MARGIN_B

    def sy(y: float) -> float:
        return bottom - (y - y0) / (y1 - y0) * plot_h

    sx_dummy = lambda x: x  # bars position themselves
    _axes(canvas, sx_dummy, sy, [], y_ticks)
    ngroups, nseries = len(labels), len(series)
    group_w = plot_w / ngroups
    bar_w = group_w * 0.8 / nseries
    for g, label in enumerate(labels):
        gx = _MARGIN_L + g * group_w
        canvas.add(
            f'<text x="{gx + group_w / 2:.2f}" y="{bottom + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{escape(label)}</text>'
        )
        for i, (name, ys) in enumerate(series.items()):
            color = _COLORS[i % len(_COLORS)]
            x = gx + group_w * 0.1 + i * bar_w
            y = sy(ys[g])
            canvas.add(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                f'height="{bottom - y:.2f}" fill="{color}"/>'
            )
    _legend(canvas, list(series.keys()))
    return canvas.finish()
