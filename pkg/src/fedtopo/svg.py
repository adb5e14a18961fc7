"""Tiny hand-rolled SVG emitters: line charts, bar charts, and heatmaps.

Plain string building, no plotting dependency. Every emitter returns a
complete, well-formed, self-contained SVG document. Heatmap cells carry
data-row/data-col attributes so tests can inspect shading per cell.
"""

from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_FONT = 'font-family="Helvetica, Arial, sans-serif"'


def _num(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _header(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" {_FONT} '
        f'font-size="15">{escape(title)}</text>',
    ]


def line_chart(
    series: Mapping[str, Sequence[tuple[float, float]]],
    title: str,
    x_label: str,
    y_label: str,
    width: int = 640,
    height: int = 420,
) -> str:
    left, right, top, bottom = 64, 150, 40, 48
    plot_w, plot_h = width - left - right, height - top - bottom
    points = [p for pts in series.values() for p in pts]
    if not points:
        raise ValueError("line chart needs at least one point")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    out = _header(width, height, title)
    axis_y = top + plot_h
    out.append(
        f'<line x1="{left}" y1="{axis_y}" x2="{left + plot_w}" y2="{axis_y}" '
        'stroke="black"/>'
    )
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{axis_y}" stroke="black"/>')
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        out.append(f'<line x1="{px:.2f}" y1="{axis_y}" x2="{px:.2f}" y2="{axis_y + 5}" stroke="black"/>')
        out.append(
            f'<text x="{px:.2f}" y="{axis_y + 18}" text-anchor="middle" {_FONT} '
            f'font-size="11">{_num(tx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        out.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        out.append(
            f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end" {_FONT} '
            f'font-size="11">{_num(ty)}</text>'
        )
    out.append(
        f'<text x="{left + plot_w / 2}" y="{height - 10}" text-anchor="middle" '
        f'{_FONT} font-size="12">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="16" y="{top + plot_h / 2}" text-anchor="middle" {_FONT} '
        f'font-size="12" transform="rotate(-90 16 {top + plot_h / 2})">'
        f"{escape(y_label)}</text>"
    )
    for i, (name, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.8" '
            f"points={quoteattr(coords)}/>"
        )
        legend_y = top + 14 + 18 * i
        legend_x = left + plot_w + 14
        out.append(
            f'<rect x="{legend_x}" y="{legend_y - 9}" width="12" height="4" '
            f'fill="{color}"/>'
        )
        out.append(
            f'<text x="{legend_x + 18}" y="{legend_y}" {_FONT} font-size="12">'
            f"{escape(name)}</text>"
        )
    out.append("</svg>")
    return "\n".join(out)


def bar_chart(
    labels: Sequence[str],
    values: Sequence[float],
    title: str,
    y_label: str,
    width: int = 480,
    height: int = 360,
) -> str:
    if len(labels) != len(values) or not labels:
        raise ValueError("bar chart needs equally many labels and values")
    left, right, top, bottom = 64, 24, 40, 48
    plot_w, plot_h = width - left - right, height - top - bottom
    v_hi = max(max(values), 0.0) or 1.0
    v_hi *= 1.1
    out = _header(width, height, title)
    axis_y = top + plot_h
    out.append(
        f'<line x1="{left}" y1="{axis_y}" x2="{left + plot_w}" y2="{axis_y}" stroke="black"/>'
    )
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{axis_y}" stroke="black"/>')
    for ty in _ticks(0.0, v_hi):
        py = top + plot_h - ty / v_hi * plot_h
        out.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        out.append(
            f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end" {_FONT} '
            f'font-size="11">{_num(ty)}</text>'
        )
    slot = plot_w / len(labels)
    bar_w = slot * 0.6
    for i, (label, value) in enumerate(zip(labels, values)):
        x = left + slot * i + (slot - bar_w) / 2
        h = max(value, 0.0) / v_hi * plot_h
        y = top + plot_h - h
        color = PALETTE[i % len(PALETTE)]
        out.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" height="{h:.2f}" '
            f'fill="{color}"/>'
        )
        out.append(
            f'<text x="{x + bar_w / 2:.2f}" y="{y - 5:.2f}" text-anchor="middle" '
            f'{_FONT} font-size="11">{_num(value)}</text>'
        )
        out.append(
            f'<text x="{x + bar_w / 2:.2f}" y="{axis_y + 16}" text-anchor="middle" '
            f'{_FONT} font-size="12">{escape(label)}</text>'
        )
    out.append(
        f'<text x="16" y="{top + plot_h / 2}" text-anchor="middle" {_FONT} '
        f'font-size="12" transform="rotate(-90 16 {top + plot_h / 2})">'
        f"{escape(y_label)}</text>"
    )
    out.append("</svg>")
    return "\n".join(out)


def heatmap(matrix: Sequence[Sequence[int]], title: str, cell: int = 30) -> str:
    """Grayscale grid; darker means larger count. Row = true class."""
    n_rows = len(matrix)
    n_cols = len(matrix[0]) if n_rows else 0
    left, top = 56, 56
    width = left + n_cols * cell + 24
    height = top + n_rows * cell + 24
    peak = max((max(row) for row in matrix), default=0)
    out = _header(width, height, title)
    for r, row in enumerate(matrix):
        for c, value in enumerate(row):
            shade = 255 if peak == 0 else round(255 * (1.0 - value / peak))
            fill = f"#{shade:02x}{shade:02x}{shade:02x}"
            out.append(
                f'<rect x="{left + c * cell}" y="{top + r * cell}" width="{cell}" '
                f'height="{cell}" fill="{fill}" stroke="#cccccc" '
                f'data-row="{r}" data-col="{c}" data-count="{value}"/>'
            )
    for k in range(n_cols):
        out.append(
            f'<text x="{left + k * cell + cell / 2}" y="{top - 8}" '
            f'text-anchor="middle" {_FONT} font-size="11">{k}</text>'
        )
    for k in range(n_rows):
        out.append(
            f'<text x="{left - 8}" y="{top + k * cell + cell / 2 + 4}" '
            f'text-anchor="end" {_FONT} font-size="11">{k}</text>'
        )
    out.append(
        f'<text x="{left - 36}" y="{top + n_rows * cell / 2}" text-anchor="middle" '
        f'{_FONT} font-size="12" transform="rotate(-90 {left - 36} '
        f'{top + n_rows * cell / 2})">true class</text>'
    )
    out.append(
        f'<text x="{left + n_cols * cell / 2}" y="{top - 28}" text-anchor="middle" '
        f'{_FONT} font-size="12">predicted class</text>'
    )
    out.append("</svg>")
    return "\n".join(out)
