"""
fkrylov - SVG Line Plots

Renders the CSV files written by the commands as self-contained SVG line
plots with a logarithmic y axis:

- method,k,rel_error       one curve per method
- k,estimate,update_norm   update norm per step
- iter,sigma,f_value       objective per descent iteration
"""

import csv
import logging
import math
from pathlib import Path
from typing import Dict, List, NamedTuple, Tuple, Union
from xml.sax.saxutils import escape

from ..utils.error_handling import ErrorCategory, error_context, parse_error

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

WIDTH = 720
HEIGHT = 440
MARGIN_LEFT = 80
MARGIN_RIGHT = 160
MARGIN_TOP = 30
MARGIN_BOTTOM = 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

# header -> (x column, y column, grouping column or None)
SCHEMAS = {
    ("method", "k", "rel_error"): ("k", "rel_error", "method"),
    ("k", "estimate", "update_norm"): ("k", "update_norm", None),
    ("iter", "sigma", "f_value"): ("iter", "f_value", None),
}


class PlotData(NamedTuple):
    """Series keyed by label, each a list of (x, y) points in file order."""
    x_label: str
    y_label: str
    series: Dict[str, List[Tuple[float, float]]]


def read_plot_data(csv_path: PathLike) -> PlotData:
    """
    Parse one of the command CSV schemas.

    Raises:
        ParseError: unknown header, malformed row or no data rows
    """
    path = Path(csv_path)
    with error_context("read_plot_data", category=ErrorCategory.FILESYSTEM, file_path=path):
        with open(path, newline='', encoding='utf-8') as handle:
            rows = list(csv.reader(handle))

    if not rows:
        raise parse_error("empty CSV file", path=path, line_number=1)
    header = tuple(col.strip() for col in rows[0])
    if header not in SCHEMAS:
        raise parse_error(f"unrecognized CSV header '{','.join(header)}'", path=path, line_number=1)
    x_col, y_col, group_col = SCHEMAS[header]
    x_idx, y_idx = header.index(x_col), header.index(y_col)
    g_idx = header.index(group_col) if group_col else None

    series: Dict[str, List[Tuple[float, float]]] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise parse_error(f"expected {len(header)} fields, found {len(row)}",
                              path=path, line_number=line_no)
        try:
            x, y = float(row[x_idx]), float(row[y_idx])
        except ValueError:
            raise parse_error(f"non-numeric value in row '{','.join(row)}'",
                              path=path, line_number=line_no)
        label = row[g_idx] if g_idx is not None else y_col
        series.setdefault(label, []).append((x, y))

    if not series:
        raise parse_error("CSV file has no data rows", path=path, line_number=len(rows))
    return PlotData(x_col, y_col, series)


def _log_range(values: List[float]) -> Tuple[float, float]:
    positive = [v for v in values if v > 0 and math.isfinite(v)]
    if not positive:
        return -1.0, 0.0
    lo = math.floor(math.log10(min(positive)))
    hi = math.ceil(math.log10(max(positive)))
    if lo == hi:
        lo, hi = lo - 1, hi + 1
    return float(lo), float(hi)


def render_svg(data: PlotData) -> str:
    """SVG document for the plot data."""
    xs = [x for points in data.series.values() for x, _ in points]
    ys = [y for points in data.series.values() for _, y in points]
    x_lo, x_hi = min(xs), max(xs)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    y_lo, y_hi = _log_range(ys)

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y_hi - math.log10(y)) / (y_hi - y_lo) * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black"/>',
    ]

    # Decade ticks
    for decade in range(int(y_lo), int(y_hi) + 1):
        y = py(10.0 ** decade)
        out.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{y:.2f}" x2="{MARGIN_LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<line x1="{MARGIN_LEFT}" y1="{y:.2f}" x2="{MARGIN_LEFT + plot_w}" y2="{y:.2f}" '
                   f'stroke="#dddddd" stroke-width="0.5"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" font-size="11" '
                   f'text-anchor="end">1e{decade}</text>')
    for i in range(6):
        x_val = x_lo + (x_hi - x_lo) * i / 5
        x = px(x_val)
        bottom = MARGIN_TOP + plot_h
        out.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{bottom + 18}" font-size="11" '
                   f'text-anchor="middle">{x_val:g}</text>')

    out.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 10}" font-size="13" '
               f'text-anchor="middle">{escape(data.x_label)}</text>')
    out.append(f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.2f}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.2f})">{escape(data.y_label)}</text>')

    for index, (label, points) in enumerate(data.series.items()):
        color = PALETTE[index % len(PALETTE)]
        # Nonpositive and NaN values have no place on a log axis
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in points
                          if y > 0 and math.isfinite(y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')

        legend_y = MARGIN_TOP + 15 + 18 * index
        legend_x = MARGIN_LEFT + plot_w + 15
        out.append(f'<line x1="{legend_x}" y1="{legend_y}" x2="{legend_x + 20}" y2="{legend_y}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{legend_x + 26}" y="{legend_y + 4}" font-size="12">{escape(label)}</text>')

    out.append('</svg>')
    return "\n".join(out) + "\n"


def emit_plot(csv_path: PathLike, out_svg: PathLike) -> Path:
    """Render a command CSV as an SVG file; nothing is written when parsing fails."""
    data = read_plot_data(csv_path)
    document = render_svg(data)
    out = Path(out_svg)
    with error_context("emit_plot", category=ErrorCategory.FILESYSTEM, file_path=out):
        out.write_text(document, encoding='utf-8')
    logger.debug(f"Wrote plot with {len(data.series)} series to {out}")
    return out
