"""Dependency-free SVG line plots of sweep CSV files."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 55

# column, legend label, dash pattern (None = solid)
STYLES = {
    "field": [("s_field", "S_F", None)],
    "system": [("s_total", "S", None), ("s_atom", "S_A", "2,4")],
    "all": [("s_total", "S", None), ("s_atom", "S_A", "2,4"), ("s_field", "S_F", "8,4")],
}
COLORS = ["#1f3b73", "#b03a2e", "#2e7d32"]


class MalformedCSVError(ValueError):
    pass


def read_sweep_csv(path) -> tuple[dict[str, str], dict[str, list[float]]]:
    """Return the '#' metadata block and the numeric columns of a sweep CSV."""
    meta: dict[str, str] = {}
    data_lines = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep:
                    meta[key.strip()] = value.strip()
            elif line.strip():
                data_lines.append(line)
    if not data_lines:
        raise MalformedCSVError(f"{path}: no header line")
    reader = csv.DictReader(data_lines)
    if reader.fieldnames is None or "t_omega" not in reader.fieldnames:
        raise MalformedCSVError(f"{path}: missing t_omega column")
    columns: dict[str, list[float]] = {name: [] for name in reader.fieldnames}
    try:
        for row in reader:
            for name in reader.fieldnames:
                columns[name].append(float(row[name]))
    except (TypeError, ValueError) as exc:
        raise MalformedCSVError(f"{path}: bad numeric row ({exc})") from None
    if not columns["t_omega"]:
        raise MalformedCSVError(f"{path}: no data rows")
    return meta, columns


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * span:
        out.append(round(v, 12))
        v += step
    return out


def render_svg(columns: dict[str, list[float]], style: str, title: str = "") -> str:
    if style not in STYLES:
        raise ValueError(f"unknown plot style {style!r}")
    series = [(col, label, dash) for col, label, dash in STYLES[style] if col in columns]
    if not series:
        raise MalformedCSVError(f"no columns for style {style!r}")
    xs = columns["t_omega"]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    y_hi = max(0.5, max(max(columns[c]) for c, _, _ in series))
    y_hi = math.ceil(y_hi * 10) / 10
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return MARGIN_T + (1 - y / y_hi) * plot_h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">'
                   f'{escape(title)}</text>')
    out.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
               'fill="none" stroke="black"/>')
    for x in _ticks(x_lo, x_hi):
        px = sx(x)
        out.append(f'<line x1="{px:.2f}" y1="{MARGIN_T + plot_h}" x2="{px:.2f}" '
                   f'y2="{MARGIN_T + plot_h + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{MARGIN_T + plot_h + 19}" '
                   f'text-anchor="middle">{x:g}</text>')
    for y in _ticks(0.0, y_hi, 5):
        py = sy(y)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{py:.2f}" x2="{MARGIN_L}" y2="{py:.2f}" '
                   'stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{py + 4:.2f}" text-anchor="end">{y:g}</text>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2}" y="{HEIGHT - 12}" '
               'text-anchor="middle">Omega t</text>')
    ylabel = series[0][1] if len(series) == 1 else "linear entropy"
    out.append(f'<text x="18" y="{MARGIN_T + plot_h / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN_T + plot_h / 2})">{escape(ylabel)}</text>')

    for k, (col, label, dash) in enumerate(series):
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, columns[col]))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{COLORS[k]}" stroke-width="1.5"'
                   f'{dash_attr} points="{points}"/>')
    if len(series) > 1:
        lx, ly = MARGIN_L + plot_w - 110, MARGIN_T + 12
        for k, (col, label, dash) in enumerate(series):
            y = ly + 18 * k
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 30}" y2="{y}" stroke="{COLORS[k]}" '
                       f'stroke-width="1.5"{dash_attr}/>')
            out.append(f'<text x="{lx + 38}" y="{y + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(csv_path, style: str = "all", svg_path=None) -> Path:
    """Render ``csv_path`` to SVG next to it (or at ``svg_path``).

    Nothing is written if the CSV cannot be parsed or has no data rows.
    """
    csv_path = Path(csv_path)
    meta, columns = read_sweep_csv(csv_path)
    title_bits = [f"{k}={meta[k]}" for k in ("kappa", "alpha_sq", "convention") if k in meta]
    svg = render_svg(columns, style, ", ".join(title_bits))
    svg_path = Path(svg_path) if svg_path else csv_path.with_suffix(".svg")
    svg_path.write_text(svg)
    return svg_path
