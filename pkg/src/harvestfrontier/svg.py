"""Static SVG plots: frontier scatter and population paths.

Output is a standalone document with inline styling only. Numbers are
formatted with fixed precision so identical specs give identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

from .errors import PlotError

KINDS = ("frontier_scatter", "population_path")
STYLES = ("points", "line", "segment", "ray", "marker")

MARGIN = 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")
MARKER_COLORS = {"observed": "#d61fd6", "projected": "#000000", "optimal": "#2ca02c"}


@dataclass(frozen=True)
class Series:
    name: str
    points: tuple[tuple[float, float], ...]
    style: str = "points"

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((float(x), float(y)) for x, y in self.points))
        if self.style not in STYLES:
            raise PlotError(f"series {self.name!r}: unknown style {self.style!r}")


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    series: tuple[Series, ...]
    x_label: str = ""
    y_label: str = ""
    width: int = 640
    height: int = 480
    title: str = ""

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))


def _n(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * span:
        ticks.append(round(first + k * step, 12))
        k += 1
    return ticks


def _tick_label(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:.4g}"


def _validate(spec: PlotSpec) -> None:
    if spec.kind not in KINDS:
        raise PlotError(f"unknown plot kind {spec.kind!r}")
    if not spec.series:
        raise PlotError("plot needs at least one series")
    if spec.width <= 2 * MARGIN or spec.height <= 2 * MARGIN:
        raise PlotError("plot dimensions too small")
    for s in spec.series:
        for i, (x, y) in enumerate(s.points):
            if not (math.isfinite(x) and math.isfinite(y)):
                raise PlotError(f"non-finite coordinate in series {s.name!r} at index {i}")


def emit_svg(spec: PlotSpec) -> str:
    _validate(spec)
    xs = [x for s in spec.series for x, _ in s.points]
    ys = [y for s in spec.series for _, y in s.points]
    x_lo, x_hi = min(0.0, *xs) if xs else 0.0, max(xs, default=1.0)
    y_lo, y_hi = min(0.0, *ys) if ys else 0.0, max(ys, default=1.0)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_hi += 0.05 * (x_hi - x_lo)
    y_hi += 0.05 * (y_hi - y_lo)
    w, h = spec.width, spec.height
    pw, ph = w - 2 * MARGIN, h - 2 * MARGIN

    def px(x):
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return h - MARGIN - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    if spec.title:
        out.append(f'<text x="{_n(w / 2)}" y="24" text-anchor="middle" font-size="14">{escape(spec.title)}</text>')

    # axes and ticks
    x0, y0 = px(x_lo), py(y_lo)
    out.append(f'<g class="axes" stroke="#333333" stroke-width="1">'
               f'<line x1="{_n(x0)}" y1="{_n(y0)}" x2="{_n(px(x_hi))}" y2="{_n(y0)}"/>'
               f'<line x1="{_n(x0)}" y1="{_n(y0)}" x2="{_n(x0)}" y2="{_n(py(y_hi))}"/></g>')
    out.append('<g class="ticks" fill="#333333">')
    for t in _nice_ticks(x_lo, x_hi):
        out.append(f'<line x1="{_n(px(t))}" y1="{_n(y0)}" x2="{_n(px(t))}" y2="{_n(y0 + 5)}" stroke="#333333"/>'
                   f'<text x="{_n(px(t))}" y="{_n(y0 + 18)}" text-anchor="middle">{_tick_label(t)}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        out.append(f'<line x1="{_n(x0 - 5)}" y1="{_n(py(t))}" x2="{_n(x0)}" y2="{_n(py(t))}" stroke="#333333"/>'
                   f'<text x="{_n(x0 - 8)}" y="{_n(py(t) + 4)}" text-anchor="end">{_tick_label(t)}</text>')
    out.append('</g>')
    if spec.x_label:
        out.append(f'<text class="x-label" x="{_n(MARGIN + pw / 2)}" y="{_n(h - 15)}" '
                   f'text-anchor="middle">{escape(spec.x_label)}</text>')
    if spec.y_label:
        out.append(f'<text class="y-label" x="15" y="{_n(MARGIN + ph / 2)}" text-anchor="middle" '
                   f'transform="rotate(-90 15 {_n(MARGIN + ph / 2)})">{escape(spec.y_label)}</text>')

    legend = []
    for i, s in enumerate(spec.series):
        color = MARKER_COLORS.get(s.name, PALETTE[i % len(PALETTE)])
        name = quoteattr(s.name)
        if s.style == "points":
            out.append(f'<g class="series" data-series={name} fill="{color}">')
            out.extend(f'<circle class="data" cx="{_n(px(x))}" cy="{_n(py(y))}" r="3"/>' for x, y in s.points)
            out.append('</g>')
        elif s.style == "line":
            coords = " ".join(f"{_n(px(x))},{_n(py(y))}" for x, y in s.points)
            out.append(f'<polyline class="series-line" data-series={name} points="{coords}" '
                       f'fill="none" stroke="{color}" stroke-width="2"/>')
        elif s.style in ("segment", "ray"):
            if len(s.points) != 2:
                raise PlotError(f"series {s.name!r}: a {s.style} needs exactly two points")
            (xa, ya), (xb, yb) = s.points
            css = "ray" if s.style == "ray" else "isorevenue"
            dash = ' stroke-dasharray="6 4"' if s.style == "ray" else ""
            out.append(f'<line class="{css}" data-series={name} x1="{_n(px(xa))}" y1="{_n(py(ya))}" '
                       f'x2="{_n(px(xb))}" y2="{_n(py(yb))}" stroke="{color}" stroke-width="1.5"{dash}/>')
        else:
            for x, y in s.points:
                out.append(f'<circle class="marker" data-series={name} cx="{_n(px(x))}" cy="{_n(py(y))}" '
                           f'r="6" fill="{color}" stroke="#000000"/>')
        legend.append((s.name, color))

    ly = MARGIN
    out.append('<g class="legend">')
    for name, color in legend:
        lx = w - MARGIN - 110
        out.append(f'<rect x="{_n(lx)}" y="{_n(ly - 9)}" width="10" height="10" fill="{color}"/>'
                   f'<text x="{_n(lx + 16)}" y="{_n(ly)}">{escape(name)}</text>')
        ly += 16
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def _clip_isorevenue(level, p_a, p_g, a_box, g_box):
    """Chord of the line p_a*a + p_g*g = level inside [0, a_box] x [0, g_box]."""
    g_at_0 = level / p_g
    a_at_0 = level / p_a
    start = (0.0, g_at_0) if g_at_0 <= g_box else ((level - p_g * g_box) / p_a, g_box)
    end = (a_at_0, 0.0) if a_at_0 <= a_box else (a_box, (level - p_a * a_box) / p_g)
    return start, end


def frontier_scatter_spec(points: Sequence[tuple[float, float]], frontier, prices,
                          highlight=None, title: str = "") -> PlotSpec:
    """Data cloud, frontier chain, isorevenue line through the optimum and one highlighted ray.

    ``highlight`` is an efficiency decomposition for the day whose ray is drawn.
    """
    from .efficiency import optimal_point, revenue

    series = [Series("days", tuple(points), "points"),
              Series("frontier", frontier.vertices, "line")]
    optimum = highlight.optimal if highlight is not None else optimal_point(frontier, prices)
    level = revenue(optimum, prices)
    a_box, g_box = 1.1 * max(frontier.a_max, 1e-12), 1.1 * max(frontier.g_max, 1e-12)
    if level > 0:
        series.append(Series("isorevenue", _clip_isorevenue(level, prices.p_arboreal, prices.p_ground,
                                                       a_box, g_box), "segment"))
    if highlight is not None:
        series.append(Series("ray", ((0.0, 0.0), highlight.projected), "ray"))
        series.append(Series("observed", (highlight.observed.xy,), "marker"))
        series.append(Series("projected", (highlight.projected,), "marker"))
    series.append(Series("optimal", (optimum,), "marker"))
    return PlotSpec("frontier_scatter", tuple(series), x_label="arboreal takeoff (kg/day)",
                    y_label="ground takeoff (kg/day)", title=title)


def population_path_spec(path, title: str = "") -> PlotSpec:
    return PlotSpec(
        "population_path",
        (Series("arboreal", tuple(zip(path.times, path.arboreal_index)), "line"),
         Series("ground", tuple(zip(path.times, path.ground_index)), "line")),
        x_label="t (years)", y_label="population index N(t)/N(0)", title=title,
    )
