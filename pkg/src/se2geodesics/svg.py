"""Deterministic SVG rendering of planar geodesic projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import Geodesic


@dataclass(frozen=True)
class PlotSpec:
    width: int = 480
    height: int = 480
    margin: int = 24
    stroke_width: float = 1.5
    axes: bool = True
    cusp_markers: bool = True

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.stroke_width <= 0:
            raise ValueError("plot dimensions must be positive")
        if self.margin < 0 or 2 * self.margin >= min(self.width, self.height):
            raise ValueError("margin leaves no drawing area")


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def projection_is_degenerate(geo: Geodesic, tol: float = 1e-12) -> bool:
    """True when the (x, y) projection is a single point."""
    return bool(np.ptp(geo.x) <= tol and np.ptp(geo.y) <= tol)


def render_svg(geo: Geodesic, spec: PlotSpec | None = None, cusp_times=()) -> str:
    """SVG text of the (x, y) projection, equal aspect, y up.

    Cusps are drawn as small circles at the linearly interpolated positions.
    Output depends only on the inputs.
    """
    spec = PlotSpec() if spec is None else spec
    x, y, t = geo.x, geo.y, geo.t
    xmin, xmax = float(x.min()), float(x.max())
    ymin, ymax = float(y.min()), float(y.max())
    span = max(xmax - xmin, ymax - ymin)
    if span <= 1e-12:
        span = 1.0
    inner_w = spec.width - 2 * spec.margin
    inner_h = spec.height - 2 * spec.margin
    k = min(inner_w, inner_h) / span
    cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)

    def sx(v):
        return spec.width / 2 + k * (v - cx)

    def sy(v):
        return spec.height / 2 - k * (v - cy)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        f"<desc>p0=({geo.p0.h1!r}, {geo.p0.h2!r}, {geo.p0.h3!r}) T={float(t[-1])!r} "
        f"degenerate={str(projection_is_degenerate(geo)).lower()}</desc>",
        f'<rect width="{spec.width}" height="{spec.height}" fill="white"/>',
    ]
    if spec.axes:
        if ymin <= 0 <= ymax:
            out.append(
                f'<line x1="{spec.margin}" y1="{_fmt(sy(0))}" x2="{spec.width - spec.margin}" '
                f'y2="{_fmt(sy(0))}" stroke="#bbb" stroke-width="0.5"/>'
            )
        if xmin <= 0 <= xmax:
            out.append(
                f'<line x1="{_fmt(sx(0))}" y1="{spec.margin}" x2="{_fmt(sx(0))}" '
                f'y2="{spec.height - spec.margin}" stroke="#bbb" stroke-width="0.5"/>'
            )
    if projection_is_degenerate(geo):
        out.append(f'<circle cx="{_fmt(sx(x[0]))}" cy="{_fmt(sy(y[0]))}" r="3" fill="black"/>')
    else:
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, y))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="black" '
            f'stroke-width="{_fmt(spec.stroke_width)}"/>'
        )
    if spec.cusp_markers:
        for tc in cusp_times:
            px, py = np.interp(tc, t, x), np.interp(tc, t, y)
            out.append(
                f'<circle cx="{_fmt(sx(px))}" cy="{_fmt(sy(py))}" r="4" fill="none" stroke="red"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
