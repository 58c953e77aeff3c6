"""Static SVG rendering of a run: fidelity, probability and ideal reference.

Hand-written SVG keeps the output byte-for-byte reproducible; coordinates
are written with two decimals and nothing time- or host-dependent is
embedded.
"""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .experiment import RunOutput, atomic_write

TITLES = {
    "none": "Ideal transitionless driving",
    "s3": "Driving with S3 perturbation",
    "l4": "Driving with lambda4 perturbation",
    "l5": "Driving with lambda5 perturbation",
    "l8": "Driving with lambda8 perturbation",
}


@dataclass(frozen=True)
class PlotStyle:
    width: int = 800
    height: int = 500
    margin_left: int = 70
    margin_right: int = 30
    margin_top: int = 45
    margin_bottom: int = 60
    max_points: int = 2000
    font: str = "sans-serif"


def _ticks(lo: float, hi: float, target: int = 8) -> np.ndarray:
    span = hi - lo
    if span <= 0:
        return np.array([lo])
    raw = span / target
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = np.ceil(lo / step - 1e-9) * step
    return np.arange(first, hi + 1e-9 * span, step)


def _polyline(xs, ys, color, dash=None, width=1.6) -> str:
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash_attr} '
            f'points="{pts}"/>')


def render_plot(run: RunOutput, style: PlotStyle | None = None, title: str | None = None) -> str:
    """SVG 1.1 document with the three curves of one run on t x [0, 1]."""
    style = style or PlotStyle()
    t = np.asarray(run.t, dtype=float)
    if t.size == 0:
        raise ValueError("cannot plot an empty run")
    stride = max(1, int(np.ceil(len(t) / style.max_points)))
    idx = np.arange(0, len(t), stride)
    if idx[-1] != len(t) - 1:
        idx = np.append(idx, len(t) - 1)

    W, H = style.width, style.height
    x0, x1 = style.margin_left, W - style.margin_right
    y0, y1 = H - style.margin_bottom, style.margin_top
    tmin, tmax = float(t[0]), float(t[-1])
    tspan = tmax - tmin or 1.0

    def X(v):
        return x0 + (np.asarray(v) - tmin) / tspan * (x1 - x0)

    def Y(v):
        return y0 - np.clip(np.asarray(v), 0.0, 1.0) * (y0 - y1)

    title = title or TITLES.get(run.config.perturbation, run.config.perturbation)
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<g font-family="{style.font}" font-size="13" fill="black">',
        f'<text x="{W / 2:.2f}" y="{style.margin_top - 18}" text-anchor="middle" '
        f'font-size="16">{escape(title)}</text>',
    ]
    for tv in _ticks(tmin, tmax):
        xv = float(X(tv))
        out.append(f'<line x1="{xv:.2f}" y1="{y0}" x2="{xv:.2f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{xv:.2f}" y="{y0 + 20}" text-anchor="middle">{tv:g}</text>')
    for yv in np.linspace(0.0, 1.0, 6):
        yy = float(Y(yv))
        out.append(f'<line x1="{x0}" y1="{yy:.2f}" x2="{x1}" y2="{yy:.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{x0 - 8}" y="{yy + 4:.2f}" text-anchor="end">{yv:.1f}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{H - 15}" text-anchor="middle">t</text>')
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
               'fill="none" stroke="black"/>')
    out.append("</g>")

    tx = X(t[idx])
    out.append(_polyline(tx, Y(run.prob_ideal_reference[idx]), "black", dash="8,5"))
    out.append(_polyline(tx, Y(run.prob_s2_plus[idx]), "#1f3fbf"))
    out.append(_polyline(tx, Y(run.fidelity[idx]), "#d62020", dash="2,4", width=2.0))

    legend = [("fidelity", "#d62020", "2,4"), ("P(S2=+1)", "#1f3fbf", None),
              ("P(S2=+1), ideal", "black", "8,5")]
    lx, ly = x1 - 190, y1 + 12
    out.append(f'<rect x="{lx - 10}" y="{ly - 8}" width="190" height="{len(legend) * 20 + 6}" '
               'fill="white" stroke="#999999"/>')
    for i, (label, color, dash) in enumerate(legend):
        yy = ly + 6 + 20 * i
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<line x1="{lx}" y1="{yy}" x2="{lx + 36}" y2="{yy}" stroke="{color}" '
                   f'stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{lx + 44}" y="{yy + 4}" font-family="{style.font}" '
                   f'font-size="12">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(run: RunOutput, path, style: PlotStyle | None = None):
    return atomic_write(path, render_plot(run, style))
