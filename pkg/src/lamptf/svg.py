"""Self-contained SVG rendering of a phase portrait."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .phase import Kind, PhasePortrait

__all__ = ["render_portrait", "nice_ticks"]

SIZE = 800
MARGIN = 60
SAMPLES_PER_TRAJECTORY = 400

_NULLCLINE_COLOR = {"M": "#1f77b4", "N": "#d62728"}


def nice_ticks(lo: float, hi: float, target: int = 8) -> np.ndarray:
    """Round tick positions (1, 2 or 5 times a power of ten) covering [lo, hi]."""
    span = hi - lo
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = np.arange(first, hi + 1e-9 * step, step)
    return np.where(np.abs(ticks) < 1e-12 * step, 0.0, ticks)


class _Frame:
    def __init__(self, window):
        self.x0, self.x1, self.y0, self.y1 = (float(v) for v in window)
        self.inner = SIZE - 2 * MARGIN

    def px(self, X):
        return MARGIN + (np.asarray(X) - self.x0) / (self.x1 - self.x0) * self.inner

    def py(self, Y):
        return SIZE - MARGIN - (np.asarray(Y) - self.y0) / (self.y1 - self.y0) * self.inner

    def inside(self, X, Y):
        X, Y = np.asarray(X), np.asarray(Y)
        return (X >= self.x0) & (X <= self.x1) & (Y >= self.y0) & (Y <= self.y1)


def _points(frame, X, Y) -> str:
    return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(frame.px(X), frame.py(Y)))


def _runs(mask):
    """Index ranges [start, stop) of consecutive True entries."""
    edges = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    return zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1))


def _trajectory_paths(frame, curve):
    t0, t1 = float(curve.t[0]), float(curve.t[-1])
    if t0 == t1:
        return []
    ts = np.linspace(t0, t1, SAMPLES_PER_TRAJECTORY)
    pts = curve(ts)
    X, Y = pts[:, 0], pts[:, 1]
    ok = frame.inside(X, Y) & np.isfinite(X) & np.isfinite(Y)
    return [_points(frame, X[a:b], Y[a:b]) for a, b in _runs(ok) if b - a >= 2]


def _axes(frame) -> list:
    out = [
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{frame.inner}" height="{frame.inner}" '
        'fill="none" stroke="#000" stroke-width="1"/>'
    ]
    bottom, left = SIZE - MARGIN, MARGIN
    for v in nice_ticks(frame.x0, frame.x1):
        x = float(frame.px(v))
        out.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 6}" stroke="#000"/>')
        out.append(f'<text x="{x:.2f}" y="{bottom + 20}" text-anchor="middle" font-size="12">{v:g}</text>')
    for v in nice_ticks(frame.y0, frame.y1):
        y = float(frame.py(v))
        out.append(f'<line x1="{left - 6}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="#000"/>')
        out.append(
            f'<text x="{left - 10}" y="{y + 4:.2f}" text-anchor="end" font-size="12">{v:g}</text>'
        )
    out.append(f'<text x="{SIZE / 2}" y="{SIZE - 15}" text-anchor="middle" font-size="14">X</text>')
    out.append(f'<text x="15" y="{SIZE / 2}" text-anchor="middle" font-size="14">Y</text>')
    return out


def _glyph(frame, fp) -> str:
    X, Y = float(fp.coords[0]), float(fp.coords[1])
    x, y = float(frame.px(X)), float(frame.py(Y))
    title = escape(f"({X:g}, {Y:g}) {fp.kind.value}")
    if fp.kind is Kind.SADDLE:
        r = 7
        d = f"M{x - r:.2f},{y - r:.2f} L{x + r:.2f},{y + r:.2f} M{x - r:.2f},{y + r:.2f} L{x + r:.2f},{y - r:.2f}"
        return f'<path class="fp saddle" d="{d}" stroke="#000" stroke-width="2.5"><title>{title}</title></path>'
    if fp.kind.is_node:
        fill = "#000" if fp.kind is Kind.STABLE_NODE else "#fff"
        return (
            f'<circle class="fp node" cx="{x:.2f}" cy="{y:.2f}" r="6" fill="{fill}" '
            f'stroke="#000" stroke-width="2"><title>{title}</title></circle>'
        )
    return (
        f'<rect class="fp other" x="{x - 5:.2f}" y="{y - 5:.2f}" width="10" height="10" '
        f'fill="#888" stroke="#000"><title>{title}</title></rect>'
    )


def render_portrait(pp: PhasePortrait, generator: str) -> str:
    """SVG document for ``pp``; ``generator`` goes into the header comment."""
    frame = _Frame(pp.window)
    clip = f'<clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{frame.inner}" height="{frame.inner}"/></clipPath>'
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- generator: {escape(generator)} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f"<defs>{clip}</defs>",
        f'<rect width="{SIZE}" height="{SIZE}" fill="#fff"/>',
        *_axes(frame),
        '<g clip-path="url(#plot)">',
    ]
    for name, seg in sorted(pp.nullclines.items()):
        if len(seg) < 2:
            continue
        color = _NULLCLINE_COLOR[name[0]]
        lines.append(
            f'<polyline class="nullcline" data-name="{escape(name)}" points="{_points(frame, seg[:, 0], seg[:, 1])}" '
            f'fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
    for i, curve in enumerate(pp.trajectories):
        for pts in _trajectory_paths(frame, curve):
            lines.append(
                f'<polyline class="trajectory" data-index="{i}" points="{pts}" '
                'fill="none" stroke="#555" stroke-width="1"/>'
            )
    lines.append("</g>")
    lines += [_glyph(frame, fp) for fp in pp.fixed_points]
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
