"""Deterministic, self-contained SVG output for charts and quality curves."""

from __future__ import annotations

from typing import Dict, Optional

import numpy as np

WIDTH, HEIGHT = 480, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 110, 20, 50
CURVE_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _n(x: float) -> str:
    return f"{x:.3f}"


def _range(v: np.ndarray):
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi - lo <= 0.0:
        pad = max(abs(lo), 1.0) * 0.5
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Frame:
    def __init__(self, xr, yr):
        self.xr, self.yr = xr, yr
        self.w = WIDTH - MARGIN_L - MARGIN_R
        self.h = HEIGHT - MARGIN_T - MARGIN_B

    def x(self, v):
        return MARGIN_L + (v - self.xr[0]) / (self.xr[1] - self.xr[0]) * self.w

    def y(self, v):
        return MARGIN_T + (self.yr[1] - v) / (self.yr[1] - self.yr[0]) * self.h

    def axes(self, xlabel: str, ylabel: str) -> list:
        x0, y0 = MARGIN_L, MARGIN_T + self.h
        out = [
            f'<line x1="{x0}" y1="{y0}" x2="{x0 + self.w}" y2="{y0}" stroke="black"/>',
            f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>',
        ]
        for t in np.linspace(0.0, 1.0, 5):
            xv = self.xr[0] + t * (self.xr[1] - self.xr[0])
            yv = self.yr[0] + t * (self.yr[1] - self.yr[0])
            px, py = self.x(xv), self.y(yv)
            out.append(f'<line x1="{_n(px)}" y1="{y0}" x2="{_n(px)}" y2="{y0 + 4}" stroke="black"/>')
            out.append(f'<text x="{_n(px)}" y="{y0 + 16}" font-size="10" '
                       f'text-anchor="middle">{xv:.3g}</text>')
            out.append(f'<line x1="{x0 - 4}" y1="{_n(py)}" x2="{x0}" y2="{_n(py)}" stroke="black"/>')
            out.append(f'<text x="{x0 - 6}" y="{_n(py + 3)}" font-size="10" '
                       f'text-anchor="end">{yv:.3g}</text>')
        out.append(f'<text x="{_n(x0 + self.w / 2)}" y="{HEIGHT - 10}" font-size="12" '
                   f'text-anchor="middle">{xlabel}</text>')
        out.append(f'<text x="14" y="{_n(MARGIN_T + self.h / 2)}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 14 {_n(MARGIN_T + self.h / 2)})">{ylabel}</text>')
        return out


def _document(body: list) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>', *body,
                      "</svg>"]) + "\n"


def position_colors(P: np.ndarray) -> list:
    """Smooth color map: first position coordinate drives red, second drives blue."""
    P = np.asarray(P, dtype=np.float64)[:, :2]
    lo, hi = P.min(axis=0), P.max(axis=0)
    t = (P - lo) / np.where(hi > lo, hi - lo, 1.0)
    r = np.round(40 + 215 * t[:, 0]).astype(int)
    b = np.round(40 + 215 * t[:, 1]).astype(int)
    g = np.round(40 + 120 * (1.0 - np.abs(t[:, 0] - t[:, 1]))).astype(int)
    return [f"#{ri:02x}{gi:02x}{bi:02x}" for ri, gi, bi in zip(r, g, b)]


def scatter_svg(Z: np.ndarray, positions: Optional[np.ndarray] = None) -> str:
    """One circle per chart point, colored by ground-truth position when given."""
    Z = np.asarray(Z, dtype=np.float64)
    frame = _Frame(_range(Z[:, 0]), _range(Z[:, 1]))
    body = frame.axes("chart coordinate 1", "chart coordinate 2")
    colors = position_colors(positions) if positions is not None else ["#1f77b4"] * len(Z)
    for (a, b), c in zip(Z, colors):
        body.append(f'<circle cx="{_n(frame.x(a))}" cy="{_n(frame.y(b))}" r="2.5" fill="{c}"/>')
    lx = WIDTH - MARGIN_R + 12
    label = "color: user position" if positions is not None else "chart points"
    body.append(f'<rect x="{lx}" y="{MARGIN_T + 4}" width="10" height="10" '
                f'fill="{colors[0] if positions is None else "#8866cc"}"/>')
    body.append(f'<text x="{lx + 14}" y="{MARGIN_T + 13}" font-size="10">{label}</text>')
    return _document(body)


def curves_svg(ks: np.ndarray, curves: Dict[str, np.ndarray]) -> str:
    """One polyline per named score curve over K, with a legend."""
    ks = np.asarray(ks, dtype=np.float64)
    ys = np.concatenate([np.asarray(v, dtype=np.float64) for v in curves.values()])
    yr = _range(np.append(ys, 1.0))
    frame = _Frame(_range(ks), yr)
    body = frame.axes("K", "score")
    for idx, (name, vals) in enumerate(curves.items()):
        color = CURVE_COLORS[idx % len(CURVE_COLORS)]
        pts = " ".join(f"{_n(frame.x(k))},{_n(frame.y(v))}" for k, v in zip(ks, vals))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = MARGIN_T + 10 + 16 * idx
        lx = WIDTH - MARGIN_R + 12
        body.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" '
                    f'stroke-width="1.5"/>')
        body.append(f'<text x="{lx + 22}" y="{ly + 4}" font-size="10">{name}</text>')
    return _document(body)
