"""Minimal deterministic SVG scatter/line plots.

Output bytes depend only on the data: coordinates are printed with a fixed
number of decimals and no timestamps or random ids are emitted.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 480
MARGIN = 56


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    first = np.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else float(t))
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class Plot:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self._layers: list[tuple[str, np.ndarray, dict]] = []

    def points(self, xy, css_class: str, color: str, radius: float = 2.5):
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        self._layers.append(("points", xy, {"class": css_class, "color": color, "r": radius}))

    def polyline(self, xy, css_class: str, color: str, width: float = 1.0):
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        self._layers.append(("line", xy, {"class": css_class, "color": color, "w": width}))

    def _bounds(self):
        data = [xy for _, xy, _ in self._layers if len(xy)]
        if not data:
            return (-1.0, 1.0, -1.0, 1.0)
        allxy = np.vstack(data)
        x0, y0 = allxy.min(axis=0)
        x1, y1 = allxy.max(axis=0)
        padx = 0.05 * (x1 - x0) or 1.0
        pady = 0.05 * (y1 - y0) or 1.0
        return (x0 - padx, x1 + padx, y0 - pady, y1 + pady)

    def render(self) -> str:
        x0, x1, y0, y1 = self._bounds()
        sx = (WIDTH - 2 * MARGIN) / (x1 - x0)
        sy = (HEIGHT - 2 * MARGIN) / (y1 - y0)

        def px(x):
            return MARGIN + (x - x0) * sx

        def py(y):
            return HEIGHT - MARGIN - (y - y0) * sy

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{escape(self.title)}</text>',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
            f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="black"/>',
        ]
        for t in _nice_ticks(x0, x1):
            out.append(f'<line x1="{_fmt(px(t))}" y1="{HEIGHT - MARGIN}" x2="{_fmt(px(t))}" '
                       f'y2="{HEIGHT - MARGIN + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(px(t))}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle" '
                       f'font-size="11">{t:g}</text>')
        for t in _nice_ticks(y0, y1):
            out.append(f'<line x1="{MARGIN - 5}" y1="{_fmt(py(t))}" x2="{MARGIN}" '
                       f'y2="{_fmt(py(t))}" stroke="black"/>')
            out.append(f'<text x="{MARGIN - 8}" y="{_fmt(py(t) + 4)}" text-anchor="end" '
                       f'font-size="11">{t:g}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" '
                   f'font-size="13">{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" font-size="13" '
                   f'transform="rotate(-90 16 {HEIGHT / 2})">{escape(self.ylabel)}</text>')

        for kind, xy, style in self._layers:
            if kind == "line":
                pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in xy)
                out.append(f'<polyline class="{style["class"]}" points="{pts}" fill="none" '
                           f'stroke="{style["color"]}" stroke-width="{style["w"]}"/>')
            else:
                out.append(f'<g class="{style["class"]}" fill="{style["color"]}">')
                for a, b in xy:
                    out.append(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="{style["r"]}"/>')
                out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        try:
            path.write_text(self.render())
        except OSError as exc:
            raise OSError(f"could not write plot to {path}: {exc}") from exc
        return path
