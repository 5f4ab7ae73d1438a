"""Standalone SVG 1.1 plots of polygons, fans and barcodes."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .affine_geom import AffinePolygon
from .filtered_complex import Barcode
from .io import write_text
from .tropical import PartialMonoid

WIDTH = 400
PAD = 30


def _doc(body: list[str], width=WIDTH, height=WIDTH) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>", ""])


def _fmt(x: float) -> str:
    return f"{x:.3f}"


class _Frame:
    def __init__(self, xs, ys, size=WIDTH):
        lo_x, hi_x, lo_y, hi_y = min(xs), max(xs), min(ys), max(ys)
        span = max(hi_x - lo_x, hi_y - lo_y) or 1.0
        self.scale = (size - 2 * PAD) / span
        self.ox, self.oy = lo_x, hi_y

    def __call__(self, x, y) -> tuple[str, str]:
        return _fmt(PAD + (x - self.ox) * self.scale), _fmt(PAD + (self.oy - y) * self.scale)


def polygon_svg(P: AffinePolygon, samples=None, limit_points=()) -> str:
    pts = [(float(x), float(y)) for x, y in P.raw_vertices]
    nodes = [(float(r.base[0]), float(r.base[1])) for r in P.diagram.rays]
    frame = _Frame([p[0] for p in pts + nodes], [p[1] for p in pts + nodes])
    body = []
    path = " ".join(",".join(frame(*p)) for p in pts)
    body.append(f'<polygon points="{path}" fill="#eef3fb" stroke="black" stroke-width="1.5"/>')
    reach = max(abs(c) for p in pts for c in p) * 4 + 1
    for r, (bx, by) in zip(P.diagram.rays, nodes):
        ex, ey = bx + reach * r.direction[0], by + reach * r.direction[1]
        (x1, y1), (x2, y2) = frame(bx, by), frame(ex, ey)
        body.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="gray" stroke-dasharray="5,4"/>')
        body.append(f'<text x="{x1}" y="{y1}" font-size="14" text-anchor="middle">&#215;</text>')
    for e in P.edges:
        a, b = e.points[0], e.points[1]
        mx, my = frame((float(a[0]) + float(b[0])) / 2, (float(a[1]) + float(b[1])) / 2)
        body.append(f'<text x="{mx}" y="{my}" font-size="11" fill="navy">e{e.index}</text>')
    if samples:
        path = " ".join(",".join(frame(x, y)) for x, y in samples)
        body.append(f'<polygon points="{path}" fill="none" stroke="crimson" stroke-width="1"/>')
    for x, y in limit_points:
        cx, cy = frame(x, y)
        body.append(f'<circle cx="{cx}" cy="{cy}" r="3" fill="crimson"/>')
    cx, cy = frame(float(P.center[0]), float(P.center[1]))
    body.append(f'<circle cx="{cx}" cy="{cy}" r="2.5" fill="black"/>')
    return _doc(body)


def fan_svg(fan: PartialMonoid) -> str:
    c = WIDTH / 2
    body = []
    for j, (a, b) in enumerate(fan.cone_bases, start=1):
        for v, label in ((a, j), (b, fan._wrap(j + 1))):
            n = math.hypot(*v)
            x, y = c + (c - PAD) * v[0] / n, c - (c - PAD) * v[1] / n
            body.append(f'<line x1="{_fmt(c)}" y1="{_fmt(c)}" x2="{_fmt(x)}" y2="{_fmt(y)}" stroke="black"/>')
            tx, ty = c + (c - PAD / 2) * v[0] / n, c - (c - PAD / 2) * v[1] / n
            body.append(f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" font-size="11" text-anchor="middle">'
                        f'nu{label} {escape(str(tuple(v)))}</text>')
    return _doc(list(dict.fromkeys(body)))


def barcode_svg(bc: Barcode) -> str:
    bars = sorted(bc.bars, key=lambda b: (b.degree, float(b.length)))
    top = float(bc.working_precision) if bc.working_precision != math.inf else 1.0
    top = max([top] + [float(b.length) for b in bars if b.is_finite])
    row = 18
    height = max(2 * PAD + row * len(bars), 2 * PAD + row)
    scale = (WIDTH - 2 * PAD - 40) / top
    body = []
    for k, b in enumerate(bars):
        y = PAD + k * row + row / 2
        start = PAD + 40 + float(b.birth) * scale
        end = PAD + 40 + (float(b.length) if b.is_finite else top) * scale
        dash = "" if b.is_finite else ' stroke-dasharray="6,3"'
        body.append(f'<text x="{PAD}" y="{_fmt(y + 4)}" font-size="11">H{b.degree}</text>')
        body.append(f'<line x1="{_fmt(start)}" y1="{_fmt(y)}" x2="{_fmt(end)}" y2="{_fmt(y)}" '
                    f'stroke="black" stroke-width="3"{dash}/>')
    return _doc(body, height=height)


def render_svg(obj, path: str, **kwargs) -> str:
    if isinstance(obj, AffinePolygon):
        text = polygon_svg(obj, **kwargs)
    elif isinstance(obj, PartialMonoid):
        text = fan_svg(obj)
    elif isinstance(obj, Barcode):
        text = barcode_svg(obj)
    else:
        raise TypeError(f"cannot plot {type(obj).__name__}")
    write_text(path, text)
    return text
