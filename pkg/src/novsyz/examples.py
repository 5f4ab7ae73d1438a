"""Standard polygons and covers used in tests, docs and the CLI fixtures."""

from __future__ import annotations

from fractions import Fraction

from .affine_geom import AffinePolygon, Eigenray, EigenrayDiagram, point
from .symbols import PeriodSymbolTable

HALF = Fraction(1, 2)


def rect_table() -> PeriodSymbolTable:
    table = PeriodSymbolTable()
    for n in (2, 3, 5):
        table.declare_sqrt(f"sqrt{n}", n)
    return table


def rect(table: PeriodSymbolTable | None = None) -> AffinePolygon:
    """[-1, sqrt2] x [-sqrt3, sqrt5] centred at the origin.

    Edges in order bottom, right, top, left carry actions sqrt3, sqrt2, sqrt5, 1.
    """
    table = table or rect_table()
    s2, s3, s5 = (table.symbol(f"sqrt{n}") for n in (2, 3, 5))
    verts = [(-1, -s3), (s2, -s3), (s2, s5), (-1, s5)]
    return AffinePolygon(verts, (0, 0), table=table, name="rect")


def square(half_side=1, center=(0, 0)) -> AffinePolygon:
    """[-a, a]^2 with edges bottom, right, top, left."""
    a = half_side
    return AffinePolygon([(-a, -a), (a, -a), (a, a), (-a, a)], center, name="square")


def top_strip(height=HALF, half_side=1) -> AffinePolygon:
    """Strip of the square along its top edge: [-a, a] x [a - height, a]."""
    a = half_side
    lo = a - height
    return AffinePolygon([(-a, lo), (a, lo), (a, a), (-a, a)], (0, (lo + a) * HALF), name="top_strip")


def square_strips(width=HALF, half_side=1) -> list[AffinePolygon]:
    """The four boundary strips of the square (bottom, right, top, left)."""
    a, w = half_side, width
    c = (a - w + a) * HALF
    return [
        AffinePolygon([(-a, -a), (a, -a), (a, -a + w), (-a, -a + w)], (0, -c), name="bottom_strip"),
        AffinePolygon([(a - w, -a), (a, -a), (a, a), (a - w, a)], (c, 0), name="right_strip"),
        AffinePolygon([(-a, a - w), (a, a - w), (a, a), (-a, a)], (0, c), name="top_strip"),
        AffinePolygon([(-a, -a), (-a + w, -a), (-a + w, a), (-a, a)], (-c, 0), name="left_strip"),
    ]


def rect_right_strip(width, table: PeriodSymbolTable | None = None) -> AffinePolygon:
    table = table or rect_table()
    s2, s3, s5 = (table.symbol(f"sqrt{n}") for n in (2, 3, 5))
    lo = s2 - width
    verts = [(lo, -s3), (s2, -s3), (s2, s5), (lo, s5)]
    return AffinePolygon(verts, ((lo + s2) * HALF, 0), table=table, name="rect_right_strip")


def pentagon_points() -> dict:
    """Convex pentagon A, B, C, D, E (listed clockwise) with midpoints M2 of BC and M4 of DE."""
    pts = {"A": (0, 0), "B": (2, 1), "C": (3, Fraction(-1, 2)), "D": (Fraction(3, 2), -2), "E": (-1, -1)}
    mid = lambda p, q: ((p[0] + q[0]) * HALF, (p[1] + q[1]) * HALF)  # noqa: E731
    pts["M2"] = mid(pts["B"], pts["C"])
    pts["M4"] = mid(pts["D"], pts["E"])
    return pts


def _poly(names, pts, center, name):
    return AffinePolygon([pts[n] for n in names], center, name=name)


def pentagon() -> AffinePolygon:
    pts = pentagon_points()
    return _poly(["A", "E", "D", "C", "B"], pts, (1, -Fraction(1, 2)), "pentagon")


def pentagon_left_piece() -> AffinePolygon:
    """Piece cut off by the chord M2 M4 that contains A, B and E: shares the chain M4 E A B M2."""
    pts = pentagon_points()
    return _poly(["A", "E", "M4", "M2", "B"], pts, (Fraction(1, 2), -Fraction(1, 4)), "pentagon_left")


def pentagon_right_piece() -> AffinePolygon:
    """Quadrilateral M2, M4, E, A: its edge A M2 is a chord ending at the vertex A."""
    pts = pentagon_points()
    return _poly(["A", "E", "M4", "M2"], pts, (Fraction(1, 2), -Fraction(1, 2)), "pentagon_quad")


def l_shape() -> AffinePolygon:
    """Non-convex L: [0,2]x[0,1] union [0,1]x[0,2]."""
    verts = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
    return AffinePolygon(verts, (HALF, HALF), name="l_shape")


def l_shape_cover() -> list[AffinePolygon]:
    return [
        AffinePolygon([(0, 0), (2, 0), (2, 1), (0, 1)], (1, HALF), name="l_bottom"),
        AffinePolygon([(0, 0), (1, 0), (1, 2), (0, 2)], (HALF, 1), name="l_left"),
    ]


def node_diagram() -> EigenrayDiagram:
    return EigenrayDiagram([Eigenray(point(0, 0), (0, 1), 1)])


def node_polygon() -> AffinePolygon:
    """Polygon around a focus-focus node at the origin with its cut going up.

    The top edge crosses the cut at the kink K = (0, 1) and bends from
    direction (-1, 0) to (-1, 1).
    """
    verts = [(-1, -1), (1, -1), (1, 1), (0, 1), (-1, 2)]
    return AffinePolygon(verts, (0, 0), node_diagram(), name="node_polygon")


def delzant_triangle(size=2) -> AffinePolygon:
    """(0,0), (a,0), (0,a) with conormals (0,-1), (1,1), (-1,0)."""
    third = Fraction(size, 3)
    return AffinePolygon([(0, 0), (size, 0), (0, size)], (third, third), name="delzant_triangle")


def hexagon() -> AffinePolygon:
    """Delzant hexagon with conormals +-e1, +-e2, +-(1,1)."""
    verts = [(1, 0), (2, 0), (2, 1), (1, 2), (0, 2), (0, 1)]
    return AffinePolygon(verts, (1, 1), name="hexagon")
