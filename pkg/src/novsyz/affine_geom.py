"""Integral affine polygons over an eigenray diagram.

Points have ExponentScalar coordinates in a single cut chart.  All exact
predicates pair an integer covector with a scalar point, so no products of
two irrational scalars are ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .errors import NotContained, SchemaError
from .symbols import ZERO, ExponentScalar, PeriodSymbolTable, compare, scalar_from_json, scalar_to_json

Point = tuple  # (ExponentScalar, ExponentScalar)
Vec = tuple  # (int, int)


def _s(x) -> ExponentScalar:
    return x if isinstance(x, ExponentScalar) else ExponentScalar.rational(x)


def point(x, y) -> Point:
    return (_s(x), _s(y))


def sub(p: Point, q: Point) -> Point:
    return (p[0] - q[0], p[1] - q[1])


def pair(nu: Vec, p: Point) -> ExponentScalar:
    """<nu, p> for an integer covector and a scalar vector."""
    return p[0] * nu[0] + p[1] * nu[1]


def det(a: Vec, b: Vec) -> int:
    return a[0] * b[1] - a[1] * b[0]


def sign(x) -> int:
    return compare(x, ZERO)


def ratio(a: ExponentScalar, b: ExponentScalar) -> Fraction | None:
    """a / b when it is rational (proportional coefficient maps), else None."""
    if b.is_zero:
        raise ZeroDivisionError("ratio by zero")
    db = dict(b.coeffs)
    da = dict(a.coeffs)
    if set(da) - set(db):
        return None
    k, v = b.coeffs[0]
    r = da.get(k, Fraction(0)) / v
    for key, val in db.items():
        if da.get(key, Fraction(0)) != r * val:
            return None
    return r


def primitive_direction(delta: Point) -> Vec | None:
    """Primitive integer vector positively proportional to ``delta`` (None if irrational slope)."""
    dx, dy = delta
    if dx.is_zero and dy.is_zero:
        raise ValueError("zero-length segment")
    if dx.is_zero:
        return (0, sign(dy))
    r = ratio(dy, dx)
    if r is None:
        return None
    sx = sign(dx)
    return (sx * r.denominator, sx * r.numerator)


def outward_conormal(direction: Vec) -> Vec:
    """Outward conormal of an edge traversed counterclockwise with this direction."""
    a, b = direction
    return (b, -a)


def edge_direction(conormal: Vec) -> Vec:
    """Inverse of :func:`outward_conormal`."""
    return (-conormal[1], conormal[0])


def point_to_json(p: Point) -> list:
    return [scalar_to_json(p[0]), scalar_to_json(p[1])]


def point_from_json(obj, table, pointer) -> Point:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise SchemaError("point must be a pair", pointer)
    return (scalar_from_json(obj[0], table, pointer + "/0"), scalar_from_json(obj[1], table, pointer + "/1"))


# -- eigenray diagrams -----------------------------------------------------------


@dataclass(frozen=True)
class Eigenray:
    base: Point
    direction: Vec
    multiplicity: int = 1

    def contains(self, p: Point, strictly: bool = True) -> bool:
        """Is ``p`` on the ray (beyond the base point when ``strictly``)?"""
        rel = sub(p, self.base)
        if sign(pair((-self.direction[1], self.direction[0]), rel)) != 0:
            return False
        along = sign(pair(self.direction, rel))
        return along > 0 if strictly else along >= 0

    def transport(self, v: Vec) -> Vec:
        """Chart vector after crossing the cut along ``v`` (either orientation)."""
        u, m = self.direction, self.multiplicity
        d = det(u, v)
        return (v[0] + m * abs(d) * u[0], v[1] + m * abs(d) * u[1])


@dataclass
class EigenrayDiagram:
    rays: list[Eigenray] = field(default_factory=list)

    def __post_init__(self):
        for r in self.rays:
            if math.gcd(*r.direction) != 1:
                raise ValueError(f"eigenray direction {r.direction} is not primitive")
            if r.multiplicity < 1:
                raise ValueError("multiplicity must be positive")

    @property
    def nodes(self) -> list[Point]:
        return [r.base for r in self.rays]

    def cut_through(self, p: Point) -> Eigenray | None:
        for r in self.rays:
            if r.contains(p):
                return r
        return None

    def to_json(self) -> dict:
        return {"rays": [{"base": point_to_json(r.base), "dir": list(r.direction), "mult": r.multiplicity}
                         for r in self.rays]}

    @classmethod
    def from_json(cls, obj, table, pointer="/diagram") -> "EigenrayDiagram":
        if obj is None:
            return cls()
        rays = []
        for i, r in enumerate(obj.get("rays", [])):
            here = f"{pointer}/rays/{i}"
            try:
                d = tuple(int(x) for x in r["dir"])
                rays.append(Eigenray(point_from_json(r["base"], table, here + "/base"), d, int(r.get("mult", 1))))
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"bad eigenray: {exc}", here) from exc
        try:
            return cls(rays)
        except ValueError as exc:
            raise SchemaError(str(exc), pointer) from exc


# -- polygons ----------------------------------------------------------------------


@dataclass
class Edge:
    """Edge e_i from true vertex ``start`` to the next true vertex, possibly through kinks."""

    index: int
    points: list[Point]  # chart polyline, kinks included
    conormal_start: Vec | None
    conormal_end: Vec | None
    action: ExponentScalar | None

    @property
    def kinked(self) -> bool:
        return len(self.points) > 2

    @property
    def conormal(self) -> Vec | None:
        return self.conormal_start


class AffinePolygon:
    """Counterclockwise polygon in the cut chart with an explicit Euler-field center.

    Vertices lying on a cut ray are kinks: the chart segments on either side
    form a single edge whose direction jumps by the monodromy.  Edge ``i``
    (1-based) runs from ``corners[i-1]`` to ``corners[i]``.
    """

    def __init__(self, vertices: Sequence, center, diagram: EigenrayDiagram | None = None,
                 table: PeriodSymbolTable | None = None, name: str | None = None):
        self.raw_vertices: list[Point] = [point(*v) for v in vertices]
        self.center: Point = point(*center)
        self.diagram = diagram or EigenrayDiagram()
        self.table = table
        self.name = name
        self.problems: list[str] = []
        n = len(self.raw_vertices)
        if n < 3:
            raise ValueError("a polygon needs at least three vertices")
        self.kink_flags = [self.diagram.cut_through(v) is not None for v in self.raw_vertices]
        if all(self.kink_flags):
            raise ValueError("every vertex lies on a cut")
        first = self.kink_flags.index(False)
        order = self.raw_vertices[first:] + self.raw_vertices[:first]
        flags = self.kink_flags[first:] + self.kink_flags[:first]
        self.corners: list[Point] = [v for v, k in zip(order, flags) if not k]
        self.edges: list[Edge] = []
        polyline: list[Point] = [order[0]]
        for v, k in zip(order[1:] + order[:1], flags[1:] + flags[:1]):
            polyline.append(v)
            if not k:
                self.edges.append(self._make_edge(len(self.edges) + 1, polyline))
                polyline = [v]

    def _make_edge(self, index: int, pts: list[Point]) -> Edge:
        dirs = []
        for a, b in zip(pts, pts[1:]):
            try:
                d = primitive_direction(sub(b, a))
            except ValueError:
                d = None
                self.problems.append(f"edge {index}: repeated vertex")
            if d is None:
                self.problems.append(f"edge {index}: direction is not rational")
            dirs.append(d)
        if any(d is None for d in dirs):
            return Edge(index, pts, None, None, None)
        for k, kink in enumerate(pts[1:-1], start=1):
            ray = self.diagram.cut_through(kink)
            if ray.transport(dirs[k - 1]) != dirs[k]:
                self.problems.append(f"edge {index}: kink at {tuple(map(str, kink))} does not match the monodromy")
        nu0, nu1 = outward_conormal(dirs[0]), outward_conormal(dirs[-1])
        action = pair(nu0, sub(pts[0], self.center))
        return Edge(index, pts, nu0, nu1, action)

    # -- derived data -----------------------------------------------------------

    def __len__(self):
        return len(self.edges)

    @property
    def conormals(self) -> list[Vec]:
        return [e.conormal for e in self.edges]

    @property
    def actions(self) -> list[ExponentScalar]:
        return [e.action for e in self.edges]

    @property
    def is_regular(self) -> bool:
        """No kinked edge: the chart is a genuine integral affine chart near the boundary."""
        return not any(e.kinked for e in self.edges)

    def vertex_conormals(self, i: int) -> tuple[Vec, Vec]:
        """Conormals (nu_i, nu_{i+1}) at the corner between edges i and i+1, in the local chart."""
        n = len(self.edges)
        return self.edges[(i - 1) % n].conormal_end, self.edges[i % n].conormal_start

    def edge(self, i: int) -> Edge:
        return self.edges[(i - 1) % len(self.edges)]

    def with_center(self, center) -> "AffinePolygon":
        return AffinePolygon(self.raw_vertices, center, self.diagram, self.table, self.name)

    def transformed(self, matrix, shift) -> "AffinePolygon":
        """Image under v -> A v + b with A an integer matrix (orientation preserved if det A = 1)."""
        (a, b), (c, d) = matrix

        def f(p):
            return (p[0] * a + p[1] * b + _s(shift[0]), p[0] * c + p[1] * d + _s(shift[1]))

        return AffinePolygon([f(v) for v in self.raw_vertices], f(self.center), self.diagram, self.table, self.name)

    def to_json(self) -> dict:
        out = {"vertices": [point_to_json(v) for v in self.raw_vertices], "center": point_to_json(self.center)}
        if self.diagram.rays:
            out["diagram"] = self.diagram.to_json()
        if self.table is not None and self.table.symbols[1:]:
            out["symbols"] = self.table.to_json()
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, obj: Mapping, table: PeriodSymbolTable | None = None, pointer: str = "") -> "AffinePolygon":
        if not isinstance(obj, Mapping):
            raise SchemaError("polygon must be an object", pointer)
        if table is None:
            table = PeriodSymbolTable.from_json(obj.get("symbols"), pointer + "/symbols")
        verts = obj.get("vertices")
        if not isinstance(verts, list) or len(verts) < 3:
            raise SchemaError("polygon needs at least three vertices", pointer + "/vertices")
        pts = [point_from_json(v, table, f"{pointer}/vertices/{i}") for i, v in enumerate(verts)]
        if "center" not in obj:
            raise SchemaError("polygon needs a center", pointer + "/center")
        center = point_from_json(obj["center"], table, pointer + "/center")
        diagram = EigenrayDiagram.from_json(obj.get("diagram"), table, pointer + "/diagram")
        try:
            return cls(pts, center, diagram, table, obj.get("name"))
        except ValueError as exc:
            raise SchemaError(str(exc), pointer) from exc


# -- validation --------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"check": self.name, "passed": self.passed, "details": self.details}


@dataclass
class PolygonReport:
    checks: list[CheckResult]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def valid(self) -> bool:
        """Admissible up to irrationality (which is reported but not required)."""
        return all(c.passed for c in self.checks if c.name != "irrationality")

    def to_json(self) -> dict:
        return {"valid": self.valid, "checks": [c.to_json() for c in self.checks]}


def _turning_number(P: AffinePolygon) -> float:
    total = 0.0
    for i in range(1, len(P) + 1):
        a, b = P.vertex_conormals(i)
        total += math.atan2(det(a, b), a[0] * b[0] + a[1] * b[1])
    return total / (2 * math.pi)


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    d = primitive_direction(sub(b, a))
    if d is None:
        raise ValueError("segment with irrational slope")
    rel = sub(p, a)
    if sign(pair(outward_conormal(d), rel)) != 0:
        return False
    t = pair(d, rel)
    return sign(t) >= 0 and compare(t, pair(d, sub(b, a))) <= 0


def _segments(P: AffinePolygon):
    for e in P.edges:
        for a, b in zip(e.points, e.points[1:]):
            yield e, a, b


def _line_intersection(b1: Point, d1: Vec, b2: Point, d2: Vec) -> Point | None:
    dd = det(d1, d2)
    if dd == 0:
        return None
    rel = sub(b2, b1)
    t = (rel[0] * d2[1] - rel[1] * d2[0]) / dd
    return (b1[0] + t * d1[0], b1[1] + t * d1[1])


def validate_polygon(P: AffinePolygon, D: EigenrayDiagram | None = None) -> PolygonReport:
    """Convexity, Delzant, positivity of actions, irrationality and singular-point checks."""
    if D is not None and D is not P.diagram:
        P = AffinePolygon(P.raw_vertices, P.center, D, P.table, P.name)
    checks = []
    structural = list(P.problems)
    n = len(P)
    conv = CheckResult("convexity", not structural, list(structural))
    delz = CheckResult("delzant", not structural)
    if not structural:
        for i in range(1, n + 1):
            a, b = P.vertex_conormals(i)
            dt = det(a, b)
            if dt <= 0:
                conv.passed = False
                conv.details.append(f"vertex {i}: det(nu_{i}, nu_{i % n + 1}) = {dt} <= 0")
            if dt != 1:
                delz.passed = False
                delz.details.append(f"vertex {i}: det(nu_{i}, nu_{i % n + 1}) = {dt}")
        if conv.passed and round(_turning_number(P)) != 1:
            conv.passed = False
            conv.details.append("boundary winds more than once")
    checks += [conv, delz]
    pos = CheckResult("positive_actions", not structural)
    if not structural:
        for e in P.edges:
            if sign(e.action) <= 0:
                pos.passed = False
                pos.details.append(f"edge {e.index}: c = {e.action} <= 0")
            if e.kinked:
                # the action must not depend on the chart segment used
                alt = pair(e.conormal_end, sub(e.points[-1], P.center))
                if compare(alt, e.action) != 0:
                    pos.passed = False
                    pos.details.append(f"edge {e.index}: action differs across the cut ({e.action} vs {alt})")
    checks.append(pos)
    irr = CheckResult("irrationality", not structural)
    if not structural:
        for e, f in combinations(P.edges, 2):
            if e.action.is_zero or f.action.is_zero or ratio(e.action, f.action) is not None:
                irr.passed = False
                irr.details.append(f"c_{e.index} = {e.action} and c_{f.index} = {f.action} are Q-dependent")
    checks.append(irr)
    sing = CheckResult("singular_points", True)
    for node in P.diagram.nodes:
        for e, a, b in _segments(P):
            try:
                on = _on_segment(node, a, b)
            except ValueError:
                on = False
            if on:
                sing.passed = False
                sing.details.append(f"node {tuple(map(str, node))} lies on edge {e.index}")
    inside = [r for r in P.diagram.rays if point_in_polygon(r.base, P, strict=True)]
    if len(inside) >= 2:
        r0, r1 = inside[0], inside[1]
        meet = _line_intersection(r0.base, r0.direction, r1.base, r1.direction)
        for r in inside[1:]:
            normal = (-r.direction[1], r.direction[0])
            if meet is None or sign(pair(normal, sub(meet, r.base))) != 0:
                sing.passed = False
                sing.details.append("eigenrays inside the polygon are not concurrent")
                break
    if not point_in_polygon(P.center, P, strict=True):
        sing.passed = False
        sing.details.append("center is not an interior point")
    checks.append(sing)
    return PolygonReport(checks)


# -- support values ----------------------------------------------------------------


@dataclass(frozen=True)
class Face:
    kind: str  # "polygon", "edge" or "vertex"
    index: int | None = None  # 1-based edge index, or corner index (vertex between edges i and i+1)
    point: tuple | None = field(default=None, compare=False)  # the vertex itself

    def __str__(self):
        if self.kind == "polygon":
            return "P"
        return f"{self.kind} {self.index}"

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.index is not None:
            out["index"] = self.index
        if self.point is not None:
            out["point"] = point_to_json(self.point)
        return out


def _require_regular(P: AffinePolygon):
    if not P.is_regular:
        raise ValueError("vertex scans need a polygon away from cuts; use the fan for polygons crossing a cut")


def support_value(P: AffinePolygon, x: Vec, center: Point | None = None) -> tuple[ExponentScalar, Face]:
    """h_P(x) = max over vertices of <x, v - o>, with the maximizing face."""
    _require_regular(P)
    o = P.center if center is None else point(*center)
    if tuple(x) == (0, 0):
        return ZERO, Face("polygon")
    vals = [pair(x, sub(v, o)) for v in P.corners]
    n = len(vals)
    best = 0
    for i in range(1, n):
        if compare(vals[i], vals[best]) > 0:
            best = i
    hits = [i for i in range(n) if compare(vals[i], vals[best]) == 0]
    if len(hits) == 2:
        i, j = hits
        # corners i and i+1 bound edge i+1 (1-based)
        k = i if (i + 1) % n == j else j
        return vals[best], Face("edge", k + 1)
    # corner k (0-based) sits between edges k and k+1 (1-based, cyclic)
    k = hits[0]
    return vals[best], Face("vertex", k if k > 0 else n, P.corners[k])


def characteristic_limit(P: AffinePolygon, x: Vec) -> Face:
    """Face of P where the characteristic lines of direction x accumulate."""
    if tuple(x) == (0, 0):
        raise ValueError("covector must be nonzero")
    return support_value(P, x)[1]


def corner(P: AffinePolygon, i: int) -> Point:
    """The corner between edges i and i+1 (1-based)."""
    return P.corners[i % len(P.corners)]


# -- containment -------------------------------------------------------------------


def point_in_polygon(p: Point, P: AffinePolygon, strict: bool = False) -> bool:
    """Even-odd test in the chart; boundary points count as inside unless ``strict``."""
    segs = list(_segments(P))
    for _, a, b in segs:
        try:
            if _on_segment(p, a, b):
                return not strict
        except ValueError:
            pass
    inside = False
    for _, a, b in segs:
        ya, yb = sign(a[1] - p[1]), sign(b[1] - p[1])
        if (ya > 0) == (yb > 0):
            continue
        d = primitive_direction(sub(b, a))
        if d is None or d[1] == 0:
            continue
        # x-coordinate of the crossing: a_x + (p_y - a_y) * d_x / d_y
        cross_x = a[0] + (p[1] - a[1]) * Fraction(d[0], d[1])
        if compare(cross_x, p[0]) > 0:
            inside = not inside
    return inside


def _midpoint(a: Point, b: Point) -> Point:
    return ((a[0] + b[0]) * Fraction(1, 2), (a[1] + b[1]) * Fraction(1, 2))


def polygon_contains(P: AffinePolygon, Q: AffinePolygon) -> bool:
    for _, a, b in _segments(Q):
        if not point_in_polygon(a, P) or not point_in_polygon(_midpoint(a, b), P):
            return False
    return not any(point_in_polygon(v, Q, strict=True) for v in P.raw_vertices)


# -- admissible inclusions ---------------------------------------------------------


@dataclass
class InclusionData:
    common_edges: list[tuple[int, int]]  # (edge of Q, edge of P containing it)
    common_vertices: list[Point]
    admissible: bool
    reason: str
    overlaps: list[tuple[int, int, Point, Point]] = field(default_factory=list)  # (Q edge, P edge, start, end)
    touch_points: list[Point] = field(default_factory=list)

    @property
    def edge_map(self) -> dict[int, int]:
        """Edges of P that contain a common edge of Q, mapped to that edge of Q."""
        return {p: q for q, p in self.common_edges}

    def to_json(self) -> dict:
        return {"admissible": self.admissible, "reason": self.reason,
                "common_edges": [{"q_edge": q, "p_edge": p} for q, p in self.common_edges],
                "common_vertices": [point_to_json(v) for v in self.common_vertices],
                "overlaps": [{"q_edge": q, "p_edge": p, "start": point_to_json(a), "end": point_to_json(b)}
                             for q, p, a, b in self.overlaps],
                "touch_points": [point_to_json(v) for v in self.touch_points]}


def _overlap(a: Point, b: Point, c: Point, d: Point) -> tuple[Point, Point] | None:
    """Common sub-segment of collinear segments [a,b] and [c,d] (None if not collinear or a point)."""
    dab = primitive_direction(sub(b, a))
    dcd = primitive_direction(sub(d, c))
    if dab is None or dcd is None or (dab != dcd and dab != (-dcd[0], -dcd[1])):
        return None
    if sign(pair(outward_conormal(dab), sub(c, a))) != 0:
        return None
    t = lambda p: pair(dab, sub(p, a))  # noqa: E731 - position along [a, b]
    lo_cd, hi_cd = (c, d) if compare(t(c), t(d)) <= 0 else (d, c)
    start = a if compare(t(a), t(lo_cd)) >= 0 else lo_cd
    end = b if compare(t(b), t(hi_cd)) <= 0 else hi_cd
    if compare(t(start), t(end)) >= 0:
        return None
    return start, end


def _same(p: Point, q: Point) -> bool:
    return compare(p[0], q[0]) == 0 and compare(p[1], q[1]) == 0


def check_admissible_inclusion(Q: AffinePolygon, P: AffinePolygon) -> InclusionData:
    """Shared boundary of Q in P and whether it meets P only along interiors of edges."""
    if not polygon_contains(P, Q):
        raise NotContained("Q is not contained in P")
    overlaps = []
    for eq in Q.edges:
        for aq, bq in zip(eq.points, eq.points[1:]):
            for ep, ap, bp in _segments(P):
                ov = _overlap(aq, bq, ap, bp)
                if ov is not None:
                    overlaps.append((eq.index, ep.index, ov[0], ov[1]))
    reasons = []
    common_edges = []
    for eq in Q.edges:
        mine = [o for o in overlaps if o[0] == eq.index]
        if not mine:
            continue
        covered = _covered_length(eq, mine)
        if not covered:
            reasons.append(f"edge {eq.index} of Q meets the boundary of P only partially")
        else:
            hosts = sorted({o[1] for o in mine})
            for h in hosts:
                common_edges.append((eq.index, h))
    # chain endpoints: corners of Q where exactly one adjacent edge is common
    common_q = {q for q, _ in common_edges}
    common_vertices = []
    nq = len(Q)
    for i in range(1, nq + 1):
        v = corner(Q, i)
        left, right = i in common_q, (i % nq) + 1 in common_q
        if left and right:
            common_vertices.append(v)
        elif left or right:
            if any(_same(v, c) for c in P.corners):
                reasons.append(f"shared boundary ends at the vertex {tuple(map(str, v))} of P")
    # isolated touch points: corners of Q on the boundary of P not on a common edge
    touch = []
    for i in range(1, nq + 1):
        v = corner(Q, i)
        if i in common_q or (i % nq) + 1 in common_q:
            continue
        if any(_on_segment(v, a, b) for _, a, b in _segments(P)):
            touch.append(v)
            reasons.append(f"Q touches the boundary of P at the isolated point {tuple(map(str, v))}")
    # partial edges already recorded; chords of Q may cross P-vertices
    for i in range(1, nq + 1):
        if i in common_q:
            continue
        e = Q.edge(i)
        for c in P.corners:
            if any(_on_segment(c, a, b) for a, b in zip(e.points, e.points[1:])):
                v0, v1 = e.points[0], e.points[-1]
                if not (_same(c, v0) or _same(c, v1)):
                    reasons.append(f"edge {i} of Q passes through a vertex of P")
    admissible = not reasons
    return InclusionData(common_edges, common_vertices, admissible,
                         "admissible" if admissible else "; ".join(dict.fromkeys(reasons)), overlaps, touch)


def _covered_length(eq: Edge, overlaps) -> bool:
    """Do the overlap segments cover the whole Q edge?"""
    for a, b in zip(eq.points, eq.points[1:]):
        d = primitive_direction(sub(b, a))
        length = pair(d, sub(b, a))
        spans = []
        for _, _, s, t in overlaps:
            if _on_segment(s, a, b) and _on_segment(t, a, b):
                x, y = pair(d, sub(s, a)), pair(d, sub(t, a))
                spans.append((x, y) if compare(x, y) <= 0 else (y, x))
        spans.sort(key=lambda st: float(st[0]))
        reach = ZERO
        for x, y in spans:
            if compare(x, reach) > 0:
                return False
            if compare(y, reach) > 0:
                reach = y
        if compare(reach, length) < 0:
            return False
    return True
