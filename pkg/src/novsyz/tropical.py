"""The dual-fan partial monoid of a polygon and the invariants built from it.

Elements of the fan are stored intrinsically: a cone index together with
non-negative coordinates in the basis (nu_i, nu_{i+1}) of that cone.  This
stays meaningful for polygons whose fan cannot be embedded in Z^2 because an
edge crosses a monodromy cut.  For polygons without kinked edges the fan is
complete in Z^2 and elements convert to and from integer covectors.
"""

from __future__ import annotations

import math
import warnings
from functools import cmp_to_key
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .affine_geom import (
    AffinePolygon,
    InclusionData,
    _covered_length,
    check_admissible_inclusion,
    det,
    point_in_polygon,
    sub,
)
from .errors import GapViolation, InjectivityHypothesisUnchecked, NotAdmissible, NotParallelCut
from .novikov import QQ, GroundField, NovikovElement
from .spectral import Piece, SpectralPage, _levels
from .symbols import ZERO, ExponentScalar, compare, scalar_to_json

UNDEFINED = None


# -- the partial monoid ------------------------------------------------------------


@dataclass(frozen=True, order=True)
class FanElement:
    """``m nu_cone + n nu_{cone+1}`` in canonical form.

    Canonical forms: zero is ``(0, 0, 0)``; a ray element ``k nu_i`` is
    ``(i, k, 0)``; an interior element of cone i has ``m, n > 0``.
    """

    cone: int
    m: int
    n: int
    after: int = field(default=0, compare=False)  # index of the second ray of the cone

    @property
    def is_zero(self) -> bool:
        return self.cone == 0

    @property
    def is_ray(self) -> bool:
        return self.cone != 0 and self.n == 0

    def __str__(self):
        if self.is_zero:
            return "0"
        if self.is_ray:
            return f"{self.m}*nu{self.cone}"
        return f"{self.m}*nu{self.cone}+{self.n}*nu{self.after or self.cone + 1}"

    def to_json(self) -> dict:
        return {"cone": self.cone, "coeffs": [self.m, self.n]}


ZERO_ELEMENT = FanElement(0, 0, 0)


class PartialMonoid:
    """Rays nu_1..nu_N (one per edge) and cones C_i = span(nu_i, nu_{i+1})."""

    def __init__(self, P: AffinePolygon):
        n = len(P)
        self.polygon = P
        self.size = n
        self.cone_bases: list[tuple[tuple[int, int], tuple[int, int]]] = []
        for i in range(1, n + 1):
            a, b = P.vertex_conormals(i)
            if a is None or b is None or det(a, b) != 1:
                raise ValueError(f"cone {i} is not unimodular: the fan needs a Delzant polygon")
            self.cone_bases.append((a, b))
        self.actions: list[ExponentScalar] = list(P.actions)
        self.regular = P.is_regular
        self.jump_rays = [e.index for e in P.edges if e.kinked]

    # -- elements ------------------------------------------------------------

    def _wrap(self, i: int) -> int:
        return (i - 1) % self.size + 1

    def normalize(self, cone: int, m: int, n: int) -> FanElement:
        if m < 0 or n < 0:
            raise ValueError("cone coordinates must be non-negative")
        cone = self._wrap(cone)
        if m == 0 and n == 0:
            return ZERO_ELEMENT
        if m == 0:
            return FanElement(self._wrap(cone + 1), n, 0)
        return FanElement(cone, m, n, self._wrap(cone + 1) if n else 0)

    def ray(self, i: int, k: int = 1) -> FanElement:
        return self.normalize(i, k, 0)

    def coords_in(self, x: FanElement, cone: int) -> tuple[int, int] | None:
        """Coordinates of x in the basis of ``cone`` (None when x is not in that cone)."""
        cone = self._wrap(cone)
        if x.is_zero:
            return (0, 0)
        if x.is_ray:
            if x.cone == cone:
                return (x.m, 0)
            if x.cone == self._wrap(cone + 1):
                return (0, x.m)
            return None
        return (x.m, x.n) if x.cone == cone else None

    def cones_of(self, x: FanElement) -> list[int]:
        return [j for j in range(1, self.size + 1) if self.coords_in(x, j) is not None]

    def local_vector(self, x: FanElement, cone: int) -> tuple[int, int]:
        m, n = self.coords_in(x, cone)
        a, b = self.cone_bases[cone - 1]
        return (m * a[0] + n * b[0], m * a[1] + n * b[1])

    def vector(self, x: FanElement) -> tuple[int, int]:
        """Integer covector of x (polygons without kinked edges only)."""
        self._require_regular()
        if x.is_zero:
            return (0, 0)
        return self.local_vector(x, x.cone)

    def element(self, v) -> FanElement:
        """The fan element with covector v (polygons without kinked edges only)."""
        self._require_regular()
        found = self._locate(tuple(v), range(1, self.size + 1))
        if found is None:
            raise ValueError(f"{v} lies in no cone")
        return found

    def _locate(self, v, cones) -> FanElement | None:
        if v == (0, 0):
            return ZERO_ELEMENT
        for j in cones:
            a, b = self.cone_bases[j - 1]
            m, n = det(v, b), det(a, v)  # basis has determinant one
            if m >= 0 and n >= 0:
                return self.normalize(j, m, n)
        return None

    def _require_regular(self):
        if not self.regular:
            raise ValueError("the fan crosses a monodromy cut and has no global Z^2 coordinates")

    def support(self, x: FanElement) -> ExponentScalar:
        """h_P(x): linear on each cone with h(nu_i) = c_i."""
        if x.is_zero:
            return ZERO
        c1 = self.actions[x.cone - 1]
        out = c1 * x.m
        if x.n:
            out = out + self.actions[self._wrap(x.cone + 1) - 1] * x.n
        return out

    def elements_below(self, bound, inclusive: bool = False) -> list[FanElement]:
        """All non-zero elements with h < bound (or <= bound)."""
        out = []
        limit = 0 if inclusive else -1

        def ok(h):
            return compare(h, bound) <= limit

        for j in range(1, self.size + 1):
            cj, cn = self.actions[j - 1], self.actions[self._wrap(j + 1) - 1]
            m = 1
            while ok(cj * m):
                n = 0
                while ok(cj * m + cn * n):
                    out.append(self.normalize(j, m, n))
                    n += 1
                m += 1
        return out

    # -- json ------------------------------------------------------------------

    def to_json(self) -> dict:
        rays = [{"edge": e.index, "conormal": list(e.conormal_start),
                 **({"conormal_after_cut": list(e.conormal_end)} if e.kinked else {}),
                 "action": scalar_to_json(e.action)} for e in self.polygon.edges]
        cones = [{"vertex": j, "rays": [j, self._wrap(j + 1)], "basis": [list(a), list(b)]}
                 for j, (a, b) in enumerate(self.cone_bases, start=1)]
        return {"rays": rays, "cones": cones, "embedded": self.regular}


def build_fan(P: AffinePolygon) -> PartialMonoid:
    return PartialMonoid(P)


def partial_add(m: PartialMonoid, x: FanElement, y: FanElement):
    """x + y when both lie in a common cone, else UNDEFINED (None)."""
    for j in m.cones_of(x):
        cy = m.coords_in(y, j)
        if cy is not None:
            cx = m.coords_in(x, j)
            return m.normalize(j, cx[0] + cy[0], cx[1] + cy[1])
    return UNDEFINED


# -- RH module ---------------------------------------------------------------------

TORUS_RANKS = (1, 2, 1)


@dataclass(frozen=True)
class RHEntry:
    element: FanElement
    degree: int
    rank: int
    action: ExponentScalar

    def to_json(self) -> dict:
        return {"element": self.element.to_json(), "label": str(self.element), "degree": self.degree,
                "rank": self.rank, "action": scalar_to_json(self.action)}


@dataclass
class RHModule:
    fan: PartialMonoid
    bound: object
    betti: tuple[int, ...]
    entries: list[RHEntry]

    def rank(self, degree: int) -> int:
        return sum(e.rank for e in self.entries if e.degree == degree)

    def in_degree(self, degree: int) -> list[RHEntry]:
        return [e for e in self.entries if e.degree == degree]

    @property
    def elements(self) -> list[FanElement]:
        return list(dict.fromkeys(e.element for e in self.entries))

    def euler_characteristic(self, element: FanElement) -> int:
        return sum((-1) ** e.degree * e.rank for e in self.entries if e.element == element)

    def basis(self, degree: int) -> list[tuple[FanElement, int]]:
        """Ordered basis in a degree: (element, copy index)."""
        return [(e.element, k) for e in self.in_degree(degree) for k in range(e.rank)]

    def to_json(self) -> dict:
        return {"bound": scalar_to_json(self.bound), "betti": list(self.betti),
                "ranks": {str(d): self.rank(d) for d in range(len(TORUS_RANKS))},
                "entries": [e.to_json() for e in self.entries]}


def interior_nodes(P: AffinePolygon):
    return [r for r in P.diagram.rays if point_in_polygon(r.base, P, strict=True)]


def betti_preset(P: AffinePolygon) -> tuple[int, ...] | None:
    """Regular base: torus (1,2,1); one simple node: pinched torus (1,1,1); else unknown."""
    nodes = interior_nodes(P)
    if not nodes:
        return TORUS_RANKS
    if len(nodes) == 1 and nodes[0].multiplicity == 1:
        return (1, 1, 1)
    return None


def _as_scalar(x):
    return x if isinstance(x, ExponentScalar) else ExponentScalar.rational(x)


def rh_module(P: AffinePolygon, bound, betti: Sequence[int] | None = None, injective: bool = False,
              fan: PartialMonoid | None = None) -> RHModule:
    """RH*(K) below the action bound: betti numbers on ZERO plus a torus block per fan element."""
    bound = _as_scalar(bound)
    fan = fan or build_fan(P)
    if betti is None:
        betti = betti_preset(P)
        if betti is None:
            raise ValueError("no betti preset for this configuration of nodes; supply betti numbers")
    else:
        betti = tuple(int(b) for b in betti)
        if not injective:
            warnings.warn(InjectivityHypothesisUnchecked(
                "user-supplied betti numbers: injectivity of the restriction to the boundary is not checked"),
                stacklevel=2)
    entries = [RHEntry(ZERO_ELEMENT, d, r, ZERO) for d, r in enumerate(betti) if r]
    elems = fan.elements_below(bound)
    elems.sort(key=lambda x: (float(fan.support(x)), x))
    _sort_exact(elems, fan)
    for x in elems:
        h = fan.support(x)
        entries += [RHEntry(x, d, r, h) for d, r in enumerate(TORUS_RANKS)]
    return RHModule(fan, bound, tuple(betti), entries)


def _sort_exact(elems: list, fan: PartialMonoid):
    # float order is only a first guess; insertion sort fixes it with exact comparisons
    for i in range(1, len(elems)):
        j = i
        while j > 0 and compare(fan.support(elems[j - 1]), fan.support(elems[j])) > 0:
            elems[j - 1], elems[j] = elems[j], elems[j - 1]
            j -= 1


# -- period spectrum ---------------------------------------------------------------


@dataclass
class PeriodSpectrum:
    entries: list[tuple[ExponentScalar, FanElement]]
    actions: list[ExponentScalar]  # distinct, increasing
    gap: ExponentScalar

    def to_json(self) -> dict:
        return {"periods": [{"action": scalar_to_json(a), "element": x.to_json(), "label": str(x)}
                            for a, x in self.entries],
                "distinct": [scalar_to_json(a) for a in self.actions], "gap": scalar_to_json(self.gap)}


def period_spectrum(P: AffinePolygon | PartialMonoid, bound) -> PeriodSpectrum:
    """Actions 0 < h(x) <= bound in increasing order and the minimal gap (including the gap to 0)."""
    fan = P if isinstance(P, PartialMonoid) else build_fan(P)
    bound = _as_scalar(bound)
    if compare(bound, ZERO) <= 0:
        raise ValueError("action bound must be positive")
    elems = fan.elements_below(bound, inclusive=True)
    elems.sort(key=lambda x: (float(fan.support(x)), x))
    _sort_exact(elems, fan)
    entries = [(fan.support(x), x) for x in elems]
    distinct: list[ExponentScalar] = []
    for a, _ in entries:
        if not distinct or compare(a, distinct[-1]) != 0:
            distinct.append(a)
    gap = bound
    prev = ZERO
    for a in distinct:
        if compare(a - prev, gap) < 0:
            gap = a - prev
        prev = a
    return PeriodSpectrum(entries, distinct, gap)


# -- E_1 page ----------------------------------------------------------------------


def e1_page(rh: RHModule, hbar, levels: int | None = None) -> SpectralPage:
    """E_1^{p,q} = RH^{p+q} tensored with the window [p hbar, (p+1) hbar); all d_1 vanish."""
    hbar = _as_scalar(hbar)
    if compare(hbar, ZERO) <= 0:
        raise ValueError("hbar must be positive")
    gap = period_spectrum(rh.fan, rh.bound).gap
    if compare(hbar, gap) > 0:
        warnings.warn(GapViolation(f"hbar = {hbar} exceeds the period gap {gap}"), stacklevel=2)
    if levels is None:
        levels = _levels(hbar, rh.bound)
    page = SpectralPage(1, hbar)
    for p in range(levels):
        lo, hi = hbar * p, hbar * (p + 1)
        for d in range(len(TORUS_RANKS)):
            pieces = [Piece(f"{x}#{k}", d, p, lo, hi, True) for x, k in rh.basis(d)]
            if pieces:
                page.entries[(p, d - p)] = pieces
    return page


# -- leading products --------------------------------------------------------------


@dataclass(frozen=True)
class LeadingProduct:
    weight: NovikovElement
    element: FanElement

    @property
    def exponent(self) -> ExponentScalar:
        return self.weight.valuation

    def to_json(self) -> dict:
        return {"weight": self.weight.to_json(), "element": self.element.to_json(), "label": str(self.element)}


@dataclass(frozen=True)
class UnknownTail:
    reason: str
    candidates: tuple = ()  # (element, exponent) pairs found in individual sheets

    @property
    def certificate(self) -> bool:
        """Every candidate leading term has strictly positive valuation."""
        return all(compare(w, ZERO) > 0 for _, w in self.candidates)

    def to_json(self) -> dict:
        return {"unknown_tail": True, "reason": self.reason, "all_candidates_positive": self.certificate,
                "candidates": [{"element": x.to_json(), "exponent": scalar_to_json(w)} for x, w in self.candidates]}


def _sheets(fan: PartialMonoid) -> list[list[int]]:
    """Maximal runs of consecutive cones that embed in one chart without crossing a cut."""
    n = fan.size
    start = fan.jump_rays[0]  # cone `start` begins right after the jump on ray `start`
    order = [fan._wrap(start + k) for k in range(n)]
    # cones between consecutive jump rays share a chart; split the cycle at every jump
    runs, run = [], []
    for j in order:
        if j in fan.jump_rays and run:
            runs.append(run)
            run = []
        run.append(j)
    runs.append(run)

    def angle(j):
        a, b = fan.cone_bases[j - 1]
        return math.atan2(det(a, b), a[0] * b[0] + a[1] * b[1])

    sheets = []
    for run in runs:
        for i in range(len(run)):
            total, k = 0.0, i
            while k < len(run) and total + angle(run[k]) < 2 * math.pi - 1e-9:
                total += angle(run[k])
                k += 1
            piece = run[i:k]
            if piece and not any(set(piece) <= set(s) for s in sheets):
                sheets.append(piece)
    return sheets


def _monomial(weight: ExponentScalar, fld: GroundField) -> NovikovElement:
    return NovikovElement.monomial(weight, fld.one, fld)


def leading_product(P: AffinePolygon | PartialMonoid, x: FanElement, y: FanElement, field: GroundField = QQ):
    """Leading term T^{h(x)+h(y)-h(x+y)} z^{x+y} of the product z^x z^y, or UnknownTail."""
    fan = P if isinstance(P, PartialMonoid) else build_fan(P)
    if fan.regular:
        vx, vy = fan.vector(x), fan.vector(y)
        z = fan.element((vx[0] + vy[0], vx[1] + vy[1]))
        w = fan.support(x) + fan.support(y) - fan.support(z)
        return LeadingProduct(_monomial(w, field), z)
    results = []
    for sheet in _sheets(fan):
        cx = [j for j in sheet if fan.coords_in(x, j) is not None]
        cy = [j for j in sheet if fan.coords_in(y, j) is not None]
        if not cx or not cy:
            continue
        vx, vy = fan.local_vector(x, cx[0]), fan.local_vector(y, cy[0])
        z = fan._locate((vx[0] + vy[0], vx[1] + vy[1]), sheet)
        if z is not None:
            results.append((z, fan.support(x) + fan.support(y) - fan.support(z)))
    distinct = list(dict.fromkeys(results))
    if len(distinct) == 1:
        z, w = distinct[0]
        return LeadingProduct(_monomial(w, field), z)
    reason = ("no cut-free sheet contains both factors and their sum" if not distinct
              else "the sum depends on the sheet")
    return UnknownTail(reason, tuple(distinct))


# -- presentations -----------------------------------------------------------------


@dataclass(frozen=True)
class Relation:
    """lhs = coefficient * rhs, or lhs = 0 when coefficient is None; ``unknown_tail`` marks undetermined rhs."""

    lhs: tuple[str, ...]
    coefficient: NovikovElement | None = None
    rhs: tuple[str, ...] = ()
    unknown_tail: bool = False

    def at_t_zero(self) -> "Relation":
        """Reduction modulo the maximal ideal: a positive-valuation coefficient becomes 0."""
        if self.coefficient is None or self.unknown_tail:
            return Relation(self.lhs)
        if compare(self.coefficient.valuation, ZERO) > 0:
            return Relation(self.lhs)
        return self

    def __str__(self):
        lhs = "*".join(self.lhs)
        if self.unknown_tail:
            return f"{lhs} = (unknown tail)"
        if self.coefficient is None:
            return f"{lhs} = 0"
        rhs = "*".join(self.rhs) or "1"
        return f"{lhs} = T^{{{self.coefficient.valuation}}}*{rhs}"

    def to_json(self) -> dict:
        out = {"lhs": list(self.lhs), "text": str(self), "unknown_tail": self.unknown_tail}
        if self.coefficient is not None:
            out["coefficient"] = self.coefficient.to_json()
            out["rhs"] = list(self.rhs)
        return out


@dataclass
class Presentation:
    generators: list[str]
    relations: list[Relation]
    extra: dict = field(default_factory=dict)

    def at_t_zero(self) -> list[Relation]:
        return [r.at_t_zero() for r in self.relations]

    def to_json(self) -> dict:
        out = {"generators": self.generators, "relations": [r.to_json() for r in self.relations],
               "t_zero": [str(r) for r in self.at_t_zero()]}
        out.update(self.extra)
        return out


def element_monomial(fan: PartialMonoid, x: FanElement) -> tuple[str, ...]:
    if x.is_zero:
        return ()
    out = (f"z{x.cone}",) * x.m
    if x.n:
        out += (f"z{fan._wrap(x.cone + 1)}",) * x.n
    return out


def stanley_reisner_presentation(P: AffinePolygon, field: GroundField = QQ) -> Presentation:
    """Generators z_i per edge; each non-adjacent product z_i z_j gets its leading-order relation."""
    fan = build_fan(P)
    n = fan.size
    gens = [f"z{i}" for i in range(1, n + 1)]
    rels = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if j - i in (1, n - 1):
                continue
            lp = leading_product(fan, fan.ray(i), fan.ray(j), field)
            if isinstance(lp, UnknownTail):
                rels.append(Relation((f"z{i}", f"z{j}"), unknown_tail=True))
            else:
                rels.append(Relation((f"z{i}", f"z{j}"), lp.weight, element_monomial(fan, lp.element)))
    return Presentation(gens, rels)


def laurent_check(P: AffinePolygon, Q: AffinePolygon, inc: InclusionData | None = None,
                  field: GroundField = QQ) -> Presentation:
    """Relation z_i X = T^eps for a strip Q cut from P parallel to edge i."""
    inc = inc or check_admissible_inclusion(Q, P)
    if not inc.admissible:
        raise NotParallelCut(f"the strip is not an admissible sub-polygon: {inc.reason}")
    common_q = {q for q, _ in inc.common_edges}
    new_edges = [e for e in Q.edges if e.index not in common_q]
    if len(new_edges) != 1:
        raise NotParallelCut("a strip must have exactly one edge interior to P")
    new = new_edges[0]
    target = (-new.conormal[0], -new.conormal[1])
    hits = [e for e in P.edges if e.conormal == target]
    if not hits:
        raise NotParallelCut("the new edge is parallel to no edge of P")
    edge = hits[0]
    covering = [o for o in inc.overlaps if o[1] == edge.index]
    if not any(_same_segment(o[2], o[3], edge.points[0], edge.points[-1]) for o in covering):
        raise NotParallelCut(f"the strip does not contain all of edge {edge.index}")
    # eps = h_Q(-nu_i) + c_i with both support values relative to the center of P
    eps = edge.action + max((_pair(new.conormal, sub(v, P.center)) for v in Q.corners), key=cmp_to_key(compare))
    if compare(eps, ZERO) <= 0:
        raise NotParallelCut("degenerate strip")
    coeff = NovikovElement.monomial(eps, field.one, field)
    rel = Relation((f"z{edge.index}", "X"), coeff, ())
    return Presentation([f"z{i}" for i in range(1, len(P) + 1)] + ["X"], [rel],
                        {"edge": edge.index, "width": scalar_to_json(eps), "new_edge": new.index,
                         "leading_symbol": f"X ~ z{new.index} on Q"})


def _pair(nu, p):
    return p[0] * nu[0] + p[1] * nu[1]


def _same_segment(a, b, c, d) -> bool:
    eq = lambda p, q: compare(p[0], q[0]) == 0 and compare(p[1], q[1]) == 0  # noqa: E731
    return (eq(a, c) and eq(b, d)) or (eq(a, d) and eq(b, c))


# -- restriction maps --------------------------------------------------------------


@dataclass
class RestrictionMap:
    source: RHModule
    target: RHModule
    matrices: dict[int, np.ndarray]  # degree -> target x source integer matrix
    blocks: list[tuple[FanElement, FanElement, ExponentScalar, ExponentScalar]]  # identity blocks with actions

    def kernel_elements(self) -> list[FanElement]:
        """Non-zero source elements sent to zero in every degree."""
        out = []
        for x in self.source.elements:
            if x.is_zero:
                continue
            cols = [i for i, (y, _) in enumerate(self.source.basis(0)) if y == x]
            if all(not self.matrices[0][:, c].any() for c in cols):
                out.append(x)
        return out

    def to_json(self) -> dict:
        return {"source_ranks": [self.source.rank(d) for d in sorted(self.matrices)],
                "target_ranks": [self.target.rank(d) for d in sorted(self.matrices)],
                "blocks": [{"source": str(x), "target": str(y), "source_action": scalar_to_json(a),
                            "target_action": scalar_to_json(b)} for x, y, a, b in self.blocks],
                "kernel": [str(x) for x in self.kernel_elements()],
                "matrices": {str(d): m.tolist() for d, m in sorted(self.matrices.items())}}


def _edge_map(inc: InclusionData) -> dict[int, int]:
    out: dict[int, int] = {}
    for q, p in inc.common_edges:
        out.setdefault(p, q)
    return out


def map_element(src: PartialMonoid, tgt: PartialMonoid, f: Mapping[int, int], x: FanElement) -> FanElement | None:
    """Image of a fan element under the edge map, or None when it is not supported on common strata."""
    if x.is_zero:
        return ZERO_ELEMENT
    i = x.cone
    if x.is_ray:
        return tgt.ray(f[i], x.m) if i in f else None
    j = src._wrap(i + 1)
    if i in f and j in f and f[j] == tgt._wrap(f[i] + 1):
        return tgt.normalize(f[i], x.m, x.n)
    return None


def restriction_map(P: AffinePolygon, Q: AffinePolygon, inc: InclusionData | None, bound,
                    map_on_betti: Mapping[int, Sequence[Sequence[int]]] | None = None,
                    source: RHModule | None = None, target: RHModule | None = None) -> RestrictionMap:
    """Projection RH(P) -> RH(Q) onto components supported on the common boundary."""
    inc = inc or check_admissible_inclusion(Q, P)
    if not inc.admissible:
        raise NotAdmissible(inc.reason)
    source = source or rh_module(P, bound)
    target = target or rh_module(Q, bound)
    f = _edge_map(inc)
    ambient = build_fan(Q.with_center(P.center))
    matrices, blocks = {}, []
    for d in range(len(TORUS_RANKS)):
        rows, cols = target.basis(d), source.basis(d)
        row_index = {key: r for r, key in enumerate(rows)}
        mat = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for c, (x, k) in enumerate(cols):
            if x.is_zero:
                continue
            y = map_element(source.fan, target.fan, f, x)
            if y is not None and (y, k) in row_index:
                mat[row_index[(y, k)], c] = 1
        zs = [c for c, (x, _) in enumerate(cols) if x.is_zero]
        zt = [r for r, (x, _) in enumerate(rows) if x.is_zero]
        if zs and zt:
            if map_on_betti is not None and d in map_on_betti:
                block = np.array(map_on_betti[d], dtype=np.int64).reshape(len(zt), len(zs))
            elif d == 0:
                block = np.eye(len(zt), len(zs), dtype=np.int64)
            else:
                block = np.zeros((len(zt), len(zs)), dtype=np.int64)
            mat[np.ix_(zt, zs)] = block
        matrices[d] = mat
    for x in source.elements:
        if x.is_zero:
            continue
        y = map_element(source.fan, target.fan, f, x)
        if y is not None and (y, 0) in {key for key in target.basis(0)}:
            blocks.append((x, y, source.fan.support(x), ambient.support(y)))
    return RestrictionMap(source, target, matrices, blocks)


# -- torsion criterion -------------------------------------------------------------


@dataclass
class CoverPiece:
    polygon: AffinePolygon
    torsion_free: Sequence[bool] = (True, True, True)
    h_injective: Sequence[bool] = (True, True, True)
    inclusion: InclusionData | None = None


@dataclass(frozen=True)
class TorsionVerdict:
    degree: int
    verdict: str  # "TORSION_FREE" or "INCONCLUSIVE"
    reason: str

    def to_json(self) -> dict:
        return {"degree": self.degree, "verdict": self.verdict, "reason": self.reason}


def _boundary_covered(P: AffinePolygon, incs: list[InclusionData]) -> list[int]:
    """Edges of P not covered by the union of shared boundaries."""
    missing = []
    for e in P.edges:
        overlaps = [(0, e.index, a, b) for inc in incs for (_, p, a, b) in inc.overlaps if p == e.index]
        if not overlaps or not _covered_length(e, overlaps):
            missing.append(e.index)
    return missing


def torsion_criterion(P: AffinePolygon, cover: Sequence[CoverPiece], degrees: int = 3) -> list[TorsionVerdict]:
    """Propagate torsion-freedom from a cover by admissible pieces along the boundary."""
    problems = []
    incs = []
    for k, piece in enumerate(cover, start=1):
        inc = piece.inclusion or check_admissible_inclusion(piece.polygon, P)
        if not inc.admissible:
            problems.append(f"piece {k} is not an admissible inclusion ({inc.reason})")
        incs.append(inc)
    if not problems:
        missing = _boundary_covered(P, incs)
        if missing:
            problems.append("boundary not covered: edges " + ", ".join(map(str, missing)))
    out = []
    for j in range(degrees):
        reasons = list(problems)
        for k, piece in enumerate(cover, start=1):
            if not piece.h_injective[j]:
                reasons.append(f"piece {k}: restriction not injective in degree {j}")
            if not piece.torsion_free[j]:
                reasons.append(f"piece {k}: not torsion free in degree {j}")
        if reasons:
            out.append(TorsionVerdict(j, "INCONCLUSIVE", "; ".join(reasons)))
        else:
            out.append(TorsionVerdict(j, "TORSION_FREE", "all hypotheses hold"))
    return out
