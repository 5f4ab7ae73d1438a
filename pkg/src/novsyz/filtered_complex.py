"""Filtered complexes over the Novikov ring and their barcodes.

Complexes are cohomologically graded: the differential raises degree by one.
Every generator sits at filtration level 0, so the homology of the
valuation-ring lattice is a sum of free summands (infinite bars) and torsion
summands ``Lambda_0 / T^l`` (finite bars of length ``l``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Iterable, Mapping, Sequence

from .errors import InsufficientPrecision, NullClass, SchemaError, TorsionPresent
from .novikov import QQ, GroundField, NovikovElement
from .symbols import (
    INF,
    ZERO,
    ExponentScalar,
    PeriodSymbolTable,
    compare,
    scalar_from_json,
    scalar_to_json,
    smax,
    smin,
)


@dataclass(frozen=True)
class Generator:
    label: str
    degree: int
    sector: str | None = None


class BanachComplex:
    """Finite free complex over the Novikov ring with a norm-nonincreasing differential.

    ``differential`` maps ``(source_label, target_label)`` to the coefficient of
    the target in ``d(source)``.
    """

    def __init__(self, generators: Iterable[Generator | tuple], differential: Mapping | None = None,
                 field: GroundField = QQ, table: PeriodSymbolTable | None = None, precision=INF):
        gens = [g if isinstance(g, Generator) else Generator(*g) for g in generators]
        self.generators: list[Generator] = gens
        self.field = field
        self.table = table
        self.precision = precision
        self._by_label = {g.label: g for g in gens}
        if len(self._by_label) != len(gens):
            raise ValueError("generator labels must be unique")
        self.differential: dict[tuple[str, str], NovikovElement] = {}
        for (src, tgt), val in (differential or {}).items():
            if src not in self._by_label or tgt not in self._by_label:
                raise KeyError(f"unknown generator in differential entry {(src, tgt)}")
            if not isinstance(val, NovikovElement):
                val = NovikovElement.constant(val, field)
            if val.terms or val.precision is not INF:
                self.differential[(src, tgt)] = val

    def generator(self, label: str) -> Generator:
        return self._by_label[label]

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.generators]

    def degrees(self) -> list[int]:
        return sorted({g.degree for g in self.generators})

    def basis(self, degree: int) -> list[str]:
        return [g.label for g in self.generators if g.degree == degree]

    def entry(self, src: str, tgt: str) -> NovikovElement:
        return self.differential.get((src, tgt), NovikovElement.zero(self.field))

    def matrix(self, degree: int) -> list[list[NovikovElement]]:
        """Rows: generators of ``degree + 1``; columns: generators of ``degree``."""
        return [[self.entry(s, t) for s in self.basis(degree)] for t in self.basis(degree + 1)]

    def apply(self, vector: Mapping[str, NovikovElement]) -> dict[str, NovikovElement]:
        out: dict[str, NovikovElement] = {}
        for (src, tgt), val in self.differential.items():
            if src in vector:
                term = val * vector[src]
                out[tgt] = out[tgt] + term if tgt in out else term
        return out

    def __len__(self):
        return len(self.generators)

    # -- serialisation -----------------------------------------------------

    def to_json(self) -> dict:
        gens = []
        for g in self.generators:
            item = {"label": g.label, "degree": g.degree}
            if g.sector is not None:
                item["sector"] = g.sector
            gens.append(item)
        diffs = []
        for (s, t), v in self.differential.items():
            diffs.append({"from": s, "to": t, **v.to_json()})
        out = {"field": self.field.to_json(), "generators": gens, "differentials": diffs,
               "precision": scalar_to_json(self.precision)}
        if self.table is not None and self.table.symbols[1:]:
            out["symbols"] = self.table.to_json()
        return out

    @classmethod
    def from_json(cls, obj: Mapping, table: PeriodSymbolTable | None = None, pointer: str = "") -> "BanachComplex":
        if not isinstance(obj, Mapping):
            raise SchemaError("complex must be an object", pointer)
        fld = GroundField.from_json(obj.get("field"), pointer + "/field")
        if table is None and "symbols" in obj:
            table = PeriodSymbolTable.from_json(obj["symbols"], pointer + "/symbols")
        gens = []
        for i, g in enumerate(obj.get("generators", [])):
            here = f"{pointer}/generators/{i}"
            if not isinstance(g, Mapping) or "label" not in g or "degree" not in g:
                raise SchemaError("generator needs label and degree", here)
            if not isinstance(g["degree"], int) or isinstance(g["degree"], bool):
                raise SchemaError("degree must be an integer", here + "/degree")
            gens.append(Generator(str(g["label"]), g["degree"], g.get("sector")))
        labels = {g.label for g in gens}
        if len(labels) != len(gens):
            raise SchemaError("duplicate generator label", pointer + "/generators")
        diff = {}
        for i, e in enumerate(obj.get("differentials", [])):
            here = f"{pointer}/differentials/{i}"
            if not isinstance(e, Mapping) or "from" not in e or "to" not in e:
                raise SchemaError("differential entry needs from and to", here)
            for key in ("from", "to"):
                if e[key] not in labels:
                    raise SchemaError(f"unknown generator {e[key]!r}", f"{here}/{key}")
            val = NovikovElement.from_json(e, fld, table, here)
            key = (e["from"], e["to"])
            diff[key] = diff[key] + val if key in diff else val
        prec = scalar_from_json(obj.get("precision", "inf"), table, pointer + "/precision")
        return cls(gens, diff, fld, table, prec)


# -- validation -----------------------------------------------------------------


@dataclass
class Violation:
    kind: str
    pair: tuple[str, str]
    detail: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "pair": list(self.pair), "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"valid": self.valid, "violations": [v.to_json() for v in self.violations]}


def validate_complex(c: BanachComplex, precision=None) -> ValidationReport:
    """Check degree, valuation, sector and ``d^2 = 0`` conditions; never raises."""
    prec = smin(c.precision, precision) if precision is not None else c.precision
    report = ValidationReport()
    for (s, t), v in c.differential.items():
        gs, gt = c.generator(s), c.generator(t)
        if gt.degree != gs.degree + 1:
            report.violations.append(Violation("degree", (s, t), f"entry maps degree {gs.degree} to {gt.degree}"))
        if v.terms and compare(v.valuation, ZERO) < 0:
            report.violations.append(Violation("negative_valuation", (s, t), f"valuation {v.valuation} < 0"))
        if gs.sector != gt.sector and v.terms:
            report.violations.append(Violation("sector", (s, t), f"sectors {gs.sector!r} and {gt.sector!r} differ"))
    for g in c.generators:
        dd = c.apply(c.apply({g.label: NovikovElement.one(c.field)}))
        for tgt, v in dd.items():
            if prec is not INF:
                v = v.truncate(prec)
            if v.terms:
                report.violations.append(Violation("d_squared", (g.label, tgt), f"d^2 coefficient {v}"))
    return report


# -- barcodes --------------------------------------------------------------------


@dataclass(frozen=True)
class Bar:
    degree: int
    birth: object
    length: object
    pair: tuple[str, ...]
    truncated: bool = False  # pivot at or beyond the working precision, reported as infinite

    @property
    def is_finite(self) -> bool:
        return self.length is not INF

    @property
    def death(self):
        return INF if self.length is INF else self.birth + self.length

    def alive_at(self, t) -> bool:
        return compare(self.birth, t) <= 0 and compare(t, self.death) < 0

    def to_json(self) -> dict:
        out = {"degree": self.degree, "birth": scalar_to_json(self.birth),
               "length": scalar_to_json(self.length), "pair": list(self.pair)}
        if self.truncated:
            out["truncated"] = True
        return out


def _bar_key(b: Bar):
    return (b.degree, _scalar_key(b.birth), _scalar_key(b.length), b.pair)


_scalar_key = cmp_to_key(compare)


@dataclass
class Barcode:
    bars: list[Bar]
    working_precision: object

    def in_degree(self, degree: int) -> list[Bar]:
        return [b for b in self.bars if b.degree == degree]

    def degrees(self) -> list[int]:
        return sorted({b.degree for b in self.bars})

    def multiset(self) -> list[tuple]:
        """Pairing-independent summary: sorted (degree, birth, length) triples."""
        return sorted(((b.degree, b.birth, b.length) for b in self.bars),
                      key=lambda t: (t[0], _scalar_key(t[1]), _scalar_key(t[2])))

    def to_json(self) -> dict:
        return {"bars": [b.to_json() for b in sorted(self.bars, key=_bar_key)],
                "working_precision": scalar_to_json(self.working_precision)}


@dataclass
class Reduction:
    """Outcome of the valuation-pivot reduction.

    ``roles[label]`` is ``("free",)``, ``("source", partner, l, pivot)``
    or ``("target", partner, l, pivot)``; normal-form generators keep the labels of the
    original generators they replaced.  When tracking is on, ``coords[d]``
    maps original coordinates to normal-form coordinates and ``basis[d]``
    holds the normal-form generators in original coordinates (rows and
    columns indexed by ``complex.basis(d)``).
    """

    complex: BanachComplex
    barcode: Barcode
    roles: dict
    coords: dict | None = None
    basis: dict | None = None

    def to_normal_form(self, degree: int, vector: Mapping[str, NovikovElement]) -> dict[str, NovikovElement]:
        labels = self.complex.basis(degree)
        q = self.coords[degree]
        zero = NovikovElement.zero(self.complex.field)
        out = {}
        for i, li in enumerate(labels):
            acc = zero
            for j, lj in enumerate(labels):
                if lj in vector:
                    acc = acc + q[i][j] * vector[lj]
            out[li] = acc
        return out

    def representative(self, label: str) -> dict[str, NovikovElement]:
        """Normal-form generator ``label`` written in the original basis."""
        d = self.complex.generator(label).degree
        labels = self.complex.basis(d)
        j = labels.index(label)
        p = self.basis[d]
        return {li: p[i][j] for i, li in enumerate(labels) if p[i][j].terms}


def _elt_key(v):
    return _scalar_key(v)


def reduce_complex(c: BanachComplex, mu, track: bool = False, pivot_order=None) -> Reduction:
    """Bring ``c`` to normal form by eliminating minimal-valuation pivots.

    Entries are computed below the internal precision ``2 * mu``; pivots of
    valuation in ``[mu, 2 mu)`` become infinite bars flagged as truncated.
    ``pivot_order`` optionally replaces the default tie-break key
    ``(degree, row, col)`` (used to test pairing independence).
    """
    mu = mu if isinstance(mu, ExponentScalar) else ExponentScalar.rational(mu)
    work = mu * 2
    fld = c.field
    zero = NovikovElement.zero(fld)
    one = NovikovElement.one(fld)
    degrees = c.degrees()
    basis = {d: c.basis(d) for d in degrees}
    index = {d: {l: i for i, l in enumerate(basis[d])} for d in degrees}
    # m[d][i][j]: coefficient of target i (degree d+1) in d(source j) (degree d)
    m = {}
    for d in degrees:
        rows, cols = basis.get(d + 1, []), basis[d]
        m[d] = [[c.entry(s, t).truncate(work) for s in cols] for t in rows]
    q = p = None
    if track:
        q = {d: [[one if i == j else zero for j in range(len(basis[d]))] for i in range(len(basis[d]))]
             for d in degrees}
        p = {d: [[one if i == j else zero for j in range(len(basis[d]))] for i in range(len(basis[d]))]
             for d in degrees}
    alive_rows = {d: set(range(len(basis.get(d + 1, [])))) for d in degrees}
    alive_cols = {d: set(range(len(basis[d]))) for d in degrees}
    roles: dict = {}
    bars: list[Bar] = []
    order = pivot_order or (lambda d, i, j: (d, i, j))

    while True:
        best = None
        best_key = None
        lowest_unknown = INF
        for d in degrees:
            for i in alive_rows[d]:
                row = m[d][i]
                for j in alive_cols[d]:
                    e = row[j]
                    if not e.terms:
                        if e.precision is not INF and compare(e.precision, lowest_unknown) < 0:
                            lowest_unknown = e.precision
                        continue
                    key = (_scalar_key(e.valuation), order(d, i, j))
                    if best is None or key < best_key:
                        best, best_key = (d, i, j), key
        if best is None:
            if compare(lowest_unknown, mu) < 0:
                raise InsufficientPrecision(f"entries unknown beyond {lowest_unknown} < working precision {mu}")
            break
        d, i, j = best
        a = m[d][i][j]
        l = a.valuation
        if compare(lowest_unknown, l) < 0 and compare(lowest_unknown, mu) < 0:
            raise InsufficientPrecision(
                f"pivot choice at valuation {l} depends on entries unknown beyond {lowest_unknown}")
        target = work - l * 2 if a.precision is INF else a.precision - l * 2
        inv = a.invert(target)
        x_label, y_label = basis[d][j], basis[d + 1][i]
        alive_cols[d].discard(j)
        alive_rows[d].discard(i)
        row_y = m[d][i]
        col_x = [m[d][r][j] for r in range(len(m[d]))]
        # Schur complement on the remaining block of this differential
        col_coeffs = {}
        for jj in alive_cols[d]:
            if row_y[jj].terms or row_y[jj].precision is not INF:
                col_coeffs[jj] = (row_y[jj] * inv).truncate(work)
        row_coeffs = {}
        for ii in alive_rows[d]:
            if col_x[ii].terms or col_x[ii].precision is not INF:
                row_coeffs[ii] = (col_x[ii] * inv).truncate(work)
        for ii in alive_rows[d]:
            b = col_x[ii]
            if not (b.terms or b.precision is not INF):
                continue
            row = m[d][ii]
            for jj, cc in col_coeffs.items():
                row[jj] = (row[jj] - b * cc).truncate(work)
        if track:
            # source degree: e'_{x'} = e_{x'} - c e_x
            qd, pd = q[d], p[d]
            n_d = len(basis[d])
            for jj, cc in col_coeffs.items():
                for k in range(n_d):
                    if qd[jj][k].terms:
                        qd[j][k] = (qd[j][k] + cc * qd[jj][k]).truncate(work)
                    if pd[k][j].terms:
                        pd[k][jj] = (pd[k][jj] - cc * pd[k][j]).truncate(work)
            # target degree: f_y <- f_y + sum (b'/a) f_{y'}
            q1, p1 = q[d + 1], p[d + 1]
            n_1 = len(basis[d + 1])
            for ii, cc in row_coeffs.items():
                for k in range(n_1):
                    if q1[i][k].terms:
                        q1[ii][k] = (q1[ii][k] - cc * q1[i][k]).truncate(work)
                    if p1[k][ii].terms:
                        p1[k][i] = (p1[k][i] + cc * p1[k][ii]).truncate(work)
        # x and y leave the neighbouring differentials
        if d - 1 in m:
            alive_rows[d - 1].discard(index[d][x_label])
        if d + 1 in m:
            alive_cols[d + 1].discard(index[d + 1][y_label])
        if compare(l, ZERO) == 0:
            roles[x_label] = ("source", y_label, l, a)
            roles[y_label] = ("target", x_label, l, a)
            continue
        truncated = compare(l, mu) >= 0
        roles[x_label] = ("source", y_label, l, a)
        roles[y_label] = ("target", x_label, l, a)
        bars.append(Bar(d + 1, ZERO, INF if truncated else l, (x_label, y_label), truncated))

    for g in c.generators:
        if g.label not in roles:
            roles[g.label] = ("free",)
            bars.append(Bar(g.degree, ZERO, INF, (g.label,)))
    bars.sort(key=_bar_key)
    return Reduction(c, Barcode(bars, mu), roles, q, p)


def barcode(c: BanachComplex, mu) -> Barcode:
    """Barcode of the homology of the valuation-ring lattice, bars longer than ``mu`` reported infinite."""
    return reduce_complex(c, mu).barcode


# -- queries on barcodes ----------------------------------------------------------


@dataclass(frozen=True)
class WindowPiece:
    start: object
    end: object
    bar: Bar

    def to_json(self) -> dict:
        return {"start": scalar_to_json(self.start), "end": scalar_to_json(self.end),
                "bar": self.bar.to_json()}


def window_ranks(bc: Barcode, degree: int, a, b) -> list[WindowPiece]:
    """Overlaps of the bars in ``degree`` with the window ``[a, b)``."""
    if compare(a, b) >= 0:
        raise ValueError("window must satisfy a < b")
    out = []
    for bar in bc.in_degree(degree):
        lo = smax(a, bar.birth)
        hi = smin(b, bar.death)
        if compare(lo, hi) < 0:
            out.append(WindowPiece(lo, hi, bar))
    return out


def infinitesimal_rank(bc: Barcode, degree: int, t) -> int:
    """Number of bars in ``degree`` alive at the level ``t``."""
    return sum(1 for bar in bc.in_degree(degree) if bar.alive_at(t))


def torsion_certificate(bc: Barcode, degree: int) -> list[Bar]:
    return [b for b in bc.in_degree(degree) if b.is_finite]


def is_torsion_free(bc: Barcode, degree: int) -> bool:
    return not torsion_certificate(bc, degree)


@dataclass
class LeadingSymbol:
    level: object
    basis: list[str]
    vector: list

    def to_json(self, fld: GroundField = QQ) -> dict:
        return {"level": scalar_to_json(self.level), "basis": self.basis,
                "vector": [fld.coeff_to_json(v) for v in self.vector]}


def leading_symbol(c: BanachComplex | Reduction, cycle: Mapping[str, NovikovElement], mu=None) -> LeadingSymbol:
    """Valuation of the class of ``cycle`` and its image among the infinite bars alive there.

    Accepts either a complex (reduced here at precision ``mu``) or a tracked
    reduction.
    """
    red = c if isinstance(c, Reduction) else reduce_complex(c, mu if mu is not None else 5, track=True)
    if red.coords is None:
        red = reduce_complex(red.complex, red.barcode.working_precision, track=True)
    cx = red.complex
    fld = cx.field
    cycle = {k: (v if isinstance(v, NovikovElement) else NovikovElement.constant(v, fld))
             for k, v in cycle.items() if k in cx._by_label}
    degs = {cx.generator(k).degree for k in cycle}
    if len(degs) > 1:
        raise ValueError("cycle mixes degrees")
    if not degs:
        raise NullClass("empty cycle")
    (deg,) = degs
    torsion = torsion_certificate(red.barcode, deg)
    if torsion:
        raise TorsionPresent(f"degree {deg} has torsion bars: {[b.to_json() for b in torsion]}")
    mu = red.barcode.working_precision
    w = red.to_normal_form(deg, cycle)
    free = [b for b in red.barcode.in_degree(deg)]
    labels = [b.pair[-1] for b in free]
    vals = [w[l].truncate(mu) for l in labels]
    known = [v for v in vals if v.terms]
    if not known:
        raise NullClass("cycle is a boundary modulo the working precision")
    t = smin([v.valuation for v in known])
    vector = []
    for v in vals:
        coeff = fld.zero
        for e, cf in v.terms:
            if e == t:
                coeff = cf
                break
        vector.append(coeff)
    return LeadingSymbol(t, labels, vector)


def infinitesimal_class(red: Reduction, cycle: Mapping[str, NovikovElement], t) -> tuple[list[Bar], list]:
    """Image of a cycle of valuation >= t in the infinitesimal homology at level t.

    Returns the bars alive at ``t`` (in the cycle's degree) and the ground-field
    coefficients of the class in that basis.
    """
    if red.coords is None:
        red = reduce_complex(red.complex, red.barcode.working_precision, track=True)
    cx = red.complex
    fld = cx.field
    degs = {cx.generator(k).degree for k in cycle}
    if len(degs) != 1:
        raise ValueError("cycle must be nonempty and homogeneous")
    (deg,) = degs
    w = red.to_normal_form(deg, cycle)
    alive = [b for b in red.barcode.in_degree(deg) if b.alive_at(t)]
    vector = []
    for b in alive:
        coeff = fld.zero
        for e, cf in w[b.pair[-1]].terms:
            c = compare(e, t)
            if c < 0:
                raise ValueError(f"cycle has valuation below {t}")
            if c == 0:
                coeff = cf
                break
        vector.append(coeff)
    return alive, vector


# -- spanning criterion ------------------------------------------------------------


def _row_reduce(rows: list[list], fld: GroundField) -> list[list]:
    """Echelon basis of the span of ``rows`` over the ground field."""
    basis: list[tuple[int, list]] = []
    for r in rows:
        r = list(r)
        for piv, b in basis:
            if r[piv] != 0:
                f = r[piv]
                r = [fld.sub(x, fld.mul(f, y)) for x, y in zip(r, b)]
        nz = next((k for k, x in enumerate(r) if x != 0), None)
        if nz is None:
            continue
        inv = fld.inv(r[nz])
        r = [fld.mul(inv, x) for x in r]
        for idx, (piv, b) in enumerate(basis):
            if b[nz] != 0:
                f = b[nz]
                basis[idx] = (piv, [fld.sub(x, fld.mul(f, y)) for x, y in zip(b, r)])
        basis.append((nz, r))
    return basis


@dataclass
class CriterionVerdict:
    verdict: str  # GENERATES, ISOMORPHISM or FAILS
    witness: object = None
    degree: int | None = None

    def to_json(self) -> dict:
        out = {"verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness if isinstance(self.witness, (str, int)) else str(self.witness)
            out["degree"] = self.degree
        return out


def generator_criterion(bc: Barcode | None, target: Mapping[int, Sequence], symbols: Sequence,
                        epsilon=None, field: GroundField = QQ, actions: Mapping | None = None) -> CriterionVerdict:
    """Decide whether leading symbols span a target module degreewise.

    ``target`` maps a degree to its list of slot labels; each symbol is a
    pair ``(degree, {slot: coeff})``.  The witness of a failure is the
    uncovered slot of least action (``actions`` maps slots to actions;
    slot order breaks ties).
    """
    if bc is not None:
        for deg in target:
            if not is_torsion_free(bc, deg):
                raise TorsionPresent(f"degree {deg} has torsion")
    free = True
    for deg in sorted(target):
        slots = list(target[deg])
        pos = {s: k for k, s in enumerate(slots)}
        rows = []
        for sdeg, vec in symbols:
            if sdeg != deg:
                continue
            row = [field.zero] * len(slots)
            for s, cf in vec.items():
                if s not in pos:
                    raise ValueError(f"symbol slot {s!r} not in the target of degree {deg}")
                row[pos[s]] = field.add(row[pos[s]], field(cf))
            rows.append(row)
        ech = _row_reduce(rows, field)
        if len(ech) < len(slots):
            # a slot is uncovered iff its unit vector is outside the span
            order = sorted(range(len(slots)),
                           key=lambda k: (_scalar_key(actions[slots[k]]) if actions else 0, k))
            for k in order:
                unit = [field.one if idx == k else field.zero for idx in range(len(slots))]
                if len(_row_reduce([b for _, b in ech] + [unit], field)) > len(ech):
                    return CriterionVerdict("FAILS", slots[k], deg)
        if len(rows) != len(ech):
            free = False
    return CriterionVerdict("ISOMORPHISM" if free else "GENERATES")
