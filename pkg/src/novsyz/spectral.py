"""Spectral sequence of the filtration ``F^p = T^{p hbar} B_0``.

Pages are read off the normal form: every normal-form pair ``x -> a y`` with
``val(a) = k hbar + rho`` splits into elementary window pieces, and each piece
either lives forever or is cancelled by exactly one differential.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cmp_to_key

from .errors import NonIntegralShift
from .filtered_complex import BanachComplex, Barcode, reduce_complex
from .novikov import NovikovElement
from .symbols import ZERO, ExponentScalar, compare, scalar_to_json, smin

FOREVER = math.inf
_key = cmp_to_key(compare)


@dataclass(frozen=True)
class Piece:
    """Sub-interval [start, end) of the window of filtration level ``p``."""

    generator: str
    degree: int
    p: int
    start: object
    end: object
    full: bool

    def to_json(self) -> dict:
        return {"generator": self.generator, "degree": self.degree, "p": self.p,
                "start": scalar_to_json(self.start), "end": scalar_to_json(self.end), "full": self.full}


@dataclass(frozen=True)
class PageDifferential:
    source: Piece
    target: Piece
    coefficient: NovikovElement

    def to_json(self) -> dict:
        return {"source": self.source.to_json(), "target": self.target.to_json(),
                "coefficient": self.coefficient.to_json()}


@dataclass
class SpectralPage:
    r: int
    step: object
    entries: dict = field(default_factory=dict)  # (p, q) -> list[Piece]
    differentials: list = field(default_factory=list)

    def pieces(self, p: int, q: int) -> list[Piece]:
        return self.entries.get((p, q), [])

    def free_rank(self, p: int, q: int) -> int:
        """Number of full-window summands at (p, q)."""
        return sum(1 for pc in self.pieces(p, q) if pc.full)

    def summands(self, p: int, q: int) -> list[tuple]:
        """Pieces of the same generator glued together: one interval per cyclic summand."""
        by_gen: dict[str, list[Piece]] = {}
        for pc in self.pieces(p, q):
            by_gen.setdefault(pc.generator, []).append(pc)
        out = []
        for gen in sorted(by_gen):
            run = None
            for pc in sorted(by_gen[gen], key=lambda x: _key(x.start)):
                if run is not None and compare(run[1], pc.start) == 0:
                    run = (run[0], pc.end)
                else:
                    if run is not None:
                        out.append(run)
                    run = (pc.start, pc.end)
            out.append(run)
        return out

    def total_degree_pieces(self, p: int, degree: int) -> list[Piece]:
        return self.pieces(p, degree - p)

    def to_json(self) -> dict:
        entries = []
        for (p, q) in sorted(self.entries):
            pcs = self.entries[(p, q)]
            entries.append({"p": p, "q": q, "free_rank": self.free_rank(p, q),
                            "pieces": [[scalar_to_json(x.start), scalar_to_json(x.end)] for x in pcs]})
        return {"r": self.r, "step": scalar_to_json(self.step), "entries": entries,
                "differentials": [d.to_json() for d in self.differentials]}


def _as_scalar(x) -> ExponentScalar:
    return x if isinstance(x, ExponentScalar) else ExponentScalar.rational(x)


def split_length(l, hbar) -> tuple[int, object]:
    """Write ``l = k hbar + rho`` with ``0 <= rho < hbar``."""
    k = max(0, int(math.floor(float(l) / float(hbar))))
    while compare(hbar * k, l) > 0:
        k -= 1
    while compare(hbar * (k + 1), l) <= 0:
        k += 1
    return k, l - hbar * k


@dataclass
class _Elementary:
    piece: Piece
    lifetime: float  # last page on which the piece is present


def _elementary_pieces(c: BanachComplex, hbar, levels: int, mu):
    red = reduce_complex(c, mu)
    pieces: list[_Elementary] = []
    diffs: list[tuple[int, Piece, Piece, NovikovElement]] = []
    non_integral = []

    def window(p):
        return hbar * p, hbar * (p + 1)

    def make(label, degree, p, start, end):
        lo, hi = window(p)
        return Piece(label, degree, p, start, end, compare(start, lo) == 0 and compare(end, hi) == 0)

    for g in c.generators:
        role = red.roles[g.label]
        if role[0] == "free":
            for p in range(levels):
                lo, hi = window(p)
                pieces.append(_Elementary(make(g.label, g.degree, p, lo, hi), FOREVER))
            continue
        if role[0] == "target":
            continue
        _, y_label, l, a = role
        if compare(l, ZERO) == 0:
            continue  # cancelled on the zeroth page
        y_deg = g.degree + 1
        k, rho = split_length(l, hbar)
        if compare(rho, ZERO) != 0:
            non_integral.append((g.label, y_label, l))
        a_pieces, b_pieces, c_pieces, d_pieces = {}, {}, {}, {}
        for p in range(levels):
            lo, hi = window(p)
            cut = hi - rho
            a_pieces[p] = make(g.label, g.degree, p, lo, cut)
            d_pieces[p] = make(y_label, y_deg, p, lo + rho, hi)
            if compare(rho, ZERO) != 0:
                b_pieces[p] = make(g.label, g.degree, p, cut, hi)
                c_pieces[p] = make(y_label, y_deg, p, lo, lo + rho)
        for p in range(levels):
            pieces.append(_Elementary(a_pieces[p], k))
            pieces.append(_Elementary(d_pieces[p], k if p >= k else FOREVER))
            if p + k < levels:
                diffs.append((k, a_pieces[p], d_pieces[p + k], a))
            if p in b_pieces:
                pieces.append(_Elementary(b_pieces[p], k + 1))
                pieces.append(_Elementary(c_pieces[p], k + 1 if p >= k + 1 else FOREVER))
                if p + k + 1 < levels:
                    diffs.append((k + 1, b_pieces[p], c_pieces[p + k + 1], a))
    return red, pieces, diffs, non_integral


def spectral_sequence(c: BanachComplex, hbar, max_page: int, mu=5) -> list[SpectralPage]:
    """Pages E_1 .. E_max_page, restricted to filtration levels p with p*hbar < mu."""
    hbar = _as_scalar(hbar)
    if compare(hbar, ZERO) <= 0:
        raise ValueError("hbar must be positive")
    if max_page < 1:
        raise ValueError("max_page must be at least 1")
    mu = _as_scalar(mu)
    levels = _levels(hbar, mu)
    _, pieces, diffs, non_integral = _elementary_pieces(c, hbar, levels, mu)
    if non_integral:
        warnings.warn(NonIntegralShift(
            f"differential valuations not multiples of {hbar}: "
            + ", ".join(f"{x}->{y} ({l})" for x, y, l in non_integral)), stacklevel=2)
    pages = []
    for r in range(1, max_page + 1):
        page = SpectralPage(r, hbar)
        for el in pieces:
            if el.lifetime >= r:
                pc = el.piece
                page.entries.setdefault((pc.p, pc.degree - pc.p), []).append(pc)
        for key in page.entries:
            page.entries[key].sort(key=lambda pc: (_key(pc.start), _key(pc.end), pc.generator))
        page.differentials = [PageDifferential(s, t, a) for k, s, t, a in diffs if k == r]
        pages.append(page)
    return pages


def limit_page(c: BanachComplex, hbar, mu=5) -> SpectralPage:
    """The page at which the sequence has degenerated (E_infinity within the level range)."""
    hbar = _as_scalar(hbar)
    mu = _as_scalar(mu)
    levels = _levels(hbar, mu)
    _, pieces, diffs, _ = _elementary_pieces(c, hbar, levels, mu)
    last = max([int(el.lifetime) for el in pieces if el.lifetime != FOREVER] + [0]) + 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonIntegralShift)
        return spectral_sequence(c, hbar, last, mu)[-1]


def _levels(hbar, mu) -> int:
    n = max(0, int(math.floor(float(mu) / float(hbar))))
    while compare(hbar * n, mu) >= 0 and n > 0:
        n -= 1
    while compare(hbar * (n + 1), mu) < 0:
        n += 1
    return n + 1


def associated_graded(bc: Barcode, degree: int, hbar, p: int) -> list[tuple]:
    """Pieces of gr_p of the barcode homology: [p hbar, (p+1) hbar) cut by each bar."""
    hbar = _as_scalar(hbar)
    lo, hi = hbar * p, hbar * (p + 1)
    out = []
    for bar in bc.in_degree(degree):
        end = smin(hi, bar.death)
        start = lo if compare(bar.birth, lo) <= 0 else bar.birth
        if compare(start, end) < 0:
            out.append((start, end))
    return out
