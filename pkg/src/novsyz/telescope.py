"""Mapping telescopes of rays of complexes, truncated at a working precision."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import RayTooShort, SchemaError
from .filtered_complex import BanachComplex, Generator
from .novikov import NovikovElement
from .symbols import INF, ZERO, compare, smin

ChainMap = dict  # (source label, target label) -> NovikovElement


@dataclass
class ComplexRay:
    """Stages C_1 -> C_2 -> ... with continuation maps.

    ``tail`` is the map C_N -> C_N repeated beyond the last stage; when it is
    omitted the last supplied map is reused (if it is an endomorphism of the
    last stage) and otherwise the identity.
    """

    stages: list[BanachComplex]
    maps: list[ChainMap] = field(default_factory=list)
    tail: ChainMap | None = None

    def __post_init__(self):
        if self.stages and len(self.maps) != len(self.stages) - 1:
            raise ValueError("a ray with N stages needs N-1 continuation maps")

    def tail_map(self) -> ChainMap:
        if self.tail is not None:
            return self.tail
        last = self.stages[-1]
        if self.maps:
            m = self.maps[-1]
            labels = set(last.labels)
            prev = self.stages[-2]
            if set(prev.labels) == labels and all(s in labels and t in labels for s, t in m):
                return m
        one = NovikovElement.one(last.field)
        return {(l, l): one for l in last.labels}

    def validation_errors(self, precision=INF) -> list[str]:
        errors = []
        for i, m in enumerate(self.maps):
            errors += _chain_map_errors(self.stages[i], self.stages[i + 1], m, precision, f"map {i + 1}")
        if self.stages:
            errors += _chain_map_errors(self.stages[-1], self.stages[-1], self.tail_map(), precision, "tail")
        return errors

    def to_json(self) -> dict:
        out = {"stages": [s.to_json() for s in self.stages],
               "maps": [_map_to_json(m) for m in self.maps]}
        if self.tail is not None:
            out["tail"] = _map_to_json(self.tail)
        return out

    @classmethod
    def from_json(cls, obj: Mapping, table=None, pointer: str = "") -> "ComplexRay":
        if not isinstance(obj, Mapping):
            raise SchemaError("ray must be an object", pointer)
        stages = [BanachComplex.from_json(s, table, f"{pointer}/stages/{i}")
                  for i, s in enumerate(obj.get("stages", []))]
        maps = []
        for i, m in enumerate(obj.get("maps", [])):
            if i + 1 >= len(stages):
                raise SchemaError("more maps than stage transitions", f"{pointer}/maps/{i}")
            maps.append(_map_from_json(m, stages[i], stages[i + 1], table, f"{pointer}/maps/{i}"))
        if stages and len(maps) != len(stages) - 1:
            raise SchemaError(f"expected {len(stages) - 1} maps, got {len(maps)}", pointer + "/maps")
        tail = None
        if obj.get("tail") is not None:
            if not stages:
                raise SchemaError("tail map on an empty ray", pointer + "/tail")
            tail = _map_from_json(obj["tail"], stages[-1], stages[-1], table, pointer + "/tail")
        return cls(stages, maps, tail)


def _map_to_json(m: ChainMap) -> list[dict]:
    return [{"from": s, "to": t, **v.to_json()} for (s, t), v in m.items()]


def _map_from_json(entries, src: BanachComplex, tgt: BanachComplex, table, pointer) -> ChainMap:
    out: ChainMap = {}
    if not isinstance(entries, list):
        raise SchemaError("chain map must be a list of entries", pointer)
    for i, e in enumerate(entries):
        here = f"{pointer}/{i}"
        if not isinstance(e, Mapping) or e.get("from") not in src.labels or e.get("to") not in tgt.labels:
            raise SchemaError("map entry needs known from/to labels", here)
        out[(e["from"], e["to"])] = NovikovElement.from_json(e, src.field, table, here)
    return out


def apply_map(m: ChainMap, vector: Mapping[str, NovikovElement]) -> dict[str, NovikovElement]:
    out: dict[str, NovikovElement] = {}
    for (s, t), v in m.items():
        if s in vector:
            term = v * vector[s]
            out[t] = out[t] + term if t in out else term
    return out


def _chain_map_errors(src: BanachComplex, tgt: BanachComplex, m: ChainMap, precision, name) -> list[str]:
    errors = []
    for (s, t), v in m.items():
        if src.generator(s).degree != tgt.generator(t).degree:
            errors.append(f"{name}: {s}->{t} changes degree")
        if v.terms and compare(v.valuation, ZERO) < 0:
            errors.append(f"{name}: {s}->{t} has negative valuation")
    one = NovikovElement.one(src.field)
    for g in src.generators:
        e = {g.label: one}
        lhs = tgt.apply(apply_map(m, e))
        rhs = apply_map(m, src.apply(e))
        for k in set(lhs) | set(rhs):
            diff = lhs.get(k, NovikovElement.zero(src.field)) - rhs.get(k, NovikovElement.zero(src.field))
            if precision is not INF:
                diff = diff.truncate(precision)
            if diff.terms:
                errors.append(f"{name}: does not commute with d at {g.label}->{k}")
    return errors


# -- tail analysis ---------------------------------------------------------------


def _as_matrix(m: ChainMap, labels: list[str], fld):
    idx = {l: i for i, l in enumerate(labels)}
    zero = NovikovElement.zero(fld)
    mat = [[zero] * len(labels) for _ in labels]
    for (s, t), v in m.items():
        mat[idx[t]][idx[s]] = v
    return mat


def _matmul(a, b, fld, precision):
    zero = NovikovElement.zero(fld)
    n = len(a)
    out = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = zero
            for k in range(n):
                if a[i][k].terms and b[k][j].terms:
                    acc = acc + a[i][k] * b[k][j]
            out[i][j] = acc.truncate(precision)
    return out


def _constant_part_rank(mat, fld) -> int:
    from .filtered_complex import _row_reduce
    rows = []
    for row in mat:
        r = []
        for v in row:
            c = fld.zero
            if v.terms and compare(v.terms[0][0], ZERO) == 0:
                c = v.terms[0][1]
            r.append(c)
        rows.append(r)
    return len(_row_reduce(rows, fld))


def _min_positive_exponent(mat):
    best = None
    for row in mat:
        for v in row:
            for e, _ in v.terms:
                if compare(e, ZERO) > 0:
                    best = e if best is None else smin(best, e)
                    break
    return best


def tail_behaviour(ray: ComplexRay, mu):
    """Classify the tail map: ("automorphism", 0) or ("contracting", k) with tail^k = 0 mod T^mu."""
    last = ray.stages[-1]
    labels, fld = last.labels, last.field
    mat = _as_matrix(ray.tail_map(), labels, fld)
    n = len(labels)
    if n == 0:
        return "automorphism", 0
    rank = _constant_part_rank(mat, fld)
    if rank == n:
        return "automorphism", 0
    if all(not v.terms for row in mat for v in row):
        return "contracting", 1
    v_plus = _min_positive_exponent(mat)
    if v_plus is None:
        bound = n
    else:
        bound = n * math.ceil(float(mu) / float(v_plus) + 1)
    power = mat
    for k in range(1, bound + 1):
        if all(not v.truncate(mu).terms for row in power for v in row):
            return "contracting", k
        power = _matmul(power, mat, fld, mu)
    raise RayTooShort("tail map is neither an automorphism nor contracting below the working precision")


# -- the telescope ---------------------------------------------------------------


def _plain(i: int, label: str) -> str:
    return f"{i}:{label}"


def _qcopy(i: int, label: str) -> str:
    return f"q{i}:{label}"


def build_telescope(ray: ComplexRay, mu=5) -> BanachComplex:
    """Finite model of the completed telescope below ``T^mu``.

    With an automorphism tail the finite telescope of the supplied stages
    already computes the colimit.  With a contracting tail (some power
    vanishes modulo ``T^mu``) the ray is extended by that many tail stages
    and capped by a q-copy of the last stage with zero outgoing map.
    """
    if not ray.stages:
        return BanachComplex([])
    fld = ray.stages[0].field
    kind, k = tail_behaviour(ray, mu)
    stages = list(ray.stages)
    maps = list(ray.maps)
    capped = False
    if kind == "contracting":
        tail = ray.tail_map()
        for _ in range(k):
            maps.append(tail)
            stages.append(ray.stages[-1])
        maps.append({})  # cap: the last q-copy maps to zero
        capped = True
    n = len(stages)
    gens: list[Generator] = []
    diff: dict[tuple[str, str], NovikovElement] = {}
    one = NovikovElement.one(fld)

    def add(src, tgt, val):
        key = (src, tgt)
        diff[key] = diff[key] + val if key in diff else val

    for i, c in enumerate(stages, start=1):
        for g in c.generators:
            gens.append(Generator(_plain(i, g.label), g.degree, g.sector))
        for (s, t), v in c.differential.items():
            add(_plain(i, s), _plain(i, t), v)
    q_stages = n if capped else n - 1
    for i in range(1, q_stages + 1):
        c = stages[i - 1]
        f = maps[i - 1]
        for g in c.generators:
            gens.append(Generator(_qcopy(i, g.label), g.degree - 1, g.sector))
        for (s, t), v in c.differential.items():
            add(_qcopy(i, s), _qcopy(i, t), v)
        for g in c.generators:
            sign = one if g.degree % 2 == 0 else -one
            for (s, t), v in f.items():
                if s == g.label:
                    add(_qcopy(i, s), _plain(i + 1, t), sign * v)
            add(_qcopy(i, g.label), _plain(i, g.label), -sign)
    return BanachComplex(gens, diff, fld, ray.stages[0].table)
