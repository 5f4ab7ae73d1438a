"""Reading input documents and writing canonical JSON."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .affine_geom import AffinePolygon
from .errors import IOFailure, SchemaError
from .filtered_complex import BanachComplex
from .symbols import PeriodSymbolTable
from .telescope import ComplexRay
from .tropical import CoverPiece

KINDS = ("polygon", "inclusion", "cover", "complex", "ray")


@dataclass
class Document:
    kind: str
    raw: dict
    table: PeriodSymbolTable
    value: Any

    def to_json(self) -> dict:
        return serialize(self)


def canonical_json(obj, indent: int | None = 2) -> str:
    return json.dumps(obj, sort_keys=True, indent=indent, ensure_ascii=False, separators=None if indent else (",", ":"))


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj, None).encode()).hexdigest()


def load_json(source: str) -> dict:
    """Parse inline JSON (starting with '{') or read a file."""
    text = source.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid inline JSON: {exc.msg}", "") from exc
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise IOFailure(f"cannot read {source}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {os.path.basename(source)}: {exc.msg} (line {exc.lineno})", "") from exc


def detect_kind(obj: Mapping) -> str:
    if "kind" in obj:
        if obj["kind"] not in KINDS:
            raise SchemaError(f"unknown kind {obj['kind']!r}", "/kind")
        return obj["kind"]
    for key, kind in (("vertices", "polygon"), ("ambient", "inclusion"), ("cover", "cover"),
                      ("stages", "ray"), ("generators", "complex")):
        if key in obj:
            return kind
    raise SchemaError("cannot tell what this document describes", "")


def _bools(value, pointer) -> tuple[bool, ...]:
    if value is None:
        return (True, True, True)
    if not isinstance(value, list) or not all(isinstance(v, bool) for v in value):
        raise SchemaError("flags must be a list of booleans per degree", pointer)
    return tuple(value)


def parse_document(obj: Mapping) -> Document:
    """Typed objects from a document; the symbol table is built before any numeric field."""
    if not isinstance(obj, Mapping):
        raise SchemaError("document must be a JSON object", "")
    kind = detect_kind(obj)
    table = PeriodSymbolTable.from_json(obj.get("symbols"), "/symbols")
    if kind == "polygon":
        value = AffinePolygon.from_json(obj, table, "")
    elif kind == "complex":
        value = BanachComplex.from_json(obj, table, "")
    elif kind == "ray":
        value = ComplexRay.from_json(obj, table, "")
    elif kind == "inclusion":
        for key in ("ambient", "sub"):
            if key not in obj:
                raise SchemaError(f"inclusion needs {key!r}", f"/{key}")
        value = (AffinePolygon.from_json(obj["ambient"], table, "/ambient"),
                 AffinePolygon.from_json(obj["sub"], table, "/sub"))
    else:
        if "polygon" not in obj or not isinstance(obj.get("cover"), list):
            raise SchemaError("cover document needs 'polygon' and a 'cover' list", "")
        P = AffinePolygon.from_json(obj["polygon"], table, "/polygon")
        pieces = []
        for i, item in enumerate(obj["cover"]):
            here = f"/cover/{i}"
            if not isinstance(item, Mapping) or "polygon" not in item:
                raise SchemaError("cover piece needs a polygon", here)
            pieces.append(CoverPiece(AffinePolygon.from_json(item["polygon"], table, here + "/polygon"),
                                     _bools(item.get("torsion_free"), here + "/torsion_free"),
                                     _bools(item.get("h_injective"), here + "/h_injective")))
        value = (P, pieces)
    return Document(kind, dict(obj), table, value)


def parse_input(source: str) -> Document:
    return parse_document(load_json(source))


def _strip_symbols(d: dict) -> dict:
    d = dict(d)
    d.pop("symbols", None)
    return d


def serialize(doc: Document) -> dict:
    """Inverse of :func:`parse_document` (up to key order and number formatting)."""
    out: dict = {"kind": doc.kind}
    symbols = doc.table.to_json()
    if symbols:
        out["symbols"] = symbols
    v = doc.value
    if doc.kind in ("polygon", "complex", "ray"):
        out.update(_strip_symbols(v.to_json()))
    elif doc.kind == "inclusion":
        out["ambient"] = _strip_symbols(v[0].to_json())
        out["sub"] = _strip_symbols(v[1].to_json())
    else:
        P, pieces = v
        out["polygon"] = _strip_symbols(P.to_json())
        out["cover"] = [{"polygon": _strip_symbols(p.polygon.to_json()), "torsion_free": list(p.torsion_free),
                         "h_injective": list(p.h_injective)} for p in pieces]
    return out


def write_text(path: str, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror}") from exc
