"""Truncated Novikov series over Q or a prime field.

An element is a finite sum ``sum a_i T^{l_i}`` with strictly increasing
symbolic exponents, plus a precision marker: every exponent at or above the
precision is unknown.  Exact elements carry precision ``INF``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Mapping

from .errors import InsufficientPrecision, NovikovDivisionByZero, SchemaError
from .symbols import (
    INF,
    ExponentScalar,
    PeriodSymbolTable,
    as_fraction,
    compare,
    scalar_from_json,
    scalar_to_json,
)

_exp_key = cmp_to_key(compare)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class GroundField:
    """Q (``kind="Q"``) or the prime field F_p (``kind="Fp"``)."""

    kind: str = "Q"
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("Q", "Fp"):
            raise ValueError(f"unknown ground field {self.kind!r}")
        if self.kind == "Fp" and not (isinstance(self.p, int) and _is_prime(self.p)):
            raise ValueError(f"F_p needs a prime p, got {self.p!r}")
        if self.kind == "Q" and self.p is not None:
            raise ValueError("Q takes no characteristic")

    @classmethod
    def rationals(cls) -> "GroundField":
        return cls("Q")

    @classmethod
    def prime(cls, p: int) -> "GroundField":
        return cls("Fp", p)

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == "Fp" else 0

    def __call__(self, value):
        if self.kind == "Q":
            return as_fraction(value)
        q = as_fraction(value)
        if q.denominator % self.p == 0:
            raise ZeroDivisionError(f"{q} has no image in F_{self.p}")
        return q.numerator * pow(q.denominator, -1, self.p) % self.p

    @property
    def zero(self):
        return Fraction(0) if self.kind == "Q" else 0

    @property
    def one(self):
        return Fraction(1) if self.kind == "Q" else 1

    def add(self, a, b):
        return a + b if self.kind == "Q" else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.kind == "Q" else (a - b) % self.p

    def neg(self, a):
        return -a if self.kind == "Q" else (-a) % self.p

    def mul(self, a, b):
        return a * b if self.kind == "Q" else (a * b) % self.p

    def inv(self, a):
        if a == 0:
            raise NovikovDivisionByZero("inverse of zero")
        return 1 / a if self.kind == "Q" else pow(a, -1, self.p)

    def to_json(self) -> dict:
        return {"kind": "Q"} if self.kind == "Q" else {"kind": "Fp", "p": self.p}

    @classmethod
    def from_json(cls, obj, pointer: str = "/field") -> "GroundField":
        if obj is None:
            return cls()
        if isinstance(obj, str):
            obj = {"kind": obj}
        try:
            return cls(obj.get("kind", "Q"), obj.get("p"))
        except (ValueError, AttributeError) as exc:
            raise SchemaError(str(exc), pointer) from exc

    def coeff_to_json(self, a) -> str:
        if self.kind == "Fp":
            return str(a)
        return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"

    def __str__(self):
        return "Q" if self.kind == "Q" else f"F_{self.p}"


QQ = GroundField.rationals()


def _as_exp(e) -> ExponentScalar:
    return e if isinstance(e, ExponentScalar) else ExponentScalar.rational(e)


def _prec_min(a, b):
    return a if compare(a, b) <= 0 else b


class NovikovElement:
    """Immutable truncated Novikov series."""

    __slots__ = ("terms", "precision", "field")

    def __init__(self, terms: Iterable[tuple] = (), precision=INF, field: GroundField = QQ):
        self.field = field
        self.precision = precision if precision is INF or isinstance(precision, ExponentScalar) \
            else (INF if precision == INF else _as_exp(precision))
        acc: dict[ExponentScalar, object] = {}
        for e, c in terms:
            e = _as_exp(e)
            c = field(c) if not _is_field_elt(c, field) else c
            acc[e] = field.add(acc[e], c) if e in acc else c
        kept = [(e, c) for e, c in acc.items() if c != 0
                and (self.precision is INF or compare(e, self.precision) < 0)]
        if all(e.table is None for e, _ in kept):
            kept.sort(key=lambda t: _rational(t[0]))
        else:
            kept.sort(key=lambda t: _exp_key(t[0]))
        self.terms = tuple(kept)

    @classmethod
    def _trusted(cls, terms: tuple, precision, field: GroundField) -> "NovikovElement":
        obj = object.__new__(cls)
        obj.terms = terms
        obj.precision = precision
        obj.field = field
        return obj

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, field: GroundField = QQ, precision=INF) -> "NovikovElement":
        return cls((), precision, field)

    @classmethod
    def one(cls, field: GroundField = QQ) -> "NovikovElement":
        return cls(((ExponentScalar(), field.one),), INF, field)

    @classmethod
    def monomial(cls, exponent, coeff=1, field: GroundField = QQ, precision=INF) -> "NovikovElement":
        return cls(((exponent, coeff),), precision, field)

    @classmethod
    def constant(cls, coeff, field: GroundField = QQ) -> "NovikovElement":
        return cls(((ExponentScalar(), coeff),), INF, field)

    # -- basic properties ---------------------------------------------------

    @property
    def valuation(self):
        if self.terms:
            return self.terms[0][0]
        return self.precision

    @property
    def norm(self) -> float:
        v = self.valuation
        return 0.0 if v is INF else math.exp(-float(v))

    @property
    def is_exact(self) -> bool:
        return self.precision is INF

    @property
    def is_zero(self) -> bool:
        """True when no term is known below the precision (exact zero or unknown tail)."""
        return not self.terms

    @property
    def leading_coeff(self):
        return self.terms[0][1] if self.terms else self.field.zero

    def _check(self, other: "NovikovElement"):
        if self.field != other.field:
            raise ValueError(f"ground field mismatch: {self.field} vs {other.field}")

    def _coerce(self, other) -> "NovikovElement":
        if isinstance(other, NovikovElement):
            self._check(other)
            return other
        return NovikovElement.constant(other, self.field)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return NovikovElement(self.terms + other.terms, _prec_min(self.precision, other.precision), self.field)

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        return NovikovElement(((e, f.neg(c)) for e, c in self.terms), self.precision, f)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        f = self.field
        prec = _prec_min(self.precision + other.valuation if self.precision is not INF else INF,
                         other.precision + self.valuation if other.precision is not INF else INF)
        if not self.terms or not other.terms:
            return NovikovElement((), prec, f)
        if all(e.table is None for e, _ in self.terms) and all(e.table is None for e, _ in other.terms):
            return self._mul_rational(other, prec)
        acc: dict[ExponentScalar, object] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                c = f.mul(c1, c2)
                acc[e] = f.add(acc[e], c) if e in acc else c
        return NovikovElement(acc.items(), prec, f)

    __rmul__ = __mul__

    def _mul_rational(self, other: "NovikovElement", prec) -> "NovikovElement":
        f = self.field
        add, mul = f.add, f.mul
        right = [(_rational(e), c) for e, c in other.terms]
        limit = None if prec is INF else _rational(prec) if prec.table is None else None
        acc: dict = {}
        for e1, c1 in self.terms:
            v1 = _rational(e1)
            for v2, c2 in right:
                v = v1 + v2
                if limit is not None and v >= limit:
                    break
                c = mul(c1, c2)
                acc[v] = add(acc[v], c) if v in acc else c
        if limit is None and prec is not INF:
            return NovikovElement(((ExponentScalar.rational(v), c) for v, c in acc.items()), prec, f)
        terms = tuple((ExponentScalar.rational(v), c) for v, c in sorted(acc.items()) if c != 0)
        return NovikovElement._trusted(terms, prec, f)

    def scale(self, c) -> "NovikovElement":
        f = self.field
        c = f(c) if not _is_field_elt(c, f) else c
        if c == 0:
            return NovikovElement((), self.precision if self.precision is INF else self.precision, f)
        return NovikovElement(((e, f.mul(a, c)) for e, a in self.terms), self.precision, f)

    def shift(self, exponent) -> "NovikovElement":
        """Multiply by ``T**exponent``."""
        exponent = _as_exp(exponent)
        prec = INF if self.precision is INF else self.precision + exponent
        return NovikovElement(((e + exponent, c) for e, c in self.terms), prec, self.field)

    def truncate(self, precision) -> "NovikovElement":
        """Forget everything at or above ``precision``."""
        return NovikovElement(self.terms, _prec_min(self.precision, precision), self.field)

    def truncate_window(self, a, b) -> "NovikovElement":
        """Representative of the class in the window [a, b): terms with a <= exponent < b."""
        a, b = _as_exp(a), _as_exp(b)
        if compare(a, b) >= 0:
            raise ValueError("empty window")
        if compare(b, self.precision) > 0:
            raise InsufficientPrecision(f"window end {b} exceeds precision {self.precision}")
        return NovikovElement([(e, c) for e, c in self.terms if compare(e, a) >= 0], b, self.field)

    def invert(self, target_precision) -> "NovikovElement":
        """Multiplicative inverse, correct below ``target_precision``."""
        if not self.terms:
            raise NovikovDivisionByZero("element is zero below its precision")
        target = _as_exp(target_precision)
        f = self.field
        v, c = self.terms[0]
        c_inv = f.inv(c)
        if self.precision is not INF and compare(self.precision - 2 * v, target) < 0:
            raise InsufficientPrecision(
                f"inverse needs precision {target + 2 * v}, element has {self.precision}")
        # x = c T^v (1 + u) with val(u) > 0; sum the geometric series in the normalised scale
        work = target + v
        u = NovikovElement(((e - v, f.mul(a, c_inv)) for e, a in self.terms[1:]), work, f)
        acc = NovikovElement.one(f).truncate(work)
        power = NovikovElement.one(f).truncate(work)
        neg_u = -u
        while True:
            power = (power * neg_u).truncate(work)
            if not power.terms:
                break
            acc = acc + power
        return acc.shift(-v).scale(c_inv).truncate(target)

    def __truediv__(self, other):
        raise TypeError("use invert(target_precision) for division")

    # -- comparison and display ---------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, NovikovElement):
            try:
                other = NovikovElement.constant(other, self.field)
            except (TypeError, ValueError):
                return NotImplemented
        return (self.field == other.field and self.terms == other.terms
                and compare(self.precision, other.precision) == 0)

    def __hash__(self):
        return hash((self.terms, self.field))

    def agrees_with(self, other: "NovikovElement", precision=None) -> bool:
        """Equality below ``precision`` (default: the common precision)."""
        other = self._coerce(other)
        prec = _prec_min(self.precision, other.precision)
        if precision is not None:
            prec = _prec_min(prec, precision)
        return (self - other).truncate(prec).is_zero

    def to_json(self) -> dict:
        return {
            "terms": [{"exponent": scalar_to_json(e), "coeff": self.field.coeff_to_json(c)} for e, c in self.terms],
            "precision": scalar_to_json(self.precision),
        }

    @classmethod
    def from_json(cls, obj, field: GroundField = QQ, table: PeriodSymbolTable | None = None,
                  pointer: str = "") -> "NovikovElement":
        if isinstance(obj, (int, str)) and not isinstance(obj, bool):
            return cls.constant(obj, field)
        if not isinstance(obj, Mapping):
            raise SchemaError("Novikov element must be an object with terms", pointer)
        terms = []
        for i, t in enumerate(obj.get("terms", [])):
            here = f"{pointer}/terms/{i}"
            if "exponent" not in t:
                raise SchemaError("term needs an exponent", here)
            try:
                coeff = field(t.get("coeff", 1))
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise SchemaError(f"bad coefficient: {exc}", here + "/coeff") from exc
            terms.append((scalar_from_json(t["exponent"], table, here + "/exponent"), coeff))
        prec = scalar_from_json(obj.get("precision", "inf"), table, pointer + "/precision")
        return cls(terms, prec, field)

    def __repr__(self):
        return f"NovikovElement({self})"

    def __str__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for e, c in self.terms:
                if e.is_zero:
                    parts.append(f"{c}")
                else:
                    parts.append(f"{c}*T^({e})" if c != 1 else f"T^({e})")
            body = " + ".join(parts)
        if self.precision is not INF:
            body += f" + O(T^({self.precision}))"
        return body


def _is_field_elt(c, field: GroundField) -> bool:
    if field.kind == "Q":
        return type(c) is Fraction
    return type(c) is int and 0 <= c < field.p


def _rational(e: ExponentScalar) -> Fraction:
    return e.coeffs[0][1] if e.coeffs else Fraction(0)


def T(exponent, coeff=1, field: GroundField = QQ) -> NovikovElement:
    """Shorthand for the monomial ``coeff * T**exponent``."""
    return NovikovElement.monomial(exponent, coeff, field)
