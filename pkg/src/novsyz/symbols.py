"""Exact exponents: finite rational combinations of declared period symbols.

A :class:`PeriodSymbolTable` names the generators of a finitely generated
Q-vector space of real numbers ("1", "sqrt2", "pi", ...).  Each generator
carries a :class:`Witness`, a rational enclosure of its numerical value that
can be halved on demand.  Equality of two :class:`ExponentScalar` values is
symbolic; ordering is decided by refining the enclosures until they separate.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Iterable, Mapping

import mpmath

from .errors import SchemaError, SymbolTableMismatch, UnknownSymbol, UnresolvedComparison

INF = math.inf
UNIT = "1"
DEFAULT_MAX_DEPTH = 400


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        # floats are accepted through their shortest decimal repr, never bitwise
        return Fraction(repr(value))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


class Witness:
    """Shrinking rational enclosure [lo, hi] of one real number.

    ``side(q)`` must return ``1`` if the value is > q, ``-1`` if < q and ``0``
    if it equals q.  It may return ``None`` when it cannot decide, in which
    case the enclosure stops shrinking.
    """

    def __init__(self, lo, hi, side: Callable[[Fraction], int | None] | None = None,
                 description: str = ""):
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo > hi:
            raise ValueError("empty witness interval")
        self._lo, self._hi = lo, hi
        self._side = side
        self._lock = threading.Lock()
        self.description = description

    @classmethod
    def rational(cls, q) -> "Witness":
        q = as_fraction(q)
        return cls(q, q, description=f"exact {q}")

    @classmethod
    def sqrt(cls, radicand) -> "Witness":
        n = as_fraction(radicand)
        if n < 0:
            raise ValueError("negative radicand")
        root = math.isqrt(n.numerator // n.denominator)
        lo, hi = Fraction(root), Fraction(root + 1)

        def side(q: Fraction) -> int:
            if q < 0:
                return 1
            sq = q * q
            return (sq < n) - (sq > n)

        return cls(lo, hi, side, description=f"sqrt({n})")

    @classmethod
    def constant(cls, name: str) -> "Witness":
        """Enclosure of an mpmath constant such as ``pi`` or ``e``."""
        if name not in ("pi", "e", "euler", "ln2", "catalan", "phi"):
            raise ValueError(f"unsupported constant {name!r}")

        def enclose(prec: int):
            with mpmath.workprec(prec):
                v = _mpf_fraction(+getattr(mpmath.mp, name))
            # mpmath constants are accurate to within a few ulp
            err = Fraction(1, 1 << (prec - 8)) * max(1, abs(v))
            return v - err, v + err

        lo, hi = enclose(64)

        def side(q: Fraction) -> int | None:
            for prec in (64, 256, 1024, 4096):
                a, b = enclose(prec)
                if q < a:
                    return 1
                if q > b:
                    return -1
            return None

        return cls(lo, hi, side, description=f"constant {name}")

    @classmethod
    def interval(cls, lo, hi) -> "Witness":
        """Fixed, non-refinable enclosure."""
        return cls(lo, hi, None, description=f"interval [{lo}, {hi}]")

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        with self._lock:
            return self._lo, self._hi

    def refine(self) -> bool:
        """Halve the enclosure.  Returns False when no progress is possible."""
        with self._lock:
            if self._lo == self._hi or self._side is None:
                return False
            mid = (self._lo + self._hi) / 2
            s = self._side(mid)
            if s is None:
                self._side = None
                return False
            if s > 0:
                self._lo = mid
            elif s < 0:
                self._hi = mid
            else:
                self._lo = self._hi = mid
            return True

    def __repr__(self):
        lo, hi = self.bounds
        return f"Witness({self.description or ''} in [{float(lo)}, {float(hi)}])"


def _mpf_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(man) * Fraction(2) ** exp


class PeriodSymbolTable:
    """Declared generators of the exponent group, with numeric witnesses.

    The first symbol is always the rational unit ``"1"``.  Q-linear
    independence of the declared symbols is asserted by the caller through
    ``independence_declared``; it is never verified.
    """

    def __init__(self, independence_declared: bool = True, max_depth: int = DEFAULT_MAX_DEPTH):
        self.symbols: list[str] = [UNIT]
        self.witnesses: dict[str, Witness] = {UNIT: Witness.rational(1)}
        self.declarations: dict[str, dict] = {UNIT: {"name": UNIT, "rational": "1"}}
        self.independence_declared = independence_declared
        self.max_depth = max_depth

    def declare(self, name: str, witness: Witness, decl: dict | None = None) -> "ExponentScalar":
        if name in self.witnesses:
            raise ValueError(f"symbol {name!r} already declared")
        if not name or name[0].isdigit() or any(ch in name for ch in " +-*/"):
            raise ValueError(f"invalid symbol name {name!r}")
        self.symbols.append(name)
        self.witnesses[name] = witness
        self.declarations[name] = decl or {"name": name}
        return self.symbol(name)

    def declare_sqrt(self, name: str, radicand) -> "ExponentScalar":
        return self.declare(name, Witness.sqrt(radicand), {"name": name, "sqrt": str(as_fraction(radicand))})

    def declare_constant(self, name: str, constant: str) -> "ExponentScalar":
        return self.declare(name, Witness.constant(constant), {"name": name, "constant": constant})

    def declare_interval(self, name: str, lo, hi) -> "ExponentScalar":
        return self.declare(name, Witness.interval(lo, hi),
                            {"name": name, "interval": [str(as_fraction(lo)), str(as_fraction(hi))]})

    def symbol(self, name: str) -> "ExponentScalar":
        if name not in self.witnesses:
            raise UnknownSymbol(name)
        if name == UNIT:
            return ExponentScalar.rational(1)
        return ExponentScalar({name: Fraction(1)}, self)

    def scalar(self, value) -> "ExponentScalar":
        """Build a scalar from a rational, a ``{symbol: coefficient}`` map or a scalar."""
        if isinstance(value, ExponentScalar):
            return value
        if isinstance(value, Mapping):
            coeffs = {}
            for k, v in value.items():
                if k not in self.witnesses:
                    raise UnknownSymbol(k)
                coeffs[k] = as_fraction(v)
            return ExponentScalar(coeffs, self)
        return ExponentScalar.rational(value)

    def __contains__(self, name):
        return name in self.witnesses

    def to_json(self) -> list[dict]:
        return [self.declarations[s] for s in self.symbols if s != UNIT]

    @classmethod
    def from_json(cls, entries: Iterable[Mapping] | None, pointer: str = "/symbols") -> "PeriodSymbolTable":
        table = cls()
        for i, entry in enumerate(entries or []):
            here = f"{pointer}/{i}"
            if not isinstance(entry, Mapping) or "name" not in entry:
                raise SchemaError("symbol declaration needs a name", here)
            name = entry["name"]
            try:
                if "sqrt" in entry:
                    table.declare_sqrt(name, entry["sqrt"])
                elif "constant" in entry:
                    table.declare_constant(name, entry["constant"])
                elif "interval" in entry:
                    lo, hi = entry["interval"]
                    table.declare_interval(name, lo, hi)
                else:
                    raise SchemaError("symbol needs one of sqrt/constant/interval", here)
            except (ValueError, TypeError) as exc:
                raise SchemaError(str(exc), here) from exc
        return table

    # -- ordering -----------------------------------------------------------

    def enclosure(self, x: "ExponentScalar") -> tuple[Fraction, Fraction]:
        lo = hi = Fraction(0)
        for name, c in x.coeffs:
            a, b = self.witnesses[name].bounds
            if c > 0:
                lo += c * a
                hi += c * b
            else:
                lo += c * b
                hi += c * a
        return lo, hi

    def sign(self, x: "ExponentScalar") -> int:
        if not x.coeffs:
            return 0
        if x.is_rational:
            return 1 if x.coeffs[0][1] > 0 else -1
        names = [n for n, _ in x.coeffs if n != UNIT]
        for _ in range(self.max_depth):
            lo, hi = self.enclosure(x)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            progressed = [self.witnesses[n].refine() for n in names]
            if not any(progressed):
                break
        raise UnresolvedComparison(f"cannot decide the sign of {x}")

    def compare(self, a, b) -> int:
        """-1, 0 or 1 according as a < b, a == b, a > b."""
        return _compare(a, b)


def _common_table(a, b):
    ta, tb = a.table, b.table
    if ta is None:
        return tb
    if tb is None or ta is tb:
        return ta
    raise SymbolTableMismatch("scalars belong to different symbol tables")


@total_ordering
class ExponentScalar:
    """Element of the Q-span of the declared symbols (an exponent or action)."""

    __slots__ = ("coeffs", "table", "_hash")

    def __init__(self, coeffs: Mapping[str, Fraction] | None = None, table: PeriodSymbolTable | None = None):
        items = tuple(sorted((k, as_fraction(v)) for k, v in (coeffs or {}).items() if v != 0))
        if table is None and any(k != UNIT for k, _ in items):
            raise UnknownSymbol("irrational symbols require a symbol table")
        if table is not None and all(k == UNIT for k, _ in items):
            table = None
        self.coeffs = items
        self.table = table
        self._hash = None

    @classmethod
    def rational(cls, q) -> "ExponentScalar":
        return cls._raw(((UNIT, as_fraction(q)),) if q != 0 else (), None)

    @classmethod
    def _raw(cls, items: tuple, table) -> "ExponentScalar":
        # trusted constructor: items sorted, nonzero, table already normalised
        obj = object.__new__(cls)
        obj.coeffs = items
        obj.table = table
        obj._hash = None
        return obj

    @property
    def is_rational(self) -> bool:
        return all(k == UNIT for k, _ in self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def rational_value(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0][1] if self.coeffs else Fraction(0)

    def coeff(self, name: str) -> Fraction:
        for k, v in self.coeffs:
            if k == name:
                return v
        return Fraction(0)

    def _wrap(self, other) -> "ExponentScalar":
        if isinstance(other, ExponentScalar):
            return other
        return ExponentScalar.rational(other)

    def __add__(self, other):
        if other is INF or (isinstance(other, float) and other == INF):
            return INF
        other = self._wrap(other)
        if self.table is None and other.table is None:
            v = (self.coeffs[0][1] if self.coeffs else 0) + (other.coeffs[0][1] if other.coeffs else 0)
            return ExponentScalar._raw(((UNIT, v),) if v else (), None)
        table = _common_table(self, other)
        out = dict(self.coeffs)
        for k, v in other.coeffs:
            out[k] = out.get(k, 0) + v
        return ExponentScalar(out, table)

    __radd__ = __add__

    def __neg__(self):
        return ExponentScalar({k: -v for k, v in self.coeffs}, self.table)

    def __sub__(self, other):
        if isinstance(other, float) and other == INF:
            raise ValueError("finite minus infinity")
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, q):
        if isinstance(q, ExponentScalar):
            if q.is_rational:
                q = q.rational_value()
            elif self.is_rational:
                return q * self.rational_value()
            else:
                raise TypeError("product of two irrational exponents is outside the declared span")
        q = as_fraction(q)
        return ExponentScalar({k: v * q for k, v in self.coeffs}, self.table)

    __rmul__ = __mul__

    def __truediv__(self, q):
        return self * (1 / as_fraction(q))

    def __eq__(self, other):
        if isinstance(other, float) and math.isinf(other):
            return False
        if not isinstance(other, ExponentScalar):
            try:
                other = ExponentScalar.rational(other)
            except TypeError:
                return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def __lt__(self, other):
        return _compare(self, other) < 0

    def sign(self) -> int:
        if self.table is None:
            return 0 if not self.coeffs else (1 if self.coeffs[0][1] > 0 else -1)
        return self.table.sign(self)

    def enclosure(self) -> tuple[Fraction, Fraction]:
        if self.table is None:
            v = self.rational_value()
            return v, v
        return self.table.enclosure(self)

    def __float__(self):
        if self.table is None:
            return float(self.rational_value())
        names = [n for n, _ in self.coeffs if n != UNIT]
        for _ in range(60):
            lo, hi = self.enclosure()
            if hi - lo < Fraction(1, 1 << 52) * max(1, abs(lo)):
                break
            if not any(self.table.witnesses[n].refine() for n in names):
                break
        lo, hi = self.enclosure()
        return float((lo + hi) / 2)

    def to_json(self) -> dict:
        if not self.coeffs:
            return {UNIT: "0"}
        return {k: _frac_str(v) for k, v in self.coeffs}

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, v in self.coeffs:
            if k == UNIT:
                parts.append(str(v))
            elif v == 1:
                parts.append(k)
            elif v == -1:
                parts.append(f"-{k}")
            else:
                parts.append(f"{v}*{k}")
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return f"ExponentScalar({self})"


ZERO = ExponentScalar()


def _frac_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x) and x > 0


def _compare(a, b) -> int:
    if _is_inf(a):
        return 0 if _is_inf(b) else 1
    if _is_inf(b):
        return -1
    if not isinstance(a, ExponentScalar):
        a = ExponentScalar.rational(a)
    if not isinstance(b, ExponentScalar):
        b = ExponentScalar.rational(b)
    if a.table is None and b.table is None:
        va = a.coeffs[0][1] if a.coeffs else 0
        vb = b.coeffs[0][1] if b.coeffs else 0
        return (va > vb) - (va < vb)
    _common_table(a, b)
    d = a - b
    if d.table is None:
        if not d.coeffs:
            return 0
        return 1 if d.coeffs[0][1] > 0 else -1
    return d.table.sign(d)


def compare(a, b) -> int:
    """Three-way comparison of scalars (or ``INF``)."""
    return _compare(a, b)


def smin(*xs):
    xs = xs[0] if len(xs) == 1 and not isinstance(xs[0], ExponentScalar) else xs
    best = None
    for x in xs:
        if best is None or _compare(x, best) < 0:
            best = x
    return best


def smax(*xs):
    xs = xs[0] if len(xs) == 1 and not isinstance(xs[0], ExponentScalar) else xs
    best = None
    for x in xs:
        if best is None or _compare(x, best) > 0:
            best = x
    return best


def scalar_from_json(value, table: PeriodSymbolTable | None, pointer: str = "") -> ExponentScalar | float:
    if value == "inf" or value == "+inf":
        return INF
    try:
        if isinstance(value, Mapping):
            if table is None:
                table = PeriodSymbolTable()
            return table.scalar(value)
        return ExponentScalar.rational(value)
    except UnknownSymbol:
        raise
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad scalar {value!r}: {exc}", pointer) from exc


def scalar_to_json(x):
    if _is_inf(x):
        return "inf"
    if not isinstance(x, ExponentScalar):
        x = ExponentScalar.rational(x)
    return x.to_json()
