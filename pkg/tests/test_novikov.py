from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from novsyz.errors import InsufficientPrecision, NovikovDivisionByZero, UnresolvedComparison
from novsyz.novikov import GroundField, NovikovElement, T
from novsyz.symbols import INF, ExponentScalar, PeriodSymbolTable, Witness, compare

F2 = GroundField.prime(2)
QQ = GroundField.rationals()


@pytest.fixture
def table():
    t = PeriodSymbolTable()
    t.declare_sqrt("sqrt2", 2)
    t.declare_sqrt("sqrt3", 3)
    t.declare_constant("pi", "pi")
    return t


def test_compare_symbolic_cancellation(table):
    r2 = table.symbol("sqrt2")
    assert compare(2 * r2 - r2, r2) == 0


def test_compare_sqrt2_below_three_halves(table):
    assert compare(table.symbol("sqrt2"), F(3, 2)) < 0


def test_compare_sum_of_roots_above_pi(table):
    assert compare(table.symbol("sqrt2") + table.symbol("sqrt3"), table.symbol("pi")) > 0


def test_compare_gives_up_on_coarse_witness():
    t = PeriodSymbolTable()
    t.declare_interval("a", 1, 2)
    t.declare_interval("b", 1, 2)
    with pytest.raises(UnresolvedComparison):
        compare(t.symbol("a"), t.symbol("b"))


def test_add_cancellation():
    half = F(1, 2)
    assert (T(0) + T(half)) + (-T(half)) == T(0)


def test_add_irrational_valuation(table):
    r2, r3 = table.symbol("sqrt2"), table.symbol("sqrt3")
    x = T(r2) + T(r3)
    assert len(x.terms) == 2 and x.valuation == r2


def test_add_absorbs_into_unknown_tail():
    x = NovikovElement.constant(1).truncate(1) + T(F(3, 2))
    assert x.terms == T(0).terms and x.precision == 1


def test_mul_examples(table):
    half = F(1, 2)
    assert (T(0) + T(half)) * (T(0) - T(half)) == T(0) - T(1)
    r2 = table.symbol("sqrt2")
    assert T(r2) * T(1 - r2) == T(1)
    a = T(0, field=F2) + T(F(3, 10), field=F2)
    assert a * a == T(0, field=F2) + T(F(3, 5), field=F2)


def test_mul_precision_rule():
    x = (T(0) + T(F(1, 2))).truncate(2)
    y = T(1).truncate(3)
    assert (x * y).precision == 3


def test_truncate_window_examples(table):
    x = T(F(1, 10), 3) + T(F(9, 10), 5) + T(F(6, 5))
    assert x.truncate_window(0, 1) == (T(F(1, 10), 3) + T(F(9, 10), 5)).truncate(1)
    r2 = table.symbol("sqrt2")
    w = (T(0) + T(r2)).truncate_window(r2, r2 + 1)
    assert w.terms == T(r2).terms and w.precision == r2 + 1
    z = T(F(1, 2)).truncate_window(F(3, 5), F(9, 10))
    assert z.is_zero and z.precision == F(9, 10)


def test_truncate_window_needs_precision():
    with pytest.raises(InsufficientPrecision):
        T(0).truncate(1).truncate_window(0, 2)


def test_invert_examples(table):
    inv = (T(0) + T(F(3, 10))).invert(1)
    expected = T(0) - T(F(3, 10)) + T(F(3, 5)) - T(F(9, 10))
    assert inv == expected.truncate(1)
    r2 = table.symbol("sqrt2")
    assert T(r2).invert(5).terms == T(-r2).terms
    assert NovikovElement.constant(2).invert(3).terms == NovikovElement.constant(F(1, 2)).terms


def test_invert_errors():
    with pytest.raises(NovikovDivisionByZero):
        NovikovElement.zero().invert(1)
    with pytest.raises(ZeroDivisionError):
        NovikovElement.zero().invert(1)
    with pytest.raises(InsufficientPrecision):
        (T(F(1, 2)) + T(1)).truncate(F(3, 2)).invert(1)


def test_json_roundtrip(table):
    x = (T(table.symbol("sqrt2"), F(-2, 3)) + T(F(1, 5))).truncate(4)
    assert NovikovElement.from_json(x.to_json(), QQ, table) == x


# random elements with exponents in (1/10)Z, small coefficients
def elements(field):
    term = st.tuples(st.integers(0, 20).map(lambda k: F(k, 10)),
                     st.integers(-3, 3) if field.kind == "Q" else st.integers(0, 1))
    return st.builds(lambda ts, p: NovikovElement(ts, F(p, 10) if p < 40 else INF, field),
                     st.lists(term, max_size=5), st.integers(15, 40))


fields = st.sampled_from([QQ, F2, GroundField.prime(5)])


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_ring_axioms(data):
    f = data.draw(fields)
    x, y, z = (data.draw(elements(f)) for _ in range(3))
    assert ((x * y) * z).agrees_with(x * (y * z))
    assert (x * (y + z)).agrees_with(x * y + x * z)
    assert (x * y).agrees_with(y * x)
    assert (x + y) == (y + x)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_valuation_additive_and_ultrametric(data):
    f = data.draw(fields)
    x, y = data.draw(elements(f)), data.draw(elements(f))
    if x.terms and y.terms:
        assert (x * y).valuation == x.valuation + y.valuation
    s = x + y
    assert s.norm <= max(x.norm, y.norm) + 1e-12
    if x.terms and y.terms and x.valuation != y.valuation:
        assert s.norm == pytest.approx(max(x.norm, y.norm))


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_window_nesting(data):
    x = NovikovElement(data.draw(elements(QQ)).terms).truncate(3)
    a = F(data.draw(st.integers(0, 10)), 10)
    b2 = F(data.draw(st.integers(11, 20)), 10)
    b1 = F(data.draw(st.integers(21, 30)), 10)
    assert x.truncate_window(a, b1).truncate_window(a, b2) == x.truncate_window(a, b2)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_inverse_of_unit(data):
    f = data.draw(fields)
    x = data.draw(elements(f))
    x = NovikovElement(((0, 1),) + tuple((e, c) for e, c in x.terms if e > 0), INF, f)
    mu = 2
    err = x * x.invert(mu) - 1
    assert compare(err.valuation, mu) >= 0
