from fractions import Fraction

import pytest

from novsyz.affine_geom import AffinePolygon
from novsyz.errors import DegenerateProfile
from novsyz.examples import node_polygon, rect, square
from novsyz.smoothing import nested, smooth_polygon

UNIT = AffinePolygon([(0, 0), (1, 0), (1, 1), (0, 1)], (Fraction(1, 2), Fraction(1, 2)))


def test_zero_parameter_is_polygon():
    P0 = smooth_polygon(UNIT, 0)
    for x, y in P0.boundary(64):
        assert min(x, y, 1 - x, 1 - y) == pytest.approx(0, abs=1e-12)


def test_unit_square_half_strictly_inside():
    Ps = smooth_polygon(UNIT, Fraction(1, 2))
    pts = Ps.boundary(720)
    gaps = [min(x, y, 1 - x, 1 - y) for x, y in pts]
    assert min(gaps) > 0
    # far from the edge midpoints the boundary is pulled well inside
    corner_gap = min(g for (x, y), g in zip(pts, gaps) if abs(x - 0.5) > 0.3 and abs(y - 0.5) > 0.3)
    mid_gap = min(g for (x, y), g in zip(pts, gaps) if abs(x - 0.5) < 0.02 or abs(y - 0.5) < 0.02)
    assert mid_gap < corner_gap
    assert Ps.is_strictly_convex()


def test_nesting_quarter_half():
    a, b = smooth_polygon(UNIT, Fraction(1, 4)), smooth_polygon(UNIT, Fraction(1, 2))
    assert nested(b, a)
    assert not nested(a, b)
    assert a.is_strictly_convex() and b.is_strictly_convex()
    assert nested(a, smooth_polygon(UNIT, 0))


def test_argmax_converges_to_right_edge():
    R = rect()
    right = float(R.table.symbol("sqrt2"))
    errs = [right - smooth_polygon(R, s).argmax((1, 0), 1440)[0] for s in (0.2, 0.05, 0.01)]
    assert all(e >= -1e-12 for e in errs)
    assert errs[-1] < 1e-6
    assert errs[0] >= errs[-1]


def test_decoupled_mode():
    a = smooth_polygon(square(), 0.3, mode="decoupled", tau=0.05)
    b = smooth_polygon(square(), 0.1, mode="decoupled", tau=0.05)
    assert nested(a, b) and a.is_strictly_convex()
    with pytest.raises(ValueError):
        smooth_polygon(square(), 0.3, mode="decoupled")


def test_degenerate_profile():
    with pytest.raises(DegenerateProfile):
        smooth_polygon(UNIT, 0.5, profiles=[1, 1, 0, 1])
    with pytest.raises(DegenerateProfile):
        smooth_polygon(UNIT, 0.5, profiles=[lambda t: 0.0] * 4)


def test_custom_profiles_and_rejections():
    Ps = smooth_polygon(UNIT, 0.25, profiles=[lambda t: t * (1 - t)] * 4)
    assert Ps.is_strictly_convex()
    with pytest.raises(ValueError):
        smooth_polygon(node_polygon(), 0.1)
    with pytest.raises(ValueError):
        smooth_polygon(UNIT, 0.1, profiles=[1, 1])
