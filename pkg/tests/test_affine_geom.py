import random
from fractions import Fraction

import pytest

from novsyz.affine_geom import (
    AffinePolygon,
    Eigenray,
    EigenrayDiagram,
    Face,
    characteristic_limit,
    check_admissible_inclusion,
    pair,
    point,
    point_in_polygon,
    support_value,
    validate_polygon,
)
from novsyz.errors import NotContained, SchemaError
from novsyz.examples import (
    l_shape,
    l_shape_cover,
    node_polygon,
    pentagon,
    pentagon_left_piece,
    pentagon_right_piece,
    rect,
    square,
    top_strip,
)
from novsyz.symbols import ExponentScalar, compare

HALF = Fraction(1, 2)


def S(x):
    return ExponentScalar.rational(x)


def test_unit_square_report():
    P = AffinePolygon([(0, 0), (1, 0), (1, 1), (0, 1)], (HALF, HALF))
    rep = validate_polygon(P)
    assert rep["convexity"].passed and rep["delzant"].passed
    assert not rep["irrationality"].passed
    assert [str(c) for c in P.actions] == ["1/2"] * 4


def test_triangle_not_delzant():
    P = AffinePolygon([(0, 0), (1, 0), (0, 2)], (Fraction(1, 4), Fraction(1, 4)))
    rep = validate_polygon(P)
    assert rep["convexity"].passed
    assert not rep["delzant"].passed
    assert P.vertex_conormals(1) == ((0, -1), (2, 1))
    assert "= 2" in rep["delzant"].details[0]


def test_rect_all_checks_pass():
    R = rect()
    rep = validate_polygon(R)
    assert all(c.passed for c in rep.checks)
    s2, s3, s5 = (R.table.symbol(f"sqrt{n}") for n in (2, 3, 5))
    bottom, right, top, left = R.actions
    assert (right, top, left, bottom) == (s2, s5, S(1), s3)


def test_rect_support_values():
    R = rect()
    s2, s5 = R.table.symbol("sqrt2"), R.table.symbol("sqrt5")
    assert support_value(R, (0, 0)) == (S(0), Face("polygon"))
    val, face = support_value(R, (1, 0))
    assert val == s2 and face == Face("edge", 2)
    val, face = support_value(R, (2, 3))
    assert val == s2 * 2 + s5 * 3
    assert face.kind == "vertex" and face.point == (s2, s5)


def test_characteristic_limits():
    R = rect()
    s2, s5 = R.table.symbol("sqrt2"), R.table.symbol("sqrt5")
    assert characteristic_limit(R, (1, 0)) == Face("edge", 2)
    face = characteristic_limit(R, (1, 1))
    assert face.kind == "vertex" and face.point == (s2, s5)
    with pytest.raises(ValueError):
        characteristic_limit(R, (0, 0))


@pytest.mark.parametrize("P", [rect(), square(), pentagon()], ids=["rect", "square", "pentagon"])
def test_conormal_support_is_action(P):
    for e in P.edges:
        val, face = support_value(P, e.conormal)
        assert val == e.action
        assert face == Face("edge", e.index)


def _random_covector(rng):
    return (rng.randint(-5, 5), rng.randint(-5, 5))


def test_support_sublinear():
    rng = random.Random(7)
    for P in (rect(), pentagon()):
        for _ in range(200):
            x, y = _random_covector(rng), _random_covector(rng)
            hx, hy = support_value(P, x)[0], support_value(P, y)[0]
            hxy = support_value(P, (x[0] + y[0], x[1] + y[1]))[0]
            assert compare(hxy, hx + hy) <= 0
            shared = any(
                compare(pair(x, v), max((pair(x, w) for w in P.corners), key=float)) == 0
                and compare(pair(y, v), max((pair(y, w) for w in P.corners), key=float)) == 0
                for v in P.corners
            )
            assert (compare(hxy, hx + hy) == 0) == shared


def test_center_translation():
    rng = random.Random(3)
    R = rect()
    for _ in range(50):
        w = (Fraction(rng.randint(-4, 4), 5), Fraction(rng.randint(-4, 4), 5))
        moved = R.with_center((R.center[0] + w[0], R.center[1] + w[1]))
        for _ in range(5):
            x = _random_covector(rng)
            assert support_value(moved, x)[0] == support_value(R, x)[0] - pair(x, point(*w))
        positive = all(c.sign() > 0 for c in moved.actions)
        assert validate_polygon(moved)["positive_actions"].passed == positive


def test_delzant_affine_invariance():
    rng = random.Random(11)
    mats = [((1, 1), (0, 1)), ((1, 0), (-2, 1)), ((2, 1), (1, 1)), ((0, -1), (1, 0))]
    tri = AffinePolygon([(0, 0), (1, 0), (0, 2)], (Fraction(1, 4), Fraction(1, 4)))
    for P in (rect(), square(), tri, pentagon()):
        verdict = validate_polygon(P)["delzant"].passed
        for _ in range(5):
            A = rng.choice(mats)
            b = (rng.randint(-3, 3), Fraction(rng.randint(-3, 3), 2))
            assert validate_polygon(P.transformed(A, b))["delzant"].passed == verdict


def test_strip_inclusion():
    P, Q = square(), top_strip(Fraction(1, 3))
    inc = check_admissible_inclusion(Q, P)
    assert inc.admissible
    assert sorted(inc.common_edges) == [(2, 2), (3, 3), (4, 4)]
    assert sorted(inc.common_vertices) == sorted([point(1, 1), point(-1, 1)])


def test_pentagon_inclusions():
    P = pentagon()
    assert validate_polygon(P)["convexity"].passed
    assert check_admissible_inclusion(pentagon_left_piece(), P).admissible
    right = check_admissible_inclusion(pentagon_right_piece(), P)
    assert not right.admissible
    assert "vertex" in right.reason


def test_l_shape_pieces_are_inadmissible():
    L = l_shape()
    for Q in l_shape_cover():
        inc = check_admissible_inclusion(Q, L)
        assert not inc.admissible
        assert "partially" in inc.reason


def test_isolated_touch_point():
    P = square()
    Q = AffinePolygon([(0, -1), (HALF, 0), (0, HALF), (-HALF, 0)], (0, 0))
    inc = check_admissible_inclusion(Q, P)
    assert not inc.admissible and inc.touch_points == [point(0, -1)]


def test_not_contained():
    with pytest.raises(NotContained):
        check_admissible_inclusion(square(2), square(1))


def test_inclusion_transitive_on_strips():
    R, P, Q = square(), top_strip(1), top_strip(HALF)
    assert check_admissible_inclusion(P, R).admissible
    assert check_admissible_inclusion(Q, P).admissible
    assert check_admissible_inclusion(Q, R).admissible


def test_self_inclusion_admissible():
    R = rect()
    assert check_admissible_inclusion(R, R).admissible


def test_node_polygon_merges_kinked_edge():
    P = node_polygon()
    assert len(P) == 4 and not P.is_regular
    top = P.edge(3)
    assert top.kinked
    assert (top.conormal_start, top.conormal_end) == ((0, 1), (1, 1))
    rep = validate_polygon(P)
    assert rep["convexity"].passed and rep["delzant"].passed and rep["singular_points"].passed
    assert [str(c) for c in P.actions] == ["1"] * 4
    with pytest.raises(ValueError):
        support_value(P, (1, 0))


def test_kink_against_monodromy_reported():
    D = EigenrayDiagram([Eigenray(point(0, 0), (0, 1), 2)])
    P = AffinePolygon([(-1, -1), (1, -1), (1, 1), (0, 1), (-1, 2)], (0, 0), D)
    assert not validate_polygon(P)["convexity"].passed


def test_node_on_boundary_rejected():
    D = EigenrayDiagram([Eigenray(point(1, 0), (-1, 0), 1)])
    rep = validate_polygon(square(), D)
    assert not rep["singular_points"].passed


def test_non_concurrent_rays_rejected():
    rays = [Eigenray(point(0, 0), (0, 1), 1), Eigenray(point(HALF, 0), (0, 1), 1),
            Eigenray(point(0, HALF), (1, 0), 1)]
    P = AffinePolygon([(-3, -3), (3, -3), (3, 3), (-3, 3)], (Fraction(1, 7), Fraction(-1, 3)),
                      EigenrayDiagram(rays))
    rep = validate_polygon(P)
    assert any("concurrent" in d for d in rep["singular_points"].details)


def test_point_in_polygon_nonconvex():
    L = l_shape()
    assert point_in_polygon(point(HALF, HALF), L)
    assert not point_in_polygon(point(Fraction(3, 2), Fraction(3, 2)), L)
    assert point_in_polygon(point(2, HALF), L)
    assert not point_in_polygon(point(2, HALF), L, strict=True)


def test_polygon_json_roundtrip():
    for P in (rect(), node_polygon(), square()):
        back = AffinePolygon.from_json(P.to_json())
        assert back.to_json() == P.to_json()
        assert back.actions == P.actions


def test_polygon_json_errors():
    with pytest.raises(SchemaError) as err:
        AffinePolygon.from_json({"vertices": [[0, 0], [1, 0]], "center": [0, 0]})
    assert err.value.pointer == "/vertices"
    with pytest.raises(SchemaError):
        AffinePolygon.from_json({"vertices": [[0, 0], [1, 0], [0, 1]]})
