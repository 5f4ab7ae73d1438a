import random
import warnings
from fractions import Fraction as F

import numpy as np
import pytest

from novsyz.affine_geom import AffinePolygon, check_admissible_inclusion, support_value
from novsyz.errors import GapViolation, InjectivityHypothesisUnchecked, NotAdmissible, NotParallelCut
from novsyz.examples import (
    delzant_triangle,
    hexagon,
    l_shape,
    l_shape_cover,
    node_polygon,
    pentagon,
    pentagon_right_piece,
    rect,
    rect_right_strip,
    square,
    square_strips,
    top_strip,
)
from novsyz.symbols import ExponentScalar, compare
from novsyz.tropical import (
    UNDEFINED,
    ZERO_ELEMENT,
    CoverPiece,
    LeadingProduct,
    UnknownTail,
    build_fan,
    e1_page,
    laurent_check,
    leading_product,
    partial_add,
    period_spectrum,
    restriction_map,
    rh_module,
    stanley_reisner_presentation,
    torsion_criterion,
)

from oracles import lattice_count, random_delzant_polygon

UNIT = AffinePolygon([(0, 0), (1, 0), (1, 1), (0, 1)], (F(1, 2), F(1, 2)))


def S(x):
    return ExponentScalar.rational(x)


# -- fan -------------------------------------------------------------------------


def test_square_fan_covers_lattice_once():
    fan = build_fan(square())
    assert [tuple(r["conormal"]) for r in fan.to_json()["rays"]] == [(0, -1), (1, 0), (0, 1), (-1, 0)]
    seen = set()
    for m in range(-20, 21):
        for n in range(-20, 21):
            x = fan.element((m, n))
            assert fan.vector(x) == (m, n)
            seen.add(x)
    assert len(seen) == 41 * 41


def test_triangle_fan():
    fan = build_fan(delzant_triangle())
    assert [tuple(b[0]) for b in fan.cone_bases] == [(0, -1), (1, 1), (-1, 0)]
    for m in range(-20, 21):
        for n in range(-20, 21):
            assert fan.vector(fan.element((m, n))) == (m, n)


def test_non_delzant_fan_rejected():
    with pytest.raises(ValueError):
        build_fan(AffinePolygon([(0, 0), (1, 0), (0, 2)], (F(1, 4), F(1, 4))))


def test_node_fan_is_glued_by_the_shear():
    fan = build_fan(node_polygon())
    assert not fan.regular
    assert fan.cone_bases[1] == ((1, 0), (0, 1))
    assert fan.cone_bases[2] == ((1, 1), (-1, 0))
    with pytest.raises(ValueError):
        fan.vector(fan.ray(1))
    # coordinates stay well defined per cone
    x = fan.normalize(3, 2, 1)
    assert fan.coords_in(x, 3) == (2, 1)
    assert fan.local_vector(x, 3) == (1, 2)


def test_partial_add_examples():
    fan = build_fan(square())
    e1, e2 = fan.element((1, 0)), fan.element((0, 1))
    assert partial_add(fan, e1, e2) == fan.element((1, 1))
    assert partial_add(fan, e1, fan.element((-1, 0))) is UNDEFINED
    assert partial_add(fan, fan.element((2, 0)), fan.element((3, 0))) == fan.element((5, 0))
    assert partial_add(fan, ZERO_ELEMENT, e1) == e1


def test_partial_add_laws_in_cones():
    rng = random.Random(5)
    for P in (square(), hexagon(), node_polygon()):
        fan = build_fan(P)
        for _ in range(300):
            j = rng.randint(1, fan.size)
            xs = [fan.normalize(j, rng.randint(0, 4), rng.randint(0, 4)) for _ in range(3)]
            x, y, z = xs
            assert partial_add(fan, x, y) == partial_add(fan, y, x)
            assert partial_add(fan, partial_add(fan, x, y), z) == partial_add(fan, x, partial_add(fan, y, z))


# -- RH module ---------------------------------------------------------------------


def test_rect_module():
    R = rect()
    rh = rh_module(R, F(5, 2))
    s2, s3, s5 = (R.table.symbol(f"sqrt{n}") for n in (2, 3, 5))
    fan = rh.fan
    deg0 = [(fan.vector(e.element), e.action) for e in rh.in_degree(0)]
    assert deg0 == [((0, 0), S(0)), ((-1, 0), S(1)), ((1, 0), s2), ((0, -1), s3), ((-2, 0), S(2)), ((0, 1), s5)]
    assert (rh.rank(0), rh.rank(1), rh.rank(2)) == (6, 12, 6)


def test_node_module_uses_pinched_torus():
    rh = rh_module(node_polygon(), F(1, 2))
    assert rh.betti == (1, 1, 1)
    assert [(e.degree, e.rank) for e in rh.entries] == [(0, 1), (1, 1), (2, 1)]


def test_tiny_bound_only_zero():
    rh = rh_module(rect(), F(1, 100))
    assert rh.elements == [ZERO_ELEMENT]


def test_user_betti_warns():
    with pytest.warns(InjectivityHypothesisUnchecked):
        rh_module(square(), 1, betti=(1, 2, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rh_module(square(), 1, betti=(1, 2, 1), injective=True)


def test_degree_zero_rank_matches_lattice():
    rng = random.Random(17)
    for _ in range(8):
        P = random_delzant_polygon(rng)
        a = F(rng.randint(1, 40), 4)
        assert rh_module(P, a).rank(0) == 1 + lattice_count(P, a)
    R = rect()
    assert rh_module(R, F(7, 2)).rank(0) == 1 + lattice_count(R, F(7, 2))


def test_actions_are_support_values():
    R = rect()
    rh = rh_module(R, 4)
    for e in rh.entries:
        if not e.element.is_zero:
            assert e.action == support_value(R, rh.fan.vector(e.element))[0]


def test_euler_characteristics():
    rh = rh_module(rect(), 3)
    for x in rh.elements:
        expected = 1 - 2 + 1 if not x.is_zero else sum((-1) ** d * b for d, b in enumerate(rh.betti))
        assert rh.euler_characteristic(x) == expected


# -- spectrum and E_1 --------------------------------------------------------------


def test_rect_spectrum_and_gap():
    R = rect()
    spectrum = period_spectrum(R, F(5, 2))
    s2, s3, s5 = (R.table.symbol(f"sqrt{n}") for n in (2, 3, 5))
    assert spectrum.actions == [S(1), s2, s3, S(2), s5]
    assert spectrum.gap == s5 - 2
    assert abs(float(spectrum.gap) - 0.2360679) < 1e-6


def test_unit_square_spectrum():
    spectrum = period_spectrum(UNIT, 1)
    assert spectrum.actions == [S(F(1, 2)), S(1)]
    assert len(spectrum.entries) == 4 + 8


def test_empty_spectrum():
    spectrum = period_spectrum(rect(), F(1, 2))
    assert spectrum.entries == [] and spectrum.gap == S(F(1, 2))


def test_e1_ranks_rect():
    rh = rh_module(rect(), F(5, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        page = e1_page(rh, F(1, 5))
    levels = {p for p, _ in page.entries}
    assert levels == set(range(13))
    for p in levels:
        for d in range(3):
            assert page.free_rank(p, d - p) == rh.rank(d)
    assert page.differentials == []


def test_e1_betti_only():
    rh = rh_module(rect(), F(1, 2))
    page = e1_page(rh, F(1, 10))
    assert all(page.free_rank(p, d - p) == b for p in range(5) for d, b in enumerate(rh.betti))


def test_e1_gap_violation():
    rh = rh_module(rect(), F(5, 2))
    with pytest.warns(GapViolation):
        page = e1_page(rh, F(3, 10))
    assert page.free_rank(0, 0) == 6


# -- restriction ---------------------------------------------------------------------


def test_strip_restriction_kernel():
    P, Q = square(), top_strip()
    rm = restriction_map(P, Q, check_admissible_inclusion(Q, P), 4)
    fan = rm.source.fan
    kernel = {fan.vector(x) for x in rm.kernel_elements()}
    comps = {fan.vector(x) for x in rm.source.elements if not x.is_zero}
    assert kernel == {v for v in comps if v[1] < 0}
    for x, y, a, b in rm.blocks:
        assert fan.vector(x)[1] >= 0
        assert a == b


def test_self_restriction_is_identity():
    R = rect()
    rm = restriction_map(R, R, None, 3, map_on_betti={1: np.eye(2, dtype=int), 2: [[1]]})
    for d, m in rm.matrices.items():
        assert (m == np.eye(*m.shape, dtype=np.int64)).all()


def test_restriction_composition():
    R, P, Q = square(), top_strip(1), top_strip(F(1, 2))
    a = 5
    mods = {k: rh_module(X, a) for k, X in (("R", R), ("P", P), ("Q", Q))}
    pr = restriction_map(R, P, None, a, source=mods["R"], target=mods["P"])
    qp = restriction_map(P, Q, None, a, source=mods["P"], target=mods["Q"])
    qr = restriction_map(R, Q, None, a, source=mods["R"], target=mods["Q"])
    for d in range(3):
        assert (qp.matrices[d] @ pr.matrices[d] == qr.matrices[d]).all()


def test_restriction_needs_admissible():
    with pytest.raises(NotAdmissible):
        restriction_map(pentagon(), pentagon_right_piece(), None, 2)


# -- presentations -----------------------------------------------------------------


@pytest.mark.parametrize("P,count", [(square(), 2), (delzant_triangle(), 0), (hexagon(), 9)],
                         ids=["square", "triangle", "hexagon"])
def test_stanley_reisner_counts(P, count):
    pres = stanley_reisner_presentation(P)
    assert len(pres.relations) == count
    n = len(P)
    pairs = {tuple(sorted(int(g[1:]) for g in r.lhs)) for r in pres.at_t_zero()}
    assert pairs == {(i, j) for i in range(1, n + 1) for j in range(i + 2, n + 1) if (i, j) != (1, n)}
    assert all(str(r).endswith("= 0") for r in pres.at_t_zero())


def test_square_relations():
    assert [str(r) for r in stanley_reisner_presentation(square()).at_t_zero()] == ["z1*z3 = 0", "z2*z4 = 0"]


def test_leading_product_examples():
    R = rect()
    fan = build_fan(R)
    s2 = R.table.symbol("sqrt2")
    lp = leading_product(fan, fan.element((1, 0)), fan.element((0, 1)))
    assert lp.exponent == S(0) and fan.vector(lp.element) == (1, 1)
    lp = leading_product(fan, fan.element((1, 0)), fan.element((-1, 0)))
    assert lp.exponent == s2 + 1 and lp.element == ZERO_ELEMENT


def test_leading_product_across_cut_unknown():
    fan = build_fan(node_polygon())
    x, y = fan.normalize(2, 1, 1), fan.normalize(3, 1, 1)
    res = leading_product(fan, x, y)
    assert isinstance(res, UnknownTail) and res.certificate
    # products inside one cut-free sheet are still determined
    res = leading_product(fan, fan.ray(1), fan.ray(4))
    assert isinstance(res, LeadingProduct) and res.exponent == S(0)


def test_leading_product_laws():
    rng = random.Random(23)
    R = rect()
    fan = build_fan(R)

    def rnd():
        return fan.element((rng.randint(-4, 4), rng.randint(-4, 4)))

    for _ in range(300):
        x, y, z = rnd(), rnd(), rnd()
        a, b = leading_product(fan, x, y), leading_product(fan, y, x)
        assert a == b and compare(a.exponent, S(0)) >= 0
        shared = partial_add(fan, x, y) is not UNDEFINED
        assert (a.exponent == S(0)) == shared
        left = leading_product(fan, a.element, z)
        bc = leading_product(fan, y, z)
        right = leading_product(fan, x, bc.element)
        assert left.element == right.element
        assert a.exponent + left.exponent == bc.exponent + right.exponent


def test_laurent_relations():
    R = rect()
    pres = laurent_check(R, rect_right_strip(F(3, 10), R.table))
    assert str(pres.relations[0]) == "z2*X = T^{3/10}*1"
    pres = laurent_check(square(), top_strip(F(1, 2)))
    assert str(pres.relations[0]) == "z3*X = T^{1/2}*1"
    with pytest.raises(NotParallelCut):
        laurent_check(square(), square())


# -- torsion criterion -------------------------------------------------------------


def test_torsion_criterion_cases():
    verdicts = torsion_criterion(square(), [CoverPiece(q) for q in square_strips()])
    assert [v.verdict for v in verdicts] == ["TORSION_FREE"] * 3
    verdicts = torsion_criterion(square(), [CoverPiece(q) for q in square_strips()[:3]])
    assert all(v.verdict == "INCONCLUSIVE" and "not covered" in v.reason for v in verdicts)
    verdicts = torsion_criterion(l_shape(), [CoverPiece(q) for q in l_shape_cover()])
    assert all(v.verdict == "INCONCLUSIVE" and "admissible" in v.reason for v in verdicts)


def test_torsion_criterion_flags():
    cover = [CoverPiece(q) for q in square_strips()]
    cover[1] = CoverPiece(cover[1].polygon, h_injective=(True, False, True))
    verdicts = torsion_criterion(square(), cover)
    assert [v.verdict for v in verdicts] == ["TORSION_FREE", "INCONCLUSIVE", "TORSION_FREE"]
