from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cflab import catalog
from cflab.errors import InvalidCylinder
from cflab.groups import GroupSet
from cflab.rank_one import (Cylinder, RankOneSystem, build_cut_and_stack, check_ae_action, check_full_action,
                            convolution_window_counts, count_escaping, large_holes_check, measure, refine,
                            return_expansions, telescope, thin, total_measure_trend, validate)

import oracles

CHACON = catalog.chacon(6)
HK = catalog.hk(6)
ODO = catalog.odometer(6)


def test_heights():
    assert [len(CHACON.F(n)) for n in range(5)] == [1, 4, 13, 40, 121]
    assert [len(HK.F(n)) for n in range(5)] == [1, 4, 16, 64, 256]
    assert [len(ODO.F(n)) for n in range(4)] == [1, 2, 4, 8]


@pytest.mark.parametrize("name", ["odometer", "chacon", "hk", "z2lh"])
def test_catalog_validates(name):
    assert validate(catalog.get(name)).ok


def test_mutated_chacon_overlap_witness():
    mut = RankOneSystem(CHACON.Fs[:3], (CHACON.C(1), GroupSet.of_ints([0, 4, 6])), "mut")
    fail = validate(mut).first_failure("III")
    assert fail.level == 2 and fail.witness == ((4,), (6,))


def test_single_offset_fails_condition_one():
    sys = RankOneSystem((GroupSet.interval(0, 1), GroupSet.interval(0, 1)), (GroupSet.of_ints([0]),), "thin")
    assert validate(sys).first_failure("I").level == 1


def test_measure_and_refine():
    assert measure(CHACON, Cylinder.of(2, range(13))) == Fraction(13, 9)
    assert refine(CHACON, Cylinder.of(0, [0]), 1).support == GroupSet.of_ints([0, 1, 3])


def test_cylinder_outside_shape_rejected():
    with pytest.raises(InvalidCylinder):
        measure(CHACON, Cylinder.of(1, [7]))


def test_total_measure_trends():
    assert total_measure_trend(CHACON).verdict == "finite(3/2)"
    assert total_measure_trend(HK).verdict == "infinite"
    bare = RankOneSystem(CHACON.Fs, CHACON.Cs, "no-certificate")
    assert total_measure_trend(bare).verdict.startswith("undecided")


def test_ae_action_values():
    # F_2 + C_3 fills 39 of the 40 levels of F_3 and only the top one leaves under +1
    assert check_ae_action(CHACON, (1,), 2)[3] == Fraction(38, 39)
    assert check_ae_action(ODO, (1,), 2)[3] == Fraction(7, 8)


def test_full_action_never_reached_for_shift_one():
    assert set(check_full_action(ODO, (1,)).values()) == {None}


def test_full_action_trivial_element():
    assert check_full_action(CHACON, (0,))[0] == 0


def test_return_expansions_chacon():
    terms, value = return_expansions(CHACON, (1,), (0,), (0,), 0, 2)
    assert [(t.level, t.c, t.d) for t in terms] == [(1, ((1,),), ((0,),)), (2, ((0,), (4,)), ((3,), (0,)))]
    assert (value.lo, value.hi) == (Fraction(4, 9), Fraction(5, 9))


def test_return_expansions_identity_is_exact():
    _, value = return_expansions(CHACON, (0,), (0,), (0,), 0, 3)
    assert value.lo == value.hi == 1


def test_telescope_merges_stages():
    t = telescope(CHACON, [0, 2, 4])
    assert t.horizon == 2 and len(t.C(1)) == 9 and t.F(1) == CHACON.F(2)
    assert validate(t).ok


def test_thin_densities():
    assert thin(CHACON, [(1,)]).densities == [1] + [Fraction(2, 3)] * 5
    assert thin(HK, [(1,)]).densities == [1] + [Fraction(1, 2)] * 5


def test_large_holes():
    assert large_holes_check(HK, (1,), 1) == (True, None)
    assert large_holes_check(CHACON, (1,), 1) == (False, (4,))


def test_convolution_counts_odometer():
    got = convolution_window_counts(ODO, 0, 1, 2, [(0,), (1,), (-1,)])
    # D = C_1 + C_2 = {0..3}, window F_1 - F_1 = {-1, 0, 1}: 4 + 3 + 3 pairs at h = 0
    assert got == {(0,): 10, (1,): 9, (-1,): 9}


def test_build_cut_and_stack():
    sys = build_cut_and_stack([2, 3], [(0, 1), (1, 0, 0)])
    assert sys.C(1) == GroupSet.of_ints([0, 1]) and sys.C(2) == GroupSet.of_ints([0, 4, 7])
    assert sys.F(2) == GroupSet.interval(0, 10)
    with pytest.raises(ValueError):
        build_cut_and_stack([1], [(0,)])


systems = st.sampled_from([CHACON, HK, ODO])


@st.composite
def cylinders(draw, sys=None):
    sys = sys or draw(systems)
    n = draw(st.integers(0, 3))
    h = len(sys.F(n))
    cells = draw(st.sets(st.integers(0, h - 1), min_size=1, max_size=6))
    return sys, Cylinder.of(n, cells)


@given(cylinders(), st.integers(0, 2))
def test_refine_preserves_measure(sc, extra):
    sys, cyl = sc
    m = min(sys.horizon, cyl.level + extra)
    assert measure(sys, refine(sys, cyl, m)) == measure(sys, cyl)


@given(cylinders())
def test_measure_matches_level_count(sc):
    sys, cyl = sc
    assert measure(sys, cyl) == Fraction(len(cyl.support), oracles.level_count(sys.Cs, cyl.level))


@settings(max_examples=50)
@given(systems, st.integers(0, 2), st.integers(-3, 3))
def test_count_escaping_matches_enumeration(sys, n, g):
    m = n + 2
    pos = oracles.positions_rank_one(sys.Cs, [0], n, m)
    h = len(sys.F(m))
    brute = sum(1 for p in pos if not 0 <= p + g < h)
    assert count_escaping(sys, GroupSet.of_ints([0]), (g,), n, m) == brute


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([CHACON, HK]), st.integers(-6, 6), st.integers(0, 3), st.integers(0, 3))
def test_expansion_value_contains_deep_correlation(sys, g, a, b):
    n, L = 1, 3
    _, value = return_expansions(sys, (g,), (a,), (b,), n, L)
    lo, hi = oracles.correlation_rank_one(sys, n, [a], n, [b], g, L + 2)
    assert value.lo <= hi and lo <= value.hi


def _box_pair(v):
    F = GroupSet.box((0, 0), (10, 10))
    return RankOneSystem((F, GroupSet.box((0, 0), (v + 10, 10))), (GroupSet([(0, 0), (v, 0)], dim=2),), "boxes")


def _brute_large_holes(v):
    """e_1 + F+F-F-F against C-C = {0, +-(v, 0)} for F = [0,10)^2, by enumeration."""
    side = range(10)
    window = {(1 + a + b - c - d, e + f - p - q) for a in side for b in side for c in side for d in side
              for e, f, p, q in ((0, 0, 0, 0), (9, 9, 9, 9), (0, 9, 9, 0))}
    return (v, 0) not in window and (-v, 0) not in window


@pytest.mark.parametrize("v, expected", [(100, True), (20, True), (19, False)])
def test_large_holes_on_boxes_matches_brute_force(v, expected):
    ok, witness = large_holes_check(_box_pair(v), (1, 0), 0)
    assert ok == _brute_large_holes(v) == expected
    assert (witness is None) == ok
