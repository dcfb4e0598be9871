from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cflab.certified import CertifiedValue, frac_str, interval_sum, parse_frac

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=50)
intervals = st.tuples(fracs, fracs).map(lambda t: CertifiedValue(min(t), max(t)))


def test_frac_str_round_trip():
    assert frac_str(Fraction(3, 4)) == "3/4"
    assert frac_str(5) == "5"
    assert parse_frac("-7/9") == Fraction(-7, 9)


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        CertifiedValue(1, 0)


def test_division_by_interval_with_zero():
    with pytest.raises(ZeroDivisionError):
        CertifiedValue(1, 2) / CertifiedValue(-1, 1)


def test_str_shows_both_endpoints():
    assert str(CertifiedValue(Fraction(1, 3), Fraction(1, 2))).startswith("[1/3, 1/2]")
    assert str(CertifiedValue.exact(Fraction(1, 4))).startswith("1/4")


@given(intervals, intervals, st.data())
def test_arithmetic_encloses_pointwise(a, b, data):
    x = data.draw(st.fractions(min_value=a.lo, max_value=a.hi))
    y = data.draw(st.fractions(min_value=b.lo, max_value=b.hi))
    assert (a + b).contains(x + y)
    assert (a * b).contains(x * y)
    if not b.lo <= 0 <= b.hi:
        assert (a / b).contains(x / y)


@given(st.lists(intervals, min_size=1, max_size=5))
def test_hull_and_sum(vals):
    h = CertifiedValue.hull(vals)
    assert all(h.contains(v) for v in vals)
    s = interval_sum(vals)
    assert s.lo == sum(v.lo for v in vals) and s.hi == sum(v.hi for v in vals)
