from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from efftop import library as lib
from efftop.arith.field import FieldSpec
from efftop.measure import (MeasureValue, ball_measure, coverage_check, pushforward_density,
                            verify_pushforward_lower_bound, verify_support_lower_bound,
                            verify_total_mass, verify_upper_bound)

F2, F3 = FieldSpec.get(2), FieldSpec.get(3)


@given(st.integers(-50, 50), st.integers(-5, 5), st.integers(-50, 50), st.integers(-5, 5))
def test_measure_value_is_exact(n1, e1, n2, e2):
    a, b = MeasureValue(n1, e1, 3), MeasureValue(n2, e2, 3)
    fa, fb = Fraction(n1) * Fraction(3) ** e1, Fraction(n2) * Fraction(3) ** e2
    assert (a + b).as_fraction() == fa + fb
    assert (a * b).as_fraction() == fa * fb
    assert MeasureValue.from_fraction(fa, 3) == a
    assert (a < b) == (fa < fb)


def test_from_fraction_rejects_foreign_denominators():
    with pytest.raises(ValueError):
        MeasureValue.from_fraction(Fraction(1, 2), 3)


@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("field", [F2, F3], ids=["q2", "q3"])
def test_gm_ball_measure(field, m):
    q = field.q
    # units of valuation v have Haar measure (q - 1) q^(-v - 1)
    expected = sum(Fraction(q - 1) * Fraction(q) ** (-v - 1) for v in range(-m, m + 1))
    got = ball_measure(lib.mu(lib.gm(q)), field, m, m + 2, check_stability=True)
    assert got.as_fraction() == expected


def test_unit_square_pushforward_table():
    table = pushforward_density(lib.unit_square(3), lib.mu(lib.gm(3)), F3, 0, 2)
    # squares of units are exactly the units congruent to 1 mod t, each hit twice with |2x| = 1
    assert {k[0].coeff(0) for k in table.masses} == {1}
    assert len(table.masses) == 3
    assert all(v.as_fraction() == Fraction(2, 9) for v in table.masses.values())
    assert table.total == ball_measure(lib.mu(lib.gm(3)), F3, 0, 2)


@pytest.mark.parametrize("m,prec", [(0, 1), (1, 1), (1, 2)])
def test_projection_pushforward_conserves_mass(m, prec):
    X = lib.mu(lib.affine(2, 3))
    table = pushforward_density(lib.projection(3), X, F3, m, prec)
    # each cell x + t^prec O of t^-m O receives q^-prec * q^m
    assert all(v.as_fraction() == Fraction(3) ** (m - prec) for v in table.masses.values())
    assert len(table.masses) == 3 ** (m + prec)
    assert table.total == ball_measure(X, F3, m, prec)


def test_table_text_is_sorted_and_stable():
    a = pushforward_density(lib.projection(3), lib.mu(lib.affine(2, 3)), F3, 1, 1).to_text()
    b = pushforward_density(lib.projection(3), lib.mu(lib.affine(2, 3)), F3, 1, 1,
                            workers=2).to_text()
    assert a == b
    assert a.splitlines()[0] == "chart\tcell\tnumerator\tq_exponent"


def test_bounds_for_projection():
    X, Y, g = lib.mu(lib.affine(2, 3)), lib.mu(lib.affine(1, 3)), lib.projection(3)
    up = verify_upper_bound(g, X, Y, F3, 0, 2)
    assert up.exponent == 1 and up.margin < 1
    assert verify_support_lower_bound(g, X, Y, F3, 0, 0, 2).exponent == 1
    assert verify_total_mass(X, F3, 0, 2).exponent == 1
    assert verify_pushforward_lower_bound(g, X, Y, F3, 0, 2).exponent == 1


def test_pushforward_lower_bound_fails_off_the_image():
    X, Y, g = lib.mu(lib.gm(3)), lib.mu(lib.affine(1, 3)), lib.unit_square(3)
    res = verify_pushforward_lower_bound(g, X, Y, F3, 0, 2, cap=2)
    assert not res.found
    assert res.witness[0].coeff(0) == 2  # 2 is not a square mod t


@pytest.mark.parametrize("m", [1, 2])
def test_coverage_a1_by_gm_and_origin(m):
    A1 = lib.affine(1, 2)
    Z = lib.point_subvariety(A1, (0,))
    args = (A1, F2, m, m + 1, lib.gm(2), lib.bridge(A1, lib.gm(2)), Z)
    assert coverage_check(*args).m_prime == m
    short = coverage_check(*args, m_prime=m - 1)
    assert short.m_prime is None and short.witness is not None
