from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from efftop import library as lib
from efftop.arith.field import FieldSpec
from efftop.arith.series import LaurentSeries as L
from efftop.errors import DensityNotUnit, ShapeError
from efftop.polyalg import parse_poly
from efftop.smoothfn import (LocallyConstantFn, abs_unit_smoothness, min_criterion_check,
                             pushforward_fn_etale, pushforward_measure_smooth, smoothness_radius)

F2, F3 = FieldSpec.get(2), FieldSpec.get(3)


def grid_fn(field, level, values):
    """A function on O modulo t^level given by its values on digit vectors."""
    digits = list(itertools.product(range(field.q), repeat=level))
    vals = {(L.from_digits(field, 0, d, level),): v for d, v in zip(digits, values)}
    return LocallyConstantFn(field, 1, level, vals, 0), digits


def brute_radius(field, level, digits, values):
    """Least m >= 0 such that cells agreeing in their first m digits carry equal values."""
    table = dict(zip(digits, values))
    for m in range(0, level + 1):
        if all(table[a] == table[b] for a in digits for b in digits if a[:m] == b[:m]):
            return m
    return level


@given(st.lists(st.integers(0, 2), min_size=8, max_size=8))
def test_radius_matches_brute_force(values):
    f, digits = grid_fn(F2, 3, values)
    got = smoothness_radius(f)
    m = brute_radius(F2, 3, digits, values)
    if m == 3:
        assert got.radius is None and not got.smooth
    else:
        assert got.radius == m and got.smooth


@given(st.lists(st.integers(0, 3), min_size=8, max_size=8), st.integers(0, 2))
def test_min_criterion_matches_definition(values, m):
    f, digits = grid_fn(F2, 3, values)
    table = dict(zip(digits, values))
    holds = all(min(table[b] for b in digits if b[:m] == a[:m]) == table[a] for a in digits)
    res = min_criterion_check(f, m)
    assert res.holds == holds
    if holds:
        assert res.radius.smooth and res.radius.radius <= m


def test_indicator_of_maximal_ideal():
    f, _ = grid_fn(F3, 2, [1 if d == 0 else 0 for d in range(3) for _ in range(3)])
    assert smoothness_radius(f).radius == 1


def test_refine_keeps_radius():
    f, _ = grid_fn(F2, 2, [1, 1, 0, 0])  # depends on the constant digit only
    assert smoothness_radius(f).radius == 1
    fine = f.refine(4)
    assert smoothness_radius(fine).radius == 1
    assert fine((L.from_digits(F2, 0, [1, 1, 0, 1]),)) == 0
    assert fine((L.from_digits(F2, 0, [0, 1, 1, 1]),)) == 1
    with pytest.raises(ShapeError):
        f.refine(1)


def test_abs_unit_smoothness():
    res, table = abs_unit_smoothness(parse_poly("x0^2 + 1", 1, 3), lib.affine(1, 3), F3, 0, 2)
    # x^2 + 1 has no roots mod 3, so |x^2 + 1| = 1 on O
    assert set(table.values.values()) == {Fraction(1)}
    assert res.radius == 0
    with pytest.raises(DensityNotUnit):
        abs_unit_smoothness(parse_poly("x0 + 1", 1, 2), lib.affine(1, 2), F2, 0, 2)


@pytest.mark.parametrize("q", [3, 5])
def test_unit_square_pushforward_density(q):
    F = FieldSpec.get(q)
    res = pushforward_measure_smooth(lib.unit_square(q), lib.mu(lib.gm(q)),
                                     lib.mu(lib.affine(1, q)), F, 0, 2)
    assert res.verified
    # every unit square has two square roots and |2x| = 1: density 2 on the squares
    squares = {F.mul(a, a) for a in range(1, q)}
    assert {k[0].coeff(0) for k in res.f.values} == squares
    assert set(res.f.values.values()) == {Fraction(2)}
    assert res.radius.radius == 1 and res.m_prime == 1
    assert min_criterion_check(res.f, 1).holds
    assert not min_criterion_check(res.f, 0).holds


def test_etale_pushforward_matches_measure_route():
    g = LocallyConstantFn.from_function(F3, 1, 0, 2, lambda x: 1 if x[0].coeff(0) else 0)
    push = pushforward_fn_etale(lib.square(3), g, F3, 2)
    assert set(push.f.values.values()) == {Fraction(2)}
    assert {k[0].coeff(0) for k in push.f.values} == {1}
    assert push.radius.radius == 1
