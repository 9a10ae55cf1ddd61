from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from efftop.arith.field import FieldSpec
from efftop.arith.series import LaurentSeries as L
from efftop.errors import PreconditionViolated, SingularJacobian
from efftop.hensel import (EffectiveRadii, UniversalFamilyPoint, check_second_root,
                           check_solution, empirical_ift_radius, family_roots, ift_radius,
                           ift_verify, mono_check, mono_radius, newton_solve)
from efftop.polyalg import RationalMap, parse_map

from oracles import _sq_digits

F3 = FieldSpec.get(3)
ONE = L.one(F3)
T = L.monomial(F3, 1, 1)


def square_map(ell):
    return parse_map(["x0^2"], 1, ell)


def test_radius_formulas():
    # squaring at a unit: M = 2, d = 1, no denominator, det = 2x of degree 1
    assert ift_radius(1, 2, 1, 0, 1) == 7
    assert ift_radius(0, 5, 3, 2, 4) == 0
    assert mono_radius(1, 3) == 6
    assert mono_radius(0, 2) == 2
    r = EffectiveRadii.compute(1, 2, 1, 0, 1, n=2)
    assert (r.ift_m_prime, r.mono_m_prime) == (7, 5)
    with pytest.raises(PreconditionViolated):
        mono_radius(-1, 2)


def test_newton_square_root():
    y = L.from_digits(F3, 0, [1] + [0] * 6 + [1])
    cert = newton_solve(square_map(3), [ONE], [y], 1, 14)
    assert cert.certified
    x = cert.final.coords[0]
    assert _sq_digits(list(x.digits(0, 14)), 3, 14) == list(y.digits(0, 14))
    assert check_solution(square_map(3), [x], [y], 14)
    for step in cert.iterates:
        assert step.residual_ok and step.in_ball


def test_newton_rational_map():
    # x -> x^2 / x: the identity written with a denominator
    g = RationalMap(parse_map(["x0^2"], 1, 3).numerators, parse_map(["x0"], 1, 3).numerators[0], 1)
    y = ONE + T ** 5
    cert = newton_solve(g, [ONE], [y], 1, 8, m_prime=3)
    assert cert.certified
    assert cert.final.coords[0].congruent(y, 8)


def test_newton_preconditions():
    with pytest.raises(PreconditionViolated):
        newton_solve(square_map(3), [ONE], [ONE + T], 1, 10)
    with pytest.raises(SingularJacobian):
        newton_solve(square_map(3), [L.zero(F3)], [T ** 9], 1, 10)
    cert = newton_solve(square_map(3), [ONE], [ONE + T ** 2], 1, 10, force=True)
    assert not cert.preconditions and not cert.certified


def test_certificate_text_is_deterministic():
    y = ONE + T ** 7
    a = newton_solve(square_map(3), [ONE], [y], 1, 10).to_text()
    b = newton_solve(square_map(3), [ONE], [y], 1, 10).to_text()
    assert a == b and "certified = true" in a


def test_ift_verify_and_empirical_radius():
    rep = ift_verify(square_map(3), [ONE], 1, F3, 10)
    assert rep.ok and rep.targets == 27 and rep.m_prime == 7
    # (1 + t u)^2 = 1 + 2tu + t^2 u^2 reaches all of 1 + tO
    assert rep.empirical_radius == 1
    assert empirical_ift_radius(square_map(3), [ONE], 0, F3, 4) == (1, False)


@given(st.lists(st.integers(0, 2), min_size=1, max_size=3, unique=True).map(sorted))
def test_family_roots_of_split_polynomials(consts):
    # prod (x - c - t), constants distinct so the roots c + t are separated
    roots = [L.scalar(F3, c) + T for c in consts]
    coeffs = [ONE]
    for r in roots:
        nxt = [L.zero(F3)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - r * c
        coeffs = nxt
    cells = family_roots(coeffs[:-1], 6)
    found = sorted(c.approx()[0].digits(0, 6) for c in cells)
    assert found == sorted(r.digits(0, 6) for r in roots)


def test_mono_check_unique_and_negative_control():
    p = UniversalFamilyPoint.make([T, -(ONE + T)], ONE)  # (x - 1)(x - t)
    res = mono_check(p, 0)
    assert res.unique and res.m_prime == 2
    assert res.empirical_radius == 1 <= res.m_prime
    bad = mono_check(p, 0, m_prime=0, prec=2)
    assert not bad.unique
    assert check_second_root(p, bad.counterexample, 0)
    assert not check_second_root(p, ONE.truncate(3), 0)


def test_family_point_rejects_non_roots():
    with pytest.raises(PreconditionViolated):
        UniversalFamilyPoint.make([T, -(ONE + T)], ONE + ONE)
    with pytest.raises(PreconditionViolated):
        UniversalFamilyPoint.make([ONE, ONE + ONE], ONE)  # (x - 1)^2 over F_3
