from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, strategies as st

from efftop.arith.field import FieldSpec
from efftop.arith.series import LaurentSeries as L
from efftop.errors import ParseError, ShapeError
from efftop.polyalg import (MultiPoly, RationalMap, format_poly, jacobian, lucas_binom,
                            multi_indices, parse_poly, poly_eval, series_adjugate, series_det,
                            taylor_coefficients)


def poly_st(ell: int, nvars: int, max_deg: int = 5):
    term = st.tuples(st.tuples(*[st.integers(0, max_deg)] * nvars), st.integers(1, ell - 1))
    return st.lists(term, max_size=6).map(
        lambda ts: MultiPoly(nvars, ell, [(e, c) for e, c in ts if sum(e) <= max_deg]))


def point_st(field, n):
    return st.lists(st.lists(st.integers(0, field.q - 1), min_size=1, max_size=4)
                    .map(lambda ds: L.from_digits(field, 0, ds)), min_size=n, max_size=n)


@given(st.integers(0, 60), st.integers(0, 60), st.sampled_from([2, 3, 5]))
def test_lucas_matches_comb(n, k, p):
    assert lucas_binom(n, k, p) == math.comb(n, k) % p


@given(poly_st(3, 2), poly_st(3, 2))
def test_ring_ops_match_dict_arithmetic(a, b):
    prod: dict = {}
    for (e1, c1), (e2, c2) in itertools.product(a.terms.items(), b.terms.items()):
        e = tuple(x + y for x, y in zip(e1, e2))
        prod[e] = (prod.get(e, 0) + c1 * c2) % 3
    assert (a * b).terms == {e: c for e, c in sorted(prod.items()) if c}
    assert (a + b) - b == a


@given(poly_st(3, 2))
def test_format_parse_roundtrip(p):
    assert parse_poly(format_poly(p), 2, 3) == p


@given(poly_st(2, 2), st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_hasse_derivative_coefficients(p, i):
    # coefficientwise definition with binomials from math.comb
    expected: dict = {}
    for e, c in p.terms.items():
        if all(a >= b for a, b in zip(e, i)):
            coef = c * math.comb(e[0], i[0]) * math.comb(e[1], i[1]) % 2
            if coef:
                expected[(e[0] - i[0], e[1] - i[1])] = coef
    assert p.hasse(i).terms == dict(sorted(expected.items()))


@pytest.mark.parametrize("ell", [2, 3])
def test_taylor_identity(ell):
    F = FieldSpec.get(ell)

    @given(poly_st(ell, 2), point_st(F, 2), point_st(F, 2))
    def run(p, x, z):
        lhs = poly_eval(p, [a + b for a, b in zip(x, z)])
        rhs = L.zero(F)
        for i in multi_indices(2, p.deg() if not p.is_zero() else 0):
            rhs = rhs + poly_eval(p.hasse(i), x) * z[0] ** i[0] * z[1] ** i[1]
        assert lhs == rhs
        coeffs = taylor_coefficients(p, x)
        for i in multi_indices(2, max(p.deg(), 0)):
            assert coeffs.get(i, L.zero(F)) == poly_eval(p.hasse(i), x)

    run()


def test_eval_and_rational_map():
    F = FieldSpec.get(3)
    g = RationalMap((parse_poly("x0^2", 1, 3),), parse_poly("x0", 1, 3), 1)
    t = L.monomial(F, 1, 1)
    assert g([t], prec=6)[0].congruent(t, 6)
    assert g.effective_power() == 2
    with pytest.raises(ShapeError):
        RationalMap((parse_poly("x0", 1, 3),), parse_poly("x0", 1, 3), 0)


def test_compose_and_jacobian():
    ell = 3
    shear = RationalMap.polynomial([parse_poly("x0", 2, ell), parse_poly("x0*x1", 2, ell)])
    jac = jacobian(shear)
    assert jac.det == parse_poly("x0", 2, ell)
    sq = RationalMap.polynomial([parse_poly("x0^2", 1, ell)])
    quad = sq.compose(sq)
    assert quad.numerators[0] == parse_poly("x0^4", 1, ell)


def test_adjugate_identity():
    F = FieldSpec.get(5)
    s = lambda *ds: L.from_digits(F, 0, ds)  # noqa: E731
    a = [[s(1, 2), s(3)], [s(0, 1), s(4, 4)]]
    adj = series_adjugate(a)
    det = series_det(a)
    for i in range(2):
        for j in range(2):
            entry = a[i][0] * adj[0][j] + a[i][1] * adj[1][j]
            assert entry == (det if i == j else L.zero(F))


def test_parse_errors_carry_column():
    with pytest.raises(ParseError) as exc:
        parse_poly("x0 + * x1", 2, 3)
    assert exc.value.column == 6
    with pytest.raises(ParseError):
        parse_poly("x3", 2, 3)
