from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from efftop.arith.enumerate import digit_tuples, ls_enumerate
from efftop.arith.field import FieldSpec, format_field, is_irreducible, parse_field_spec
from efftop.arith.series import INF, LaurentSeries as L, format_series, parse_series
from efftop.errors import BudgetExceeded, ParseError

from oracles import gf_add, gf_mul, series_mul

FIELDS = [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2), (2, 3)]


@pytest.mark.parametrize("ell,k", FIELDS)
def test_field_tables_match_schoolbook(ell, k):
    F = FieldSpec.get(ell, k)
    assert F.q == ell ** k
    assert is_irreducible(F.modulus, ell)
    for a in range(F.q):
        for b in range(F.q):
            assert F.mul(a, b) == gf_mul(a, b, ell, F.modulus)
            assert F.add(a, b) == gf_add(a, b, ell, k)
        if a:
            assert F.mul(a, F.inv(a)) == 1


def test_field_interning_and_parse():
    assert FieldSpec.get(3, 2) is FieldSpec(3, 2)
    F = parse_field_spec("F(3,2)")
    assert F is FieldSpec.get(3, 2)
    assert parse_field_spec(format_field(F)) is F
    assert parse_field_spec("F(5)").q == 5
    with pytest.raises(ParseError):
        parse_field_spec("F_9")


def test_frobenius_is_additive():
    F = FieldSpec.get(3, 2)
    for a in range(F.q):
        for b in range(F.q):
            assert F.pow(F.add(a, b), 3) == F.add(F.pow(a, 3), F.pow(b, 3))


def series_st(field: FieldSpec, lo=-3, hi=3, max_len=6):
    return st.builds(lambda v, ds, p: L.from_digits(field, v, ds, v + len(ds) + p),
                     st.integers(lo, hi),
                     st.lists(st.integers(0, field.q - 1), min_size=1, max_size=max_len),
                     st.integers(0, 3))


def as_dict(s: L) -> dict:
    lo = s.vlb if s.vlb != INF else 0
    return {e: s.coeff(e) for e in range(int(lo), int(s.prec)) if s.coeff(e)}


@pytest.mark.parametrize("ell,k", [(2, 1), (3, 1), (2, 2)])
def test_product_matches_convolution(ell, k):
    F = FieldSpec.get(ell, k)

    @given(series_st(F), series_st(F))
    def run(a, b):
        c = a * b
        # absolute precision of a product of truncated series
        va, vb = a.vlb, b.vlb
        expected_prec = min(va + b.prec, vb + a.prec)
        assert c.prec == expected_prec
        ref = series_mul(as_dict(a), as_dict(b), F.mul, F.add, int(expected_prec))
        assert as_dict(c) == ref

    run()


@given(series_st(FieldSpec.get(3)), series_st(FieldSpec.get(3)))
def test_addition_commutes_and_subtracts(a, b):
    assert (a + b).congruent(b + a, min(a.prec, b.prec))
    assert ((a + b) - b).congruent(a, min(a.prec, b.prec))


@given(series_st(FieldSpec.get(3)))
def test_inverse_multiplies_back(a):
    if a.is_zero():
        return
    exact = a.lift()
    inv = exact.inverse(6 - exact.val)
    assert (exact * inv).congruent(L.one(a.field), 6)
    # a truncated input only determines the inverse to its relative precision
    rel = a.prec - a.val
    assert (a * a.inverse()).congruent(L.one(a.field), rel)


def test_known_inverse():
    F = FieldSpec.get(2)
    one_minus_t = L.from_digits(F, 0, [1, 1])
    inv = one_minus_t.inverse(6)
    assert inv.digits(0, 6) == (1, 1, 1, 1, 1, 1)
    assert inv.prec == 6


def test_zero_and_valuation():
    F = FieldSpec.get(3)
    z = L.zero(F, 4)
    assert z.is_zero() and z.val == INF and z.vlb == 4
    s = L.from_digits(F, -2, [0, 0, 1], 5)
    assert s.val == 0
    assert L.monomial(F, 2, -3).val == -3
    assert math.isinf(L.zero(F).prec)


@pytest.mark.parametrize("text", ["t^-1 + 2 + t^2 (mod t^5)", "1 + 2*t^3", "0 (mod t^4)"])
def test_series_literal_roundtrip(text):
    F = FieldSpec.get(3)
    s = parse_series(F, text)
    assert format_series(s) == text
    assert parse_series(F, format_series(s)) == s


def test_extension_literal():
    F = FieldSpec.get(3, 2)
    s = parse_series(F, "(u + 1)*t + u^2")
    assert parse_series(F, format_series(s)) == s


def test_enumeration_order_and_budget():
    F = FieldSpec.get(2)
    got = [s.digits(0, 2) for s in ls_enumerate(F, 0, 2)]
    assert got == [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert len(list(digit_tuples(3, 3))) == 27
    with pytest.raises(BudgetExceeded):
        list(ls_enumerate(F, 0, 10, budget=100))
