from __future__ import annotations

from efftop import library as lib
from efftop.arith.field import FieldSpec
from efftop.arith.series import LaurentSeries as L
from efftop.polyalg import MultiPoly, RationalMap
from efftop.surjectivity import (SectionWitness, check_section, confirm_no_preimage,
                                 eff_surj_search, glue_verify, residue_points_onto,
                                 section_table, surjectivity_table,
                                 verify_pushforward_lower_bound)

F2, F3 = FieldSpec.get(2), FieldSpec.get(3)


def proj_section(ell):
    x = MultiPoly.var(1, ell, 0)
    return SectionWitness(RationalMap.polynomial([x, MultiPoly.zero(1, ell)]), "y -> (y, 0)")


def test_projection_table_is_diagonal():
    rep = surjectivity_table(lib.projection(2), F2, [0, 1, 2, 3], 2, cap=4)
    assert [(r.m, r.m_prime) for r in rep.rows] == [(0, 0), (1, 1), (2, 2), (3, 3)]
    assert rep.monotone
    assert rep.to_text().splitlines()[1] == "m\tm_prime\tstatus\twitness"


def test_section_route_agrees_with_search():
    ms = [0, 1, 2, 3]
    search = surjectivity_table(lib.projection(2), F2, ms, 2, cap=4)
    via_section = section_table(lib.projection(2), proj_section(2), F2, ms, 2)
    assert [r.m_prime for r in via_section.rows] == [r.m_prime for r in search.rows]


def test_unit_square_not_found_with_confirmed_witness():
    row = eff_surj_search(lib.unit_square(3), F3, 0, 1, cap=3)
    assert row.m_prime is None and row.status == "NotFound" and row.confirmed
    # the witness is a non-square residue
    assert row.witness[0].coeff(0) == 2
    assert [2] == [y[0] for y in residue_points_onto(lib.unit_square(3).pieces[0][1], F3)]


def test_confirmation_refuses_a_reachable_cell():
    proved, pt = confirm_no_preimage(lib.unit_square(3), F3, (L.one(F3).truncate(1),), 1, 1)
    assert not proved and pt is not None


def test_shear_needs_one_extra_radius():
    assert eff_surj_search(lib.shear(3), F3, 0, 1, cap=2).m_prime == 1


def test_check_section():
    assert check_section(lib.projection(3), proj_section(3), F3).ok
    x = MultiPoly.var(1, 3, 0)
    bad = check_section(lib.square(3), SectionWitness(RationalMap.polynomial([x]), "y"), F3)
    assert not bad.ok and bad.witness is not None
    a, b = MultiPoly.var(2, 3, 0), MultiPoly.var(2, 3, 1)
    sec = SectionWitness(RationalMap((a * a, b), a, 1), "(a, b/a)", nonvanishing=a)
    assert check_section(lib.shear(3), sec, F3).ok


def test_pushforward_lower_bound_report():
    X, Y = lib.mu(lib.affine(2, 3)), lib.mu(lib.affine(1, 3))
    rep = verify_pushforward_lower_bound(lib.projection(3), X, Y, F3, 0, 1, cap=3)
    assert rep.m_prime == 1 and rep.constructed == 1 and rep.bound.found


def test_glue_projection():
    res = glue_verify(lib.glue_projection(2), F2, 0, 2)
    assert res.ok and res.sections_ok
    chain = [res.radii[k] for k in sorted(res.radii)]
    assert chain == sorted(set(chain))
    assert res.minimal == 0


def test_glue_negative_control():
    res = glue_verify(lib.glue_square_fabricated(3), F3, 0, 1)
    assert not res.ok and not res.sections_ok
    assert res.witness is not None and res.witness[0].coeff(0) == 2


def test_glue_shear_plus():
    res = glue_verify(lib.glue_shear_plus(2), F2, 0, 2)
    assert res.ok and res.sections_ok
    chain = [res.radii[f"m{i}"] for i in range(1, 7)]
    assert all(a < b for a, b in zip(chain, chain[1:]))
    assert res.m_prime == chain[-1] == 7
    assert res.minimal == 0
    # m4: y = t^-2 needs source radius 5 (empirical and forced agree)
    assert res.empirical["m4"] == 5
