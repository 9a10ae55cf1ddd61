"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Values that come from the library are compared against oracles in
oracles.py or against closed forms; see the terminal summary for the table.
"""

from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

import efftop
from efftop import library as lib
from efftop.arith.field import FieldSpec
from efftop.arith.series import INF, LaurentSeries as L
from efftop.cli import main as cli_main
from efftop.geometry import BallSpec, Membership, PointRep, ball_member, continuity_modulus
from efftop.hensel import UniversalFamilyPoint, ift_verify, mono_check, mono_radius
from efftop.measure import (ball_measure, coverage_check, pushforward_density,
                            verify_pushforward_lower_bound, verify_support_lower_bound,
                            verify_total_mass, verify_upper_bound)
from efftop.polyalg import MultiPoly, RationalMap, multi_indices, parse_map, poly_eval
from efftop.smoothfn import min_criterion_check, pushforward_measure_smooth
from efftop.surjectivity import (SectionWitness, eff_surj_search, section_table,
                                 surjectivity_table)

from conftest import ACCEPTANCE
from oracles import GF, series_mul, square_digits, square_roots_tree

CONFIGS = Path(efftop.__file__).parent / "configs"


def record(n: int, ok: bool, desc: str) -> None:
    ACCEPTANCE.setdefault(n, []).append((ok, desc))
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {desc}")


def oracle_field(F: FieldSpec) -> GF:
    return GF(F.ell, F.modulus)


def digits_dict(s: L, hi: int) -> dict:
    lo = int(s.vlb)
    return {e: s.coeff(e) for e in range(lo, hi) if s.coeff(e)}


# -- 1 ----------------------------------------------------------------------------------------

def test_criterion_01_inverse_multiply_back():
    rng = random.Random(1)
    prec = 8
    failures, checks = 0, 0
    start = time.perf_counter()
    for ell, k in [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2)]:
        F = FieldSpec.get(ell, k)
        gf = oracle_field(F)
        for _ in range(2000):
            v = rng.randint(-4, 4)
            digits = [rng.randrange(1, F.q)] + [rng.randrange(F.q) for _ in range(prec - 1)]
            a = L.from_digits(F, v, digits)
            inv = a.inverse(prec - v)
            prod = series_mul(digits_dict(a, v + prec), digits_dict(inv, prec - v),
                              gf.mul, gf.add, prec)
            checks += 1
            if prod != {0: 1}:
                failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and checks == 10 ** 4 and elapsed < 30
    record(1, ok, f"{checks} inverse checks, {failures} failures, {elapsed:.1f}s")
    assert ok


# -- 2 ----------------------------------------------------------------------------------------

def test_criterion_02_hasse_taylor():
    from math import comb

    rng = random.Random(2)
    failures = 0
    for n in range(200):
        ell = (2, 3)[n % 2]
        F = FieldSpec.get(ell)
        d = rng.randint(1, 2)
        terms = [(tuple(rng.randint(0, 5) for _ in range(d)), rng.randrange(1, ell))
                 for _ in range(rng.randint(1, 5))]
        p = MultiPoly(d, ell, [(e, c) for e, c in terms if sum(e) <= 5])
        a = [L.from_digits(F, rng.randint(-2, 1), [rng.randrange(ell) for _ in range(4)])
             for _ in range(d)]
        z = [L.from_digits(F, rng.randint(-2, 1), [rng.randrange(ell) for _ in range(4)])
             for _ in range(d)]
        lhs = poly_eval(p, [x + y for x, y in zip(a, z)])
        rhs = L.zero(F)
        for i in multi_indices(d, 5):
            # Hasse derivative from its coefficient formula with math.comb binomials
            hp = {}
            for e, c in p.terms.items():
                if all(x >= y for x, y in zip(e, i)):
                    coef = c
                    for x, y in zip(e, i):
                        coef = coef * comb(x, y) % ell
                    if coef:
                        hp[tuple(x - y for x, y in zip(e, i))] = coef
            if not hp:
                continue
            assert MultiPoly(d, ell, hp) == p.hasse(i)
            term = poly_eval(MultiPoly(d, ell, hp), a)
            for zj, ij in zip(z, i):
                term = term * zj ** ij
            rhs = rhs + term
        if lhs != rhs:
            failures += 1
    record(2, failures == 0, f"200 Taylor instances, {failures} failures")
    assert failures == 0


# -- 3 ----------------------------------------------------------------------------------------

def _root_table_q3(prec: int) -> dict:
    """All x = 1 + t(...) mod t^prec over F_3 keyed by x^2 mod t^prec (full enumeration)."""
    gf = GF(3, (0, 1))
    table: dict = {}
    for tail in itertools.product(range(3), repeat=prec - 1):
        x = [1, *tail]
        table.setdefault(tuple(square_digits(x, gf, prec)), []).append(x)
    return table


@pytest.mark.parametrize("q", [3, 9])
def test_criterion_03_certified_ift(q):
    F = FieldSpec.get(3, 1 if q == 3 else 2)
    gf = oracle_field(F)
    start = time.perf_counter()
    rep = ift_verify(parse_map(["x0^2"], 1, 3), [L.one(F)], 1, F, 10)
    problems = []
    if rep.m_prime != 7 or rep.targets != q ** 3 or not rep.ok:
        problems.append(f"m'={rep.m_prime} targets={rep.targets} ok={rep.ok}")
    enum = _root_table_q3(10) if q == 3 else None
    for cert in rep.certificates:
        for step in cert.iterates:
            if not step.residual_val >= 7 + step.r:
                problems.append(f"a_{step.r}")
            if step.step_val is not None and not step.step_val >= 1 + step.r:
                problems.append(f"c_{step.r}")
        y = list(cert.target[0].digits(0, 10))
        x = list(cert.final.coords[0].digits(0, 10))
        roots = square_roots_tree(y, gf, 10, [1])
        if roots != [x]:
            problems.append(f"tree oracle disagrees at {y}")
        if enum is not None and enum.get(tuple(y)) != [x]:
            problems.append(f"enumeration oracle disagrees at {y}")
    elapsed = time.perf_counter() - start
    ok = not problems and len(rep.certificates) == q ** 3 and elapsed < 300
    record(3, ok, f"q={q}: {rep.targets} targets, m'={rep.m_prime}, {len(problems)} problems, "
                  f"{elapsed:.1f}s")
    assert ok, problems[:5]


# -- 4 ----------------------------------------------------------------------------------------

def _poly_from_roots(roots):
    F = roots[0].field
    coeffs = [L.one(F)]
    for r in roots:
        nxt = [L.zero(F)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - r * c
        coeffs = nxt
    return coeffs[:-1]


def _fprime(roots, i):
    out = L.one(roots[0].field)
    for j, r in enumerate(roots):
        if j != i:
            out = out * (roots[i] - r)
    return out


def _known_distance(roots, i, j):
    """min(val(r_j - r_i), val(1/f'(r_j) - 1/f'(r_i))) from the factorization."""
    fi, fj = _fprime(roots, i), _fprime(roots, j)
    gap = fi - fj
    gv = gap.val - fi.val - fj.val if not gap.is_zero() else INF
    return min((roots[j] - roots[i]).val, gv)


def _instances(F: FieldSpec, n: int, m: int, rng: random.Random, count: int):
    out, tries = [], 0
    while len(out) < count and tries < 500:
        tries += 1
        roots = [L.from_digits(F, 0, [rng.randrange(F.q) for _ in range(3)]) for _ in range(n)]
        if len({r.digits(0, 3) for r in roots}) < n:
            continue
        p = UniversalFamilyPoint.make(_poly_from_roots(roots), roots[0])
        if p.in_ball(m):
            out.append((roots, p))
    return out


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("q", [2, 3, 4])
@pytest.mark.parametrize("m", [0, 1])
def test_criterion_04_mono_radius(n, q, m):
    F = FieldSpec.get(2 if q in (2, 4) else 3, 2 if q == 4 else 1)
    rng = random.Random(100 * n + 10 * q + m)
    mp = mono_radius(m, n)
    cases = _instances(F, n, m, rng, 4)
    problems = []
    for roots, p in cases:
        res = mono_check(p, m)
        known = [_known_distance(roots, 0, j) for j in range(1, n)]
        # a second root inside the ball would violate uniqueness
        if not res.unique or any(dist >= mp for dist in known):
            problems.append(("not unique", [r.digits(0, 3) for r in roots]))
        expected = max(int(dist) for dist in known) + 1
        if res.empirical_radius != expected or res.empirical_radius > mp:
            problems.append(("radius", res.empirical_radius, expected))
        if len(res.other_roots) != n - 1:
            problems.append(("roots", len(res.other_roots)))
    ok = bool(cases) and not problems
    record(4, ok, f"n={n} q={q} m={m}: {len(cases)} instances, m'={mp}, "
                  f"{len(problems)} problems")
    assert ok, problems


# -- 5 ----------------------------------------------------------------------------------------

def test_criterion_05_ball_axioms():
    rng = random.Random(5)
    F = FieldSpec.get(3)
    spaces = [lib.affine(1, 3), lib.gm(3), lib.affine(2, 3)]

    def rand_point(X):
        coords = []
        for _ in range(X.dim):
            v = rng.randint(-3, 3)
            lead = rng.randrange(1, 3) if X.charts[0].inverted else rng.randrange(3)
            coords.append(L.from_digits(F, v, [lead] + [rng.randrange(3) for _ in range(3)]))
        return PointRep(0, tuple(coords))

    def inside(X, c, p, r):
        return ball_member(BallSpec(X, r, c), p) is Membership.IN

    violations = checks = 0
    for i in range(10 ** 4):
        X = spaces[i % 3]
        x, y, z = rand_point(X), rand_point(X), rand_point(X)
        r = rng.randint(-5, 3)
        kind = i % 3
        if kind == 0:
            bad = inside(X, x, y, r) and not inside(X, x, y, r + 1)
            bad = bad or (ball_member(BallSpec(X, r), y) is Membership.IN
                          and ball_member(BallSpec(X, r + 1), y) is not Membership.IN)
        elif kind == 1:
            bad = inside(X, x, y, r) != inside(X, y, x, r)
        else:
            bad = inside(X, x, y, r) and inside(X, y, z, r) and not inside(X, x, z, r)
        checks += 1
        violations += bad
    record(5, violations == 0, f"{checks} ball-axiom checks, {violations} violations")
    assert violations == 0


# -- 6 ----------------------------------------------------------------------------------------

def test_criterion_06_continuity():
    bad = []
    for q, d, m in itertools.product([2, 3], [1, 2, 3, 4], [0, 1, 2, 3]):
        res = continuity_modulus(lib.monomial(q, d), FieldSpec.get(q), m, 1, modulus=False)
        if res.m_image != d * m:
            bad.append((q, d, m, res.m_image))
        elif m and res.image_witness.coords[0].val != -m:
            bad.append((q, d, m, "witness"))
    record(6, not bad, f"32 monomial cases, m'_image = d*m, {len(bad)} mismatches")
    assert not bad


# -- 7 ----------------------------------------------------------------------------------------

def test_criterion_07_measure_normalization():
    bad = []
    for q, d, m in itertools.product([2, 3], [1, 2], [0, 1, 2]):
        X = lib.mu(lib.affine(d, q))
        F = FieldSpec.get(q)
        val = ball_measure(X, F, m, 1, check_stability=True)
        if val.as_fraction() != Fraction(q) ** (m * d):
            bad.append((q, d, m, str(val)))
        if m == 0 and val.as_fraction() != 1:
            bad.append((q, d, "unit"))
    record(7, not bad, f"12 cases, mu_m(B_m) = q^(md) stable across two precisions, "
                       f"{len(bad)} mismatches")
    assert not bad


# -- 8 ----------------------------------------------------------------------------------------

MEASURE_CASES = {
    "projection": (lambda: lib.projection(3), lambda: lib.affine(2, 3)),
    "unit-square": (lambda: lib.unit_square(3), lambda: lib.gm(3)),
}


@pytest.mark.parametrize("name", sorted(MEASURE_CASES))
def test_criterion_08_measure_inequalities(name):
    F = FieldSpec.get(3)
    gamma_f, src_f = MEASURE_CASES[name]
    g, X, Y = gamma_f(), lib.mu(src_f()), lib.mu(lib.affine(1, 3))
    results = {
        "upper": verify_upper_bound(g, X, Y, F, 0, 2),
        "support": verify_support_lower_bound(g, X, Y, F, 0, 0, 2),
        "total": verify_total_mass(X, F, 0, 2),
    }
    table = pushforward_density(g, X, F, 0, 2)
    conserved = table.total == ball_measure(X, F, 0, 2)
    ok = conserved and all(r.found and r.ties == 0 and r.margin < 1 for r in results.values())
    exps = ", ".join(f"{k} {r.exponent}" for k, r in results.items())
    record(8, ok, f"{name}: {exps}, mass conserved {conserved}")
    assert ok


def test_criterion_08_pushforward_lower_bound_projection():
    F = FieldSpec.get(3)
    X, Y = lib.mu(lib.affine(2, 3)), lib.mu(lib.affine(1, 3))
    res = verify_pushforward_lower_bound(lib.projection(3), X, Y, F, 0, 2)
    ok = res.found and res.margin < 1
    record(8, ok, f"projection: pushforward lower bound {res.exponent}")
    assert ok


@pytest.mark.xfail(strict=True, reason="x -> x^2 misses the non-square units, so no m' can "
                                       "bound mu_m by the pushforward on those cells")
def test_criterion_08_pushforward_lower_bound_unit_square():
    F = FieldSpec.get(3)
    X, Y = lib.mu(lib.gm(3)), lib.mu(lib.affine(1, 3))
    res = verify_pushforward_lower_bound(lib.unit_square(3), X, Y, F, 0, 2, cap=3)
    w = res.witness[0].coeff(0) if res.witness else None
    record(8, res.found, f"unit-square: pushforward lower bound {res.exponent} "
                         f"(cap 3, witness cell {w} mod t)")
    assert res.found


# -- 9 ----------------------------------------------------------------------------------------

@pytest.mark.parametrize("m", [1, 2])
def test_criterion_09_coverage(m):
    F = FieldSpec.get(2)
    A1, G = lib.affine(1, 2), lib.gm(2)
    Z = lib.point_subvariety(A1, (0,))
    args = (A1, F, m, m + 2, G, lib.bridge(A1, G), Z)
    full = coverage_check(*args)
    shrunk = coverage_check(*args, m_prime=m - 1)
    ok = full.m_prime == m and shrunk.m_prime is None and shrunk.witness is not None
    w = shrunk.witness.coords[0] if shrunk.witness else None
    record(9, ok, f"m={m}: m'={full.m_prime} over {full.grid_size} points, "
                  f"m'={m - 1} witness val {None if w is None else w.val}")
    assert ok


# -- 10 ---------------------------------------------------------------------------------------

@pytest.mark.parametrize("q", [3, 5])
def test_criterion_10_smoothness(q):
    F = FieldSpec.get(q)
    problems = []
    radii = []
    for prec in (2, 3):
        res = pushforward_measure_smooth(lib.unit_square(q), lib.mu(lib.gm(q)),
                                         lib.mu(lib.affine(1, q)), F, 0, prec)
        r = res.radius.radius
        radii.append(r)
        if not res.verified or r is None or r > 2:
            problems.append((prec, r))
            continue
        # min-criterion holds at the measured radius and fails just below it
        if not min_criterion_check(res.f, r).holds:
            problems.append((prec, "min at r"))
        if r > -res.f.box and min_criterion_check(res.f, r - 1).holds:
            problems.append((prec, "min below r"))
    ok = not problems
    record(10, ok, f"q={q}: radii {radii}, {len(problems)} disagreements")
    assert ok


# -- 11 ---------------------------------------------------------------------------------------

def test_criterion_11_surjectivity():
    F2, F3 = FieldSpec.get(2), FieldSpec.get(3)
    ms = [0, 1, 2, 3]
    search = surjectivity_table(lib.projection(2), F2, ms, 2, cap=4)
    diag = [r.m_prime for r in search.rows] == ms
    x = MultiPoly.var(1, 2, 0)
    sigma = SectionWitness(RationalMap.polynomial([x, MultiPoly.zero(1, 2)]), "y -> (y, 0)")
    via_section = section_table(lib.projection(2), sigma, F2, ms, 2)
    same = via_section.to_text() == search.to_text()
    row = eff_surj_search(lib.unit_square(3), F3, 0, 1, cap=3)
    confirmed = row.status == "NotFound" and row.confirmed and row.witness[0].coeff(0) == 2
    ok = diag and same and confirmed
    record(11, ok, f"projection m'=m {diag}, section table equal {same}, "
                   f"unit-square NotFound confirmed {confirmed}")
    assert ok


# -- 12 ---------------------------------------------------------------------------------------

def test_criterion_12_determinism(tmp_path, capsys):
    start = time.perf_counter()
    names = ["suite.cfg", "ift_square.cfg", "surj_square.cfg", "low_prec.cfg", "glue.cfg"]
    for workers in (1, 4):
        for name in names:
            out = tmp_path / f"w{workers}" / name
            cli_main(["run", str(CONFIGS / name), "--out", str(out), "--workers", str(workers)])
    capsys.readouterr()
    identical = True
    for name in names:
        identical = identical and cli_main(["report-diff", str(tmp_path / "w1" / name),
                                            str(tmp_path / "w4" / name)]) == 0
    diff_out = capsys.readouterr().out
    elapsed = time.perf_counter() - start
    record(12, identical and not diff_out, f"{len(names)} configs, workers 1 vs 4 identical "
                                           f"{identical}, {elapsed:.0f}s")
    assert identical and not diff_out
