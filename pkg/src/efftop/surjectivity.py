"""Effective surjectivity on cell grids: sections, radius searches and the gluing chain.

A map is effectively surjective when for every m some m' has
gamma(B_{m'}^X) containing B_m^Y.  Here that inclusion is tested on the cells
of B_m^Y modulo t^prec: a cell counts as covered once an exact point of
B_{m'}^X is found whose image lies in it.  Failures at the search cap are
confirmed by a cell-by-cell proof that no point of B_cap^X maps into the
witness cell.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .arith.enumerate import check_budget, digit_tuples
from .arith.field import FieldSpec
from .arith.series import INF, LaurentSeries, format_series
from .errors import CellSplit, EffTopError, PrecisionLoss, ShapeError
from .geometry import (EXACT_CAP, Membership, Morphism, MuRectifiedVariety, PointRep,
                       RectifiedVariety, Subvariety, ball_grid, cell_status, chart_radius, continuity_modulus, offset_bounds,
                       point_radius, radius_bounds, subdivide)
from .hensel import empirical_ift_radius, newton_solve
from .measure import (BoundResult, coverage_check, verify_pushforward_lower_bound as
                      _measure_lower_bound, verify_support_lower_bound)
from .polyalg import MultiPoly, RationalMap, poly_eval, taylor_coefficients
from .scan import parallel_map

log = logging.getLogger(__name__)


def _fmt_point(coords) -> str:
    return "(" + ", ".join(format_series(c) for c in coords) + ")"


# -- sections -----------------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionWitness:
    """A right inverse sigma of gamma on the points of Y where ``nonvanishing`` is nonzero.

    sigma maps target chart coordinates to coordinates of ``source_chart``;
    None stands for the map onto a zero-dimensional source chart.
    """

    sigma: RationalMap | None
    label: str = ""
    nonvanishing: MultiPoly | None = None
    source_chart: int = 0

    def defined_at(self, y: Sequence[LaurentSeries], field=None) -> bool:
        ys = list(y)
        if self.sigma is None:
            return True
        if self.nonvanishing is not None and poly_eval(self.nonvanishing, ys, field).is_zero():
            return False
        return self.sigma.is_polynomial or not poly_eval(self.sigma.denom, ys, field).is_zero()

    def apply(self, y: Sequence[LaurentSeries], cap=None, field=None
              ) -> tuple[LaurentSeries, ...]:
        ys = [c.lift() for c in y]
        if self.sigma is None:
            return ()
        if self.sigma.is_polynomial:
            return tuple(self.sigma.evaluate(ys, None, field))
        return tuple(self.sigma.evaluate(ys, EXACT_CAP if cap is None else cap, field))


@dataclass
class SectionCheck:
    ok: bool
    checked: int
    witness: tuple | None = None


def _chart_map(gamma, chart: int = 0) -> RationalMap:
    if isinstance(gamma, Morphism):
        return gamma.pieces[chart][1]
    return gamma


def sample_points(field: FieldSpec, dim: int, count: int, prec: int, seed: int = 0,
                  low: int = -2) -> list[tuple[LaurentSeries, ...]]:
    """Simple points first (1, t, 1/t, 1 + t in every coordinate), then seeded random ones."""
    t = LaurentSeries.monomial(field, 1, 1)
    one = LaurentSeries.one(field)
    specials = [one, t, LaurentSeries.monomial(field, 1, -1), one + t]
    pts = [tuple(s for _ in range(dim)) for s in specials]
    rng = random.Random(seed)
    while len(pts) < count:
        pts.append(tuple(LaurentSeries.from_digits(field, low, [rng.randrange(field.q)
                                                              for _ in range(prec - low)])
                         for _ in range(dim)))
    return pts[:count]


def check_section(gamma, sigma: SectionWitness, field: FieldSpec, samples: int = 100,
                  prec: int = 8, seed: int = 0) -> SectionCheck:
    """Whether gamma(sigma(y)) = y mod t^prec at sampled points of sigma's domain."""
    g = _chart_map(gamma, sigma.source_chart)
    dim = sigma.sigma.source_dim
    checked = 0
    cap = 2 * prec + 16
    for y in sample_points(field, dim, samples, prec, seed):
        if not sigma.defined_at(y):
            continue
        checked += 1
        x = list(sigma.apply(y, cap))
        if not g.is_polynomial and poly_eval(g.denom, x).is_zero():
            return SectionCheck(False, checked, y)
        img = g.evaluate(x, None if g.is_polynomial else cap)
        for a, b in zip(img, y):
            diff = a - b
            if diff.prec < prec:
                raise PrecisionLoss(f"section check lost precision at {_fmt_point(y)}", prec)
            if not diff.truncate(prec).is_zero():
                return SectionCheck(False, checked, y)
    return SectionCheck(True, checked)


# -- reports ----------------------------------------------------------------------------------

@dataclass
class SurjRow:
    m: int
    m_prime: int | None
    witness: tuple | None = None
    confirmed: bool | None = None
    note: str = ""
    targets: int = 0

    @property
    def status(self) -> str:
        if self.m_prime is not None:
            return "found"
        if self.confirmed:
            return "NotFound"
        return "Inconclusive"


@dataclass
class SurjectivityReport:
    rows: list[SurjRow]
    q: int
    prec: int
    cap: int | None = None

    @property
    def monotone(self) -> bool:
        found = [r.m_prime for r in sorted(self.rows, key=lambda r: r.m)]
        if any(v is None for v in found):
            return True
        return all(a <= b for a, b in zip(found, found[1:]))

    def to_text(self) -> str:
        lines = [f"# q = {self.q} ; prec = {self.prec}",
                 "m\tm_prime\tstatus\twitness"]
        for r in sorted(self.rows, key=lambda r: r.m):
            mp = r.m_prime if r.m_prime is not None else (
                f"NotFound({self.cap})" if self.cap is not None else "NotFound")
            w = _fmt_point(r.witness) if r.witness is not None else "-"
            lines.append(f"{r.m}\t{mp}\t{r.status}\t{w}")
        return "\n".join(lines) + "\n"


# -- searching for m' -------------------------------------------------------------------------

def _target_cells(Y: RectifiedVariety, field: FieldSpec, m: int, prec: int, budget):
    if not Y.is_simple:
        raise ShapeError("surjectivity searches need a simply rectified target")
    cells = ball_grid(Y, field, m, prec, budget)
    return [tuple(c.truncate(prec) for c in y.coords) for y in cells]


def _image_task(args):
    gamma, x, prec = args
    b, g = gamma.pieces[x.chart]
    xs = list(x.coords)
    if not g.is_polynomial and poly_eval(g.denom, xs).is_zero():
        return None
    img = g.evaluate(xs, None if g.is_polynomial else prec + EXACT_CAP)
    if any(v.prec < prec for v in img):
        return None
    return tuple(v.truncate(prec) for v in img)


def _newton_cover(gamma: Morphism, X, src, images, y, m_prime, prec, free):
    """Try to hit cell y exactly by Newton from the source point whose image is closest."""
    best, best_v = None, -INF
    for x, img in zip(src, images):
        if img is None:
            continue
        v = min((a - b.lift()).vlb for a, b in zip(img, y))
        if v > best_v:
            best, best_v = x, v
    if best is None:
        return None
    g = gamma.pieces[best.chart][1]
    try:
        cert = newton_solve(g, best.coords, [c.lift() for c in y], m_prime, prec, free=free,
                            force=True, max_iter=prec + 8)
    except EffTopError:
        return None
    if not cert.success:
        return None
    x = PointRep(best.chart, cert.final.coords)
    lo, hi = radius_bounds(X, x)
    return x if hi <= m_prime else None


def eff_surj_search(gamma: Morphism, field: FieldSpec, m: int, prec: int, cap: int = 8,
                    floor: int = 0, source_prec: int | None = None,
                    newton_free: Sequence[int] | None = None, confirm: bool = True,
                    budget: int | None = None, workers: int = 1) -> SurjRow:
    """Smallest m' in [floor, cap] with every cell of B_m^Y hit by a point of B_{m'}^X.

    Source points are the exact grid representatives of B_{m'}^X modulo
    t^source_prec (default prec + 1).  With ``newton_free`` given, cells
    missed by the grid are attacked by Newton iteration in those source
    variables.  At the cap the first missed cell is returned as witness and,
    with ``confirm``, checked to have no preimage in B_cap^X at all.
    """
    X, Y = gamma.source, gamma.target
    targets = _target_cells(Y, field, m, prec, budget)
    sp = prec + 1 if source_prec is None else source_prec
    missed: list = []
    for mp in range(floor, cap + 1):
        src = ball_grid(X, field, mp, sp, budget)
        images = parallel_map(_image_task, [(gamma, x, prec) for x in src], workers)
        hit = {img for img in images if img is not None}
        missed = [y for y in targets if y not in hit]
        if newton_free is not None and missed:
            missed = [y for y in missed
                      if _newton_cover(gamma, X, src, images, y, mp, prec, newton_free) is None]
        if not missed:
            return SurjRow(m, mp, targets=len(targets))
    row = SurjRow(m, None, missed[0], targets=len(targets))
    if confirm:
        try:
            proved, hit_pt = confirm_no_preimage(gamma, field, missed[0], prec, cap, budget=budget)
        except CellSplit as exc:
            row.note = f"confirmation inconclusive: {exc}"
            return row
        row.confirmed = proved
        if not proved:
            row.note = f"grid missed a preimage near {_fmt_point(hit_pt.coords)}"
    return row


def confirm_no_preimage(gamma: Morphism, field: FieldSpec, y: Sequence[LaurentSeries], N: int,
                        r: int, max_extra: int = 12, budget: int | None = None):
    """Prove that no point of B_r^X maps into the cell y + t^N O^e.

    Works on source cells c + t^L O^d of the box (t^-r O)^d: with
    G_s = h_s - y_s f^M expanded at c, a coefficient b_0 of valuation below
    every other term pins val(G_s) on the cell, which decides a miss once
    val f is pinned the same way.  Undecided cells are subdivided.  Returns
    (True, None) on proof, (False, point) if a cell inside B_r maps wholly
    into the target cell, and raises CellSplit past ``max_extra`` levels.
    """
    X = gamma.source
    ys = [c.lift() for c in y]
    visited = 0
    for a, (chart, (b, g)) in enumerate(zip(X.charts, gamma.pieces)):
        d = g.source_dim
        n = d + g.target_dim
        fM = g.denom.extend(n) ** g.power
        polys = [h.extend(n) - MultiPoly.var(n, g.ell, d + s) * fM
                 for s, h in enumerate(g.numerators)]
        stack = [(tuple(LaurentSeries.zero(field) for _ in range(d)), -r)]
        while stack:
            c, L = stack.pop()
            visited += 1
            check_budget(visited, budget, "preimage proof")
            status = cell_status(chart, c, L, r, field)
            if status is Membership.OUT:
                continue
            verdict = _cell_image_test(g, polys, c, ys, L, N)
            if verdict == "miss":
                continue
            if verdict == "hit" and status is Membership.IN:
                return False, PointRep(a, c)
            if L >= N + max_extra:
                raise CellSplit(f"source cell {_fmt_point(c)} + t^{L} undecided")
            stack.extend(reversed([(ch, L + 1) for ch in subdivide(field, c, L)]))
    return True, None


def _pinned_val(tc: dict, d: int, L: int):
    """Exact val of the expanded polynomial on the whole cell, or None."""
    b0 = tc.get((0,) * d)
    if b0 is None or b0.is_zero():
        return None
    tail = min((b.vlb + sum(i) * L for i, b in tc.items() if any(i)), default=INF)
    return b0.val if b0.val < tail else None


def _cell_image_test(g: RationalMap, polys, c, ys, L: int, N: int) -> str:
    d = g.source_dim
    pt = list(c) + list(ys)
    vf = 0
    if not g.is_polynomial:
        vf = _pinned_val(taylor_coefficients(g.denom, list(c), d), d, L)
        if vf is None:
            return "undecided"
    all_hit = True
    for p in polys:
        tc = taylor_coefficients(p, pt, d)
        v = _pinned_val(tc, d, L)
        if v is not None:
            if v - g.power * vf < N:
                return "miss"
            continue
        low = min((b.vlb + sum(i) * L for i, b in tc.items()), default=INF)
        if low - g.power * vf < N:
            all_hit = False
    return "hit" if all_hit else "undecided"


def surjectivity_table(gamma: Morphism, field: FieldSpec, ms: Sequence[int], prec: int,
                       cap: int = 8, **kw) -> SurjectivityReport:
    rows = [eff_surj_search(gamma, field, m, prec, cap, **kw) for m in ms]
    return SurjectivityReport(rows, field.q, prec, cap)


def section_table(gamma: Morphism, sigma: SectionWitness, field: FieldSpec, ms: Sequence[int],
                  prec: int, floor: int = 0, budget: int | None = None) -> SurjectivityReport:
    """m' per m read off a section: the largest radius of sigma(y) over the cells y of B_m^Y.

    Each sigma(y) is also checked to map back into the cell of y.
    """
    X, Y = gamma.source, gamma.target
    rows = []
    g = gamma.pieces[sigma.source_chart][1]
    for m in ms:
        worst = floor
        bad = None
        targets = _target_cells(Y, field, m, prec, budget)
        for y in targets:
            if not sigma.defined_at([c.lift() for c in y]):
                bad = y
                break
            x = sigma.apply(y, 2 * prec + EXACT_CAP)
            img = g.evaluate(list(x), None if g.is_polynomial else 2 * prec + EXACT_CAP)
            if any(not (a - b.lift()).truncate(prec).is_zero() for a, b in zip(img, y)):
                bad = y
                break
            worst = max(worst, point_radius(X, PointRep(sigma.source_chart, x)))
        if bad is not None:
            rows.append(SurjRow(m, None, bad, note="section fails on this cell",
                                targets=len(targets)))
        else:
            rows.append(SurjRow(m, int(worst), targets=len(targets)))
    return SurjectivityReport(rows, field.q, prec)


def residue_points_onto(gamma: RationalMap, field: FieldSpec) -> list[tuple[int, ...]]:
    """Constant points y in F_q^e with no constant preimage in F_q^d (a sampled 'onto' check)."""
    d, e = gamma.source_dim, gamma.target_dim
    check_budget(field.q ** d, None, "residue points")
    hit = set()
    for digits in digit_tuples(field.q, d):
        xs = [LaurentSeries.scalar(field, a) for a in digits]
        if not gamma.is_polynomial and poly_eval(gamma.denom, xs, field).is_zero():
            continue
        img = gamma.evaluate(xs, EXACT_CAP, field)
        if all(v.vlb >= 0 for v in img):
            hit.add(tuple(v.coeff(0) for v in img))
    return [y for y in digit_tuples(field.q, e) if tuple(y) not in hit]


# -- pushforward lower bound -------------------------------------------------------------------

@dataclass
class LowerBoundReport:
    m: int
    m_prime: int | None
    surj: SurjRow
    support_exponent: int | None
    constructed: int | None
    bound: BoundResult


def verify_pushforward_lower_bound(gamma: Morphism, X: MuRectifiedVariety,
                                   Y: MuRectifiedVariety, field: FieldSpec, m: int, prec: int,
                                   cap: int = 8, budget: int | None = None,
                                   workers: int = 1) -> LowerBoundReport:
    """mu_m^Y < q^{m'} gamma_*(mu_{m'}^X) cellwise, with m' searched directly.

    Also reports the m' built from coverage: m_1 from eff_surj_search plus
    the exponent M of the support lower bound at m_1.
    """
    surj = eff_surj_search(gamma, field, m, prec, cap, budget=budget, workers=workers)
    support = constructed = None
    if surj.m_prime is not None:
        sb = verify_support_lower_bound(gamma, X, Y, field, m, surj.m_prime, prec, cap,
                                        budget=budget, workers=workers)
        support = sb.exponent
        if support is not None:
            constructed = surj.m_prime + support
    bound = _measure_lower_bound(gamma, X, Y, field, m, prec, cap, budget=budget,
                                 workers=workers)
    return LowerBoundReport(m, bound.exponent, surj, support, constructed, bound)


# -- gluing ---------------------------------------------------------------------------------------

@dataclass(frozen=True)
class GlueData:
    """A map gamma: X -> Y with Y split into a closed graph-chart Z and its complement U.

    gamma_Z: gamma^{-1}(Z) -> Z and gamma_U: gamma^{-1}(U) -> U are the
    restrictions, incl_Z: gamma^{-1}(Z) -> X the inclusion, to_U the identity
    of Y's points in U's charts (defined off Z), retract sends Y chart
    coordinates to Z chart coordinates (a point of Z near y), and
    newton_free names the source variables Newton may move.  When Z is a
    single point, gamma_Z and retract are None and sigma_Z has no arguments.
    """

    gamma: Morphism
    Z: Subvariety
    U: RectifiedVariety
    to_U: Morphism
    gamma_Z: Morphism | None
    incl_Z: Morphism
    gamma_U: Morphism
    incl_U: Morphism
    section_Z: SectionWitness | None
    section_U: SectionWitness | None
    retract: RationalMap | None
    newton_free: tuple[int, ...]
    u_equation: MultiPoly


@dataclass
class GlueResult:
    ok: bool
    m: int
    m_prime: int | None
    minimal: int | None = None
    radii: dict = dc_field(default_factory=dict)
    empirical: dict = dc_field(default_factory=dict)
    witness: tuple | None = None
    sections_ok: bool = True
    notes: list = dc_field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"glue m = {self.m}", f"ok = {'true' if self.ok else 'false'}",
                 f"sections_ok = {'true' if self.sections_ok else 'false'}"]
        for k in sorted(self.radii):
            lines.append(f"{k} = {self.radii[k]} (empirical {self.empirical.get(k)})")
        lines.append(f"m_prime = {self.m_prime}")
        lines.append(f"minimal = {self.minimal}")
        if self.witness is not None:
            lines.append(f"witness = {_fmt_point(self.witness)}")
        lines += [f"note = {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _section_radius(gamma_part: Morphism, sigma: SectionWitness, field, r, prec, budget):
    rep = section_table(gamma_part, sigma, field, [r], prec, floor=-10 ** 6, budget=budget)
    return rep.rows[0].m_prime


def _apply(f: Morphism, x: PointRep, field) -> PointRep:
    b, g = f.pieces[x.chart]
    return PointRep(b, tuple(g.evaluate(list(x.coords), None if g.is_polynomial else EXACT_CAP,
                                        field)))


def _radius(X: RectifiedVariety, x: PointRep, field) -> int:
    if x.coords:
        return point_radius(X, x)
    rb = chart_radius(X.charts[x.chart], (), field)
    if rb is None or rb[0] != rb[1]:
        raise PrecisionLoss("radius of a point of a zero-dimensional chart is undetermined")
    return rb[1]


def _z_radius_over_ball(data: GlueData, field, m, prec, budget) -> int:
    """Largest Z-radius of Z points in B_m^Y, on a grid of Z's chart coordinates."""
    Zv = data.Z.variety
    Y = data.gamma.target
    worst = None
    R = m + 2
    for z in ball_grid(Zv, field, R, prec, budget):
        yb, zmap = data.Z.maps[z.chart]
        y = PointRep(yb, tuple(zmap.evaluate(list(z.coords), None if zmap.is_polynomial
                                             else EXACT_CAP, field)))
        if radius_bounds(Y, y)[1] > m:
            continue
        rz = _radius(Zv, z, field)
        worst = rz if worst is None else max(worst, rz)
    return -R if worst is None else worst


def _retract_coverage(data: GlueData, field, m4, prec, budget):
    """m5 with B_{m4}^Y inside B_{-m4}^Y(Z) and B_{m5}^U, nearness tested through the retraction.

    A grid point y counts as near Z when the retracted point of Z is within
    offset m4 of y; this only undercounts nearness, so the m5 found is valid.
    """
    Y = data.gamma.target
    need = -m4
    for y in ball_grid(Y, field, m4, prec, budget):
        zc = data.retract.evaluate(list(y.coords))
        yb, zmap = data.Z.maps[0]
        z = PointRep(yb, tuple(zmap.evaluate(zc, None if zmap.is_polynomial else EXACT_CAP,
                                             field)))
        if offset_bounds(Y, z, y)[0] >= m4:
            continue
        b, g = data.to_U.pieces[y.chart]
        if not poly_eval(data.u_equation, list(y.coords), field).is_zero():
            lo, hi = radius_bounds(data.U, _apply(data.to_U, y, field))
            if lo == hi:
                need = max(need, int(hi))
                continue
        return None, y
    return need, None


def _local_ift_radius(data: GlueData, field, m2, m3, prec, budget) -> int:
    """Largest empirical m4 with gamma(B_{-m3}(x)) containing B_{-m4}(gamma(x)) for x in gamma^{-1}(Z)."""
    part_src = data.incl_Z.source
    worst = m3
    g = data.gamma.pieces[0][1]
    P = m3 + 2
    for xz in ball_grid(part_src, field, m2, max(m3, -m2), budget):
        x = _apply(data.incl_Z, xz, field)
        r, _ = empirical_ift_radius(g, list(x.coords), m3, field, P, budget,
                                    free=data.newton_free)
        worst = max(worst, r)
    return worst


def glue_verify(data: GlueData, field: FieldSpec, m: int, prec: int, samples: int = 100,
                budget: int | None = None, seed: int = 0) -> GlueResult:
    """Run the gluing chain m -> m1 -> ... -> m6 and verify gamma(B_{m6}^X) contains B_m^Y.

    Each radius is measured on the grid and then forced strictly above the
    previous one.  The final inclusion is checked on every cell y of B_m^Y:
    y is covered by sigma_U(y) when y lies in U, and otherwise (or if that
    point is too far out) by Newton iteration started at sigma_Z of the
    nearby point of Z.
    """
    res = GlueResult(False, m, None)
    for name, part, sigma in (("Z", data.gamma_Z, data.section_Z),
                              ("U", data.gamma_U, data.section_U)):
        if sigma is None or part is None:
            continue
        chk = check_section(part, sigma, field, samples, max(prec, 4), seed)
        if not chk.ok:
            res.sections_ok = False
            res.notes.append(f"section on {name} fails at {_fmt_point(chk.witness)}")
    emp = res.empirical
    chain = res.radii

    def fix(name, value, prev):
        emp[name] = value
        chain[name] = max(value, prev + 1)
        return chain[name]

    m1 = fix("m1", _z_radius_over_ball(data, field, m, prec, budget), m)
    if data.gamma_Z is None:
        pt = PointRep(data.section_Z.source_chart, data.section_Z.apply((), field=field))
        v2 = _radius(data.incl_Z.source, pt, field)
    elif data.section_Z is not None:
        v2 = _section_radius(data.gamma_Z, data.section_Z, field, m1, prec, budget)
    else:
        v2 = eff_surj_search(data.gamma_Z, field, m1, prec, cap=m1 + 8, floor=m1,
                             budget=budget).m_prime
    if v2 is None:
        res.notes.append("no m2 found on Z")
        return res
    m2 = fix("m2", v2, m1)
    m3 = fix("m3", continuity_modulus(data.incl_Z, field, m2, prec, budget=budget,
                                      modulus=False).m_image, m2)
    m4 = fix("m4", _local_ift_radius(data, field, m2, m3, prec, budget), m3)
    if data.retract is not None:
        v5, wit = _retract_coverage(data, field, m4, prec, budget)
    else:
        cov = coverage_check(data.gamma.target, field, m4, prec, data.U, data.to_U, data.Z,
                             budget=budget)
        v5, wit = cov.m_prime, cov.witness
    if v5 is None:
        res.notes.append("coverage by U and the neighbourhood of Z failed")
        res.witness = tuple(wit.coords) if wit is not None else None
        return res
    m5 = fix("m5", v5, m4)
    if data.section_U is not None:
        v6 = _section_radius(data.gamma_U, data.section_U, field, m5, prec, budget)
    else:
        v6 = eff_surj_search(data.gamma_U, field, m5, prec, cap=m5 + 8, floor=m5,
                             budget=budget).m_prime
    if v6 is None:
        res.notes.append("no m6 found on U; checking the final inclusion at m5 + 1")
        v6 = m5 + 1
    m6 = fix("m6", v6, m5)
    res.m_prime = m6
    witness = _final_inclusion(data, field, m, m6, prec, budget)
    res.witness = witness
    res.ok = witness is None and res.sections_ok
    if res.ok:
        res.minimal = eff_surj_search(data.gamma, field, m, prec, cap=m6, floor=m,
                                      newton_free=data.newton_free, confirm=False,
                                      budget=budget).m_prime
    return res


def _final_inclusion(data: GlueData, field, m, m_prime, prec, budget):
    """First cell of B_m^Y without a found preimage in B_{m'}^X, or None."""
    gamma = data.gamma
    X = gamma.source
    g = gamma.pieces[0][1]
    for y in _target_cells(gamma.target, field, m, prec, budget):
        ys = [c.lift() for c in y]
        if _cover_point(data, g, X, ys, m_prime, prec) is None:
            return y
    return None


def _cover_point(data: GlueData, g, X, ys, m_prime, prec):
    cands = []
    in_u = not poly_eval(data.u_equation, ys).is_zero()
    if in_u and data.section_U is not None and data.section_U.defined_at(ys):
        xu = data.section_U.apply(ys, 2 * prec + EXACT_CAP)
        cands.append(data.incl_U.apply(PointRep(data.section_U.source_chart, xu),
                                       2 * prec + EXACT_CAP))
    if data.section_Z is not None:
        field = ys[0].field
        zc = data.retract.evaluate(ys) if data.retract is not None else []
        if data.section_Z.defined_at(zc, field):
            xz = data.section_Z.apply(zc, field=field)
            start = _apply(data.incl_Z, PointRep(data.section_Z.source_chart, xz), field)
            cands.append(start)
            try:
                cert = newton_solve(g, start.coords, ys, m_prime, prec,
                                    free=data.newton_free, force=True, max_iter=prec + 8)
                if cert.success:
                    cands.append(PointRep(0, cert.final.coords))
            except EffTopError:
                pass
    for x in cands:
        img = g.evaluate(list(x.coords), None if g.is_polynomial else 2 * prec + EXACT_CAP)
        if any(not (a - b).truncate(prec).is_zero() for a, b in zip(img, ys)):
            continue
        lo, hi = radius_bounds(X, x)
        if hi <= m_prime:
            return x
    return None
