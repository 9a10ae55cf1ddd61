"""Locally constant functions on cell grids: smoothness radii and pushforwards.

A function is stored extensionally: exact rational values on the cells
x + t^N O^d of a box (t^-R O)^d in one chart, zero on every cell not listed
and outside the box.  Smoothness is measured in the chart's ambient
coordinates by default, which treats the table as extended by zero to the
whole affine space; the intrinsic metric of a rectified chart is available
as an option.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Sequence

from .arith.field import FieldSpec
from .arith.series import INF, LaurentSeries
from .errors import CellSplit, DensityNotUnit, EffTopError, ShapeError
from .geometry import (Membership, Morphism, MuRectifiedVariety, RectifiedVariety, box_points,
                       cell_status, chart_offset, chart_radius)
from .hensel import isolate_roots
from .measure import (DEFAULT_REFINE, DensityTable, MeasureValue, cell_measure, density_abs,
                      format_cell, pushforward_density)
from .polyalg import MultiPoly, RationalMap, poly_eval

log = logging.getLogger(__name__)


def _key(coords: Sequence[LaurentSeries], level: int) -> tuple[LaurentSeries, ...]:
    return tuple(c.truncate(level) for c in coords)


@dataclass
class LocallyConstantFn:
    """Exact values on the cells modulo t^level of the box (t^-box O)^dim; zero elsewhere."""

    field: FieldSpec
    dim: int
    level: int
    values: dict = dc_field(default_factory=dict)
    box: int = 0
    chart: int = 0
    declared_radius: int | None = None

    def __post_init__(self):
        if self.level < -self.box:
            raise ShapeError("grid level below the box radius")
        self.values = {k: Fraction(v) for k, v in self.values.items() if v != 0}

    @classmethod
    def from_function(cls, field: FieldSpec, dim: int, box: int, level: int,
                      fn: Callable[[tuple[LaurentSeries, ...]], object],
                      budget: int | None = None, **kw) -> LocallyConstantFn:
        """Tabulate fn at the exact representative of every cell."""
        vals = {}
        for coords in box_points(field, dim, box, level, budget):
            v = fn(coords)
            if v:
                vals[_key(coords, level)] = Fraction(v)
        return cls(field, dim, level, vals, box, **kw)

    def key(self, coords: Sequence[LaurentSeries]) -> tuple[LaurentSeries, ...]:
        return _key(coords, self.level)

    def __call__(self, coords: Sequence[LaurentSeries]) -> Fraction:
        return self.values.get(self.key(coords), Fraction(0))

    def _compatible(self, other: LocallyConstantFn):
        if (self.field, self.dim, self.level, self.chart) != (other.field, other.dim,
                                                               other.level, other.chart):
            raise ShapeError("functions live on different grids")

    def __add__(self, other: LocallyConstantFn) -> LocallyConstantFn:
        self._compatible(other)
        vals = dict(self.values)
        for k, v in other.values.items():
            vals[k] = vals.get(k, 0) + v
        return LocallyConstantFn(self.field, self.dim, self.level, vals,
                                 max(self.box, other.box), self.chart)

    def scale(self, c) -> LocallyConstantFn:
        return LocallyConstantFn(self.field, self.dim, self.level,
                                 {k: v * Fraction(c) for k, v in self.values.items()},
                                 self.box, self.chart, self.declared_radius)

    def refine(self, level: int) -> LocallyConstantFn:
        """The same function tabulated on the finer grid modulo t^level."""
        if level < self.level:
            raise ShapeError("refinement must not coarsen the grid")
        vals = {}
        for k, v in self.values.items():
            for cell in _subcells(self.field, self.dim, k, self.level, level):
                vals[_key(cell, level)] = v
        return LocallyConstantFn(self.field, self.dim, level, vals, self.box, self.chart,
                                 self.declared_radius)

    def __eq__(self, other):
        if not isinstance(other, LocallyConstantFn):
            return NotImplemented
        return (self.field, self.dim, self.level, self.chart, self.values) == (
            other.field, other.dim, other.level, other.chart, other.values)

    def sorted_items(self):
        return sorted(self.values.items(), key=lambda kv: _cell_order(kv[0]))

    def to_text(self) -> str:
        """Delimited table: chart, cell representative, signed exact value."""
        lines = ["chart\tcell\tvalue"]
        for k, v in self.sorted_items():
            lines.append(f"{self.chart}\t{format_cell(k)}\t{v}")
        return "\n".join(lines) + "\n"


def _cell_order(key):
    return tuple((c.val if not c.is_zero() else 10 ** 9, c._c) for c in key)


# -- smoothness radius ---------------------------------------------------------------------------

@dataclass
class SmoothnessResult:
    """radius is None when the function is not smooth at any radius below the grid level."""

    radius: int | None
    level: int
    witness: tuple | None = None
    undecided_pairs: int = 0

    @property
    def smooth(self) -> bool:
        return self.radius is not None

    def describe(self) -> str:
        return str(self.radius) if self.smooth else f"NotSmoothAtPrec({self.level})"


def _subcells(field: FieldSpec, dim: int, key, lo: int, hi: int):
    """Exact representatives of the cells modulo t^hi inside key + t^lo O^dim."""
    for fine in box_points(field, dim, -lo, hi):
        yield tuple(a.lift() + b for a, b in zip(key, fine))


def _class_cells(f: LocallyConstantFn, cls_key, m: int):
    return _subcells(f.field, f.dim, cls_key, m, f.level)


def _ambient_violation(f: LocallyConstantFn, m: int):
    """A pair of cells in one class mod t^m with different values, or None."""
    full = f.field.q ** (f.dim * (f.level - m))
    groups: dict = {}
    for k, v in f.values.items():
        groups.setdefault(_key(k, m), []).append((k, v))
    for ck, members in groups.items():
        first_k, first_v = members[0]
        for k, v in members[1:]:
            if v != first_v:
                return first_k, k
        if len(members) < full:
            present = {k for k, _ in members}
            for cell in _class_cells(f, ck, m):
                if f.key(cell) not in present:
                    return first_k, f.key(cell)
    return None


def _intrinsic_violation(f: LocallyConstantFn, X: RectifiedVariety, m: int):
    chart = X.charts[f.chart]
    groups: dict = {}
    for coords in box_points(f.field, f.dim, f.box, f.level):
        lifted = [c.lift(f.level) for c in coords]
        rb = chart_radius(chart, lifted, f.field)
        if rb is None or rb[1] == INF:
            continue
        groups.setdefault(_key(coords, m), []).append((lifted, f(coords)))
    undecided = 0
    for members in groups.values():
        for i, (xa, va) in enumerate(members):
            for xb, vb in members[i + 1:]:
                if va == vb:
                    continue
                ob = chart_offset(chart, xa, xb, f.field)
                if ob is None or ob[1] < m:
                    continue
                if ob[0] < m:
                    undecided += 1
                return (f.key(xa), f.key(xb)), undecided
    return None, undecided


def smoothness_radius(f: LocallyConstantFn, metric: str = "ambient",
                      X: RectifiedVariety | None = None) -> SmoothnessResult:
    """Minimal m with f constant on every centered ball B_{-m}(x) of the grid.

    The search starts at -box, where the ball is the whole box.  Reaching
    m = level means the grid cannot tell the function apart from a
    non-smooth one, reported as NotSmoothAtPrec.
    """
    if metric not in ("ambient", "intrinsic"):
        raise ShapeError(f"unknown metric {metric!r}")
    if metric == "intrinsic" and X is None:
        raise ShapeError("the intrinsic metric needs the rectified variety")
    witness = None
    undecided = 0
    for m in range(-f.box, f.level + 1):
        if metric == "ambient":
            bad = _ambient_violation(f, m)
        else:
            bad, u = _intrinsic_violation(f, X, m)
            undecided += u
        if bad is None:
            if m == f.level and m > -f.box:
                return SmoothnessResult(None, f.level, witness, undecided)
            return SmoothnessResult(m, f.level, witness, undecided)
        witness = bad
    raise EffTopError("smoothness scan ended without a decision")


@dataclass
class MinCriterionResult:
    holds: bool
    m: int
    witness: tuple | None = None
    radius: SmoothnessResult | None = None


def min_criterion_check(f: LocallyConstantFn, m: int | None = None) -> MinCriterionResult:
    """Whether min f(B_{-m}(x)) = f(x) at every point (ambient balls, f extended by zero).

    When it holds, f must be m-smooth; that consequence is re-checked
    against the direct radius measurement and a mismatch raises.
    """
    m = f.declared_radius if m is None else m
    if m is None:
        raise ShapeError("no radius given")
    full = f.field.q ** (f.dim * (f.level - m))
    groups: dict = {}
    for k, v in f.values.items():
        groups.setdefault(_key(k, m), []).append((k, v))
    witness = None
    for ck, members in groups.items():
        low = min(v for _, v in members)
        if len(members) < full:
            low = min(low, Fraction(0))
        bad = [k for k, v in members if v != low]
        if bad:
            witness = (bad[0], low)
            break
        if len(members) < full and low != 0:
            present = {k for k, _ in members}
            cell = next(f.key(c) for c in _class_cells(f, ck, m) if f.key(c) not in present)
            witness = (cell, low)
            break
    holds = witness is None
    rad = smoothness_radius(f)
    if holds and m < f.level and (rad.radius is None or rad.radius > m):
        raise EffTopError("min-criterion holds but the function is not smooth at that radius")
    return MinCriterionResult(holds, m, witness, rad)


def abs_unit_smoothness(fpoly: MultiPoly, X: RectifiedVariety, field: FieldSpec, m: int,
                        prec: int, chart: int = 0, metric: str = "ambient",
                        budget: int | None = None) -> tuple[SmoothnessResult, LocallyConstantFn]:
    """Smoothness radius of x -> |f(x)| 1_{B_m}(x) tabulated modulo t^prec."""
    ch = X.charts[chart]
    vals = {}
    for coords in box_points(field, X.dim, m, prec, budget):
        st = cell_status(ch, coords, prec, m, field)
        if st is Membership.OUT:
            continue
        if st is Membership.INCONCLUSIVE:
            raise CellSplit("grid cell straddles the ball boundary; raise the precision")
        v = poly_eval(fpoly, [c.lift(prec) for c in coords], field)
        if v.is_zero():
            raise DensityNotUnit(f"f vanishes modulo t^{v.prec} on cell {format_cell(coords)}")
        vals[_key(coords, prec)] = Fraction(field.q) ** (-v.val)
    table = LocallyConstantFn(field, X.dim, prec, vals, m, chart)
    return smoothness_radius(table, metric, X), table


# -- pushforwards --------------------------------------------------------------------------------

def _prefix_filter(g: LocallyConstantFn):
    """allowed(center, level) for root isolation: does the cell meet the support of g?"""
    prefixes: dict[int, set] = {}
    for L in range(-g.box, g.level + 1):
        prefixes[L] = {_key(k, L) for k in g.values}

    def allowed(center, level):
        if level >= g.level:
            return _key(center, g.level) in prefixes[g.level]
        if level < -g.box:
            return True
        return _key(center, level) in prefixes[level]
    return allowed


def _fiber_system(gamma: RationalMap) -> list[MultiPoly]:
    """h_s(x) - y_s f(x)^M in the variables (x, y)."""
    d, e = gamma.source_dim, gamma.target_dim
    n = d + e
    polys = []
    fM = gamma.denom.extend(n) ** gamma.power
    for s, h in enumerate(gamma.numerators):
        polys.append(h.extend(n) - MultiPoly.var(n, gamma.ell, d + s) * fM)
    return polys


@dataclass
class PushforwardFn:
    f: LocallyConstantFn
    radius: SmoothnessResult
    fibers: int = 0


def pushforward_fn_etale(gamma, g: LocallyConstantFn, field: FieldSpec, prec: int,
                         target_box: int | None = None, max_extra: int = 12,
                         budget: int | None = None) -> PushforwardFn:
    """f(y) = sum of g over the points of gamma^{-1}(y) (with g supported in B_m).

    gamma is a square RationalMap (or a single-piece Morphism) etale on the
    support of g.  Every target cell of (t^-box O)^e modulo t^prec is solved
    for its fiber by certified root isolation restricted to cells meeting the
    support of g.
    """
    if isinstance(gamma, Morphism):
        gamma = gamma.pieces[g.chart][1]
    if gamma.source_dim != gamma.target_dim:
        raise ShapeError("etale pushforward needs a square map")
    e = gamma.target_dim
    if target_box is None:
        target_box = 0
        for k in g.values:
            img = gamma.evaluate([c.lift() for c in k], prec + 8, field)
            target_box = max([target_box] + [-v.val for v in img if not v.is_zero()])
    polys = _fiber_system(gamma)
    allowed = _prefix_filter(g)
    start = tuple(LaurentSeries.zero(field) for _ in range(g.dim))
    vals = {}
    fibers = 0
    for y in box_points(field, e, target_box, prec, budget):
        roots = isolate_roots(polys, g.dim, y, start, -g.box, g.level, g.level + max_extra,
                              field, budget, allowed)
        total = Fraction(0)
        for cell in roots:
            x = cell.approx()
            if not gamma.is_polynomial and poly_eval(gamma.denom, list(x), field).is_zero():
                continue
            total += g(x)
            fibers += 1
        if total:
            vals[_key(y, prec)] = total
    f = LocallyConstantFn(field, e, prec, vals, target_box)
    return PushforwardFn(f, smoothness_radius(f), fibers)


class TableWeight:
    """Weight callable for pushforward_density reading values from a LocallyConstantFn."""

    def __init__(self, g: LocallyConstantFn):
        self.g = g

    def __call__(self, coords, level):
        if level < self.g.level:
            return None
        return MeasureValue.from_fraction(self.g(coords), self.g.field.q)


@dataclass
class SmoothPushforward:
    f: LocallyConstantFn
    m_prime: int | None
    radius: SmoothnessResult
    ball_radius: int | None
    table: DensityTable
    verified: bool


def pushforward_measure_smooth(gamma: Morphism, X: MuRectifiedVariety, Y: MuRectifiedVariety,
                               field: FieldSpec, m: int, prec: int,
                               g: LocallyConstantFn | None = None,
                               refine: int = DEFAULT_REFINE, budget: int | None = None,
                               workers: int = 1) -> SmoothPushforward:
    """Write gamma_*(g mu_m^X) as f mu_{m'}^Y and check the identity cell by cell.

    f on a target cell is its pushforward mass divided by its mu^Y mass; m'
    is the larger of the measured smoothness radius of f and the smallest
    ball radius containing the support.  The identity is then re-checked
    exactly on every cell against mu_{m'}^Y.
    """
    if len(Y.charts) != 1:
        raise ShapeError("the target must be simply rectified")
    weight = TableWeight(g) if g is not None else None
    level0 = prec if g is None else max(prec, g.level)
    table = pushforward_density(gamma, X, field, m, prec, weight, refine, budget, workers,
                                source_level=level0)
    chart, dens = Y.charts[0], Y.densities[0]
    e = Y.dim
    vals = {}
    ball = None
    box = 0
    for key, mass in table.masses.items():
        lifted = [c.lift(prec) for c in key]
        w = density_abs(dens, lifted, prec, field)
        if w is None:
            raise DensityNotUnit(f"target form not a unit on {format_cell(key)}")
        unit = w.shift(-prec * e)
        vals[key] = mass.as_fraction() / unit.as_fraction()
        rb = chart_radius(chart, lifted, field)
        if rb is None or rb[1] == INF:
            raise CellSplit(f"target cell {format_cell(key)} leaves the target chart")
        ball = rb[1] if ball is None else max(ball, rb[1])
        box = max([box] + [-c.val for c in key if not c.is_zero()])
    f = LocallyConstantFn(field, e, prec, vals, box)
    rad = smoothness_radius(f)
    if ball is None:
        ball = -box
    m_prime = max(rad.radius, int(ball)) if rad.smooth else None
    verified = False
    if m_prime is not None:
        verified = all(
            MeasureValue.from_fraction(v, field.q) * cell_measure(
                chart, dens, field, [c.lift() for c in k], prec, m_prime, refine)
            == table.get(k) for k, v in f.values.items())
    return SmoothPushforward(f, m_prime, rad, int(ball), table, verified)
