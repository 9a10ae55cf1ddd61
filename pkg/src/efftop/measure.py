"""Exact measures on balls, pushforwards, and the measure inequalities.

Masses are exact: every value is ``numerator * q**exponent``.  A ball is cut
into cosets of t^N O^d in chart coordinates; a cell is refined further only
when precision propagation cannot decide that it lies wholly inside or
outside the ball, that the density has constant absolute value on it, or
that its image lands in a single target cell.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Sequence

from .arith.field import FieldSpec
from .arith.series import LaurentSeries, format_series
from .errors import CellSplit, DensityNotUnit, EffTopError, ShapeError
from .geometry import (Chart, Membership, Morphism, MuRectifiedVariety, PointRep,
                       RectifiedVariety, Subvariety, ball_grid, box_points, cell_status,
                       near_subvariety, radius_bounds, subdivide)
from .polyalg import poly_eval

log = logging.getLogger(__name__)

DEFAULT_REFINE = 10


@dataclass(frozen=True)
class MeasureValue:
    """Exact rational ``num * q**exp`` in normalized form (num not divisible by q)."""

    num: int
    exp: int
    q: int

    def __post_init__(self):
        n, e = self.num, self.exp
        if n == 0:
            e = 0
        else:
            while n % self.q == 0:
                n //= self.q
                e += 1
        object.__setattr__(self, "num", n)
        object.__setattr__(self, "exp", e)

    @classmethod
    def zero(cls, q: int) -> MeasureValue:
        return cls(0, 0, q)

    @classmethod
    def power(cls, q: int, e: int) -> MeasureValue:
        return cls(1, e, q)

    @classmethod
    def from_fraction(cls, value, q: int) -> MeasureValue:
        """Exact conversion; the denominator must be a power of q."""
        fr = Fraction(value)
        den, e = fr.denominator, 0
        while den % q == 0:
            den //= q
            e -= 1
        if den != 1:
            raise ValueError(f"{fr} is not an integer times a power of {q}")
        return cls(fr.numerator, e, q)

    def __add__(self, other: MeasureValue) -> MeasureValue:
        if self.q != other.q:
            raise ShapeError("measure values for different q")
        if self.num == 0:
            return other
        if other.num == 0:
            return self
        e = min(self.exp, other.exp)
        n = self.num * self.q ** (self.exp - e) + other.num * other.q ** (other.exp - e)
        return MeasureValue(n, e, self.q)

    def __neg__(self):
        return MeasureValue(-self.num, self.exp, self.q)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MeasureValue):
            return MeasureValue(self.num * other.num, self.exp + other.exp, self.q)
        if isinstance(other, int):
            return MeasureValue(self.num * other, self.exp, self.q)
        return NotImplemented

    __rmul__ = __mul__

    def shift(self, k: int) -> MeasureValue:
        """Multiply by q**k."""
        return MeasureValue(self.num, self.exp + k, self.q)

    def as_fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.num * self.q ** self.exp)
        return Fraction(self.num, self.q ** (-self.exp))

    def __lt__(self, other):
        return self.as_fraction() < _frac(other)

    def __le__(self, other):
        return self.as_fraction() <= _frac(other)

    def __gt__(self, other):
        return self.as_fraction() > _frac(other)

    def __ge__(self, other):
        return self.as_fraction() >= _frac(other)

    def is_zero(self) -> bool:
        return self.num == 0

    def __str__(self):
        return str(self.as_fraction())


def _frac(x) -> Fraction:
    return x.as_fraction() if isinstance(x, MeasureValue) else Fraction(x)


# -- cell level -------------------------------------------------------------------------------

def density_abs(density, coords, level, field) -> MeasureValue | None:
    """|g| on a cell as q**(-val g), or None if not constant at this precision."""
    num, den = density
    lifted = [c.lift(level) for c in coords]
    a = poly_eval(num, lifted, field)
    b = poly_eval(den, lifted, field)
    if a.is_zero() or b.is_zero():
        return None
    return MeasureValue.power(field.q, -(a.val - b.val))


def cell_measure(chart: Chart, density, field: FieldSpec, coords: Sequence[LaurentSeries],
                 level: int, r: int, refine: int = DEFAULT_REFINE) -> MeasureValue:
    """mu_r-mass of the cell coords + t^level O^d within one chart."""
    d = chart.dim
    status = cell_status(chart, coords, level, r, field)
    if status is Membership.OUT:
        return MeasureValue.zero(field.q)
    if status is Membership.IN:
        g = density_abs(density, coords, level, field)
        if g is not None:
            return g.shift(-level * d)
        if refine <= 0:
            raise DensityNotUnit(f"density not a unit near {_cell_label(coords, level)}")
    elif refine <= 0:
        raise CellSplit(f"cell {_cell_label(coords, level)} straddles the ball boundary")
    total = MeasureValue.zero(field.q)
    for child in subdivide(field, coords, level):
        total = total + cell_measure(chart, density, field, child, level + 1, r, refine - 1)
    return total


def _cell_label(coords, level) -> str:
    return "(" + ", ".join(format_series(c.lift(level)) for c in coords) + ")"


def ball_measure(X: MuRectifiedVariety, field: FieldSpec, m: int, prec: int,
                 refine: int = DEFAULT_REFINE, budget: int | None = None,
                 check_stability: bool = False) -> MeasureValue:
    """mu_m(B_m) summed over charts (overlaps counted once per chart)."""
    total = MeasureValue.zero(field.q)
    for chart, dens in zip(X.charts, X.densities):
        for coords in box_points(field, X.dim, m, prec, budget):
            total = total + cell_measure(chart, dens, field, coords, prec, m, refine)
    if check_stability:
        again = ball_measure(X, field, m, prec + 1, refine, budget)
        if again != total:
            raise EffTopError(f"ball measure changed between precisions {prec} and {prec + 1}")
    return total


# -- pushforward ---------------------------------------------------------------------------------

@dataclass
class DensityTable:
    """Pushforward masses on target cells t^N O^d (chart coordinates of the target)."""

    q: int
    level: int
    masses: dict = dc_field(default_factory=dict)
    target_chart: int = 0
    source_total: MeasureValue | None = None

    @property
    def total(self) -> MeasureValue:
        tot = MeasureValue.zero(self.q)
        for v in self.masses.values():
            tot = tot + v
        return tot

    def get(self, key) -> MeasureValue:
        return self.masses.get(key, MeasureValue.zero(self.q))

    def add(self, key, value: MeasureValue):
        if value.is_zero():
            return
        self.masses[key] = self.get(key) + value

    def merge(self, other: DensityTable) -> None:
        for k, v in other.masses.items():
            self.add(k, v)

    def sorted_items(self):
        return sorted(self.masses.items(), key=lambda kv: cell_sort_key(kv[0]))

    def to_text(self) -> str:
        """Delimited table: chart, cell representative, numerator, q-exponent."""
        lines = ["chart\tcell\tnumerator\tq_exponent"]
        for key, v in self.sorted_items():
            lines.append(f"{self.target_chart}\t{format_cell(key)}\t{v.num}\t{v.exp}")
        return "\n".join(lines) + "\n"


def cell_sort_key(key):
    return tuple((c.val if not c.is_zero() else 10 ** 9, c._c) for c in key)


def format_cell(key) -> str:
    return "(" + ", ".join(format_series(c) for c in key) + ")"


Weight = Callable[[Sequence[LaurentSeries], int], "MeasureValue | None"]


def pushforward_density(gamma: Morphism, source: MuRectifiedVariety, field: FieldSpec, m: int,
                        prec: int, weight: Weight | None = None, refine: int = DEFAULT_REFINE,
                        budget: int | None = None, workers: int = 1,
                        source_level: int | None = None) -> DensityTable:
    """gamma_*(g mu_m) on target cells modulo t^prec.

    Each source cell is refined until it is wholly inside or outside B_m, the
    density (and weight g) is constant on it, and its image is known modulo
    t^prec; its mass is then credited to that single target cell.
    """
    from .scan import parallel_map

    targets = {b for b, _ in gamma.pieces}
    if len(targets) != 1:
        raise ShapeError("pushforward tables need a single target chart")
    level0 = prec if source_level is None else source_level
    tasks = []
    for a, (chart, dens) in enumerate(zip(source.charts, source.densities)):
        for coords in box_points(field, source.dim, m, level0, budget):
            tasks.append((gamma, a, chart, dens, field, coords, level0, m, prec, weight, refine))
    parts = parallel_map(_push_task, tasks, workers)
    table = DensityTable(field.q, prec, target_chart=targets.pop())
    for part in parts:
        for key, v in part:
            table.add(key, v)
    return table


def _push_task(args):
    gamma, a, chart, dens, field, coords, level, m, prec, weight, refine = args
    out: list = []
    _push_cell(gamma, a, chart, dens, field, coords, level, m, prec, weight, refine, out)
    return out


def _push_cell(gamma, a, chart, dens, field, coords, level, m, prec, weight, refine, out):
    status = cell_status(chart, coords, level, m, field)
    if status is Membership.OUT:
        return
    ok = status is Membership.IN
    g = w = key = None
    if ok:
        g = density_abs(dens, coords, level, field)
        ok = g is not None
    if ok and weight is not None:
        w = weight(coords, level)
        ok = w is not None
    if ok:
        key = _image_key(gamma, a, coords, level, prec, field)
        ok = key is not None
    if ok:
        mass = g.shift(-level * chart.dim)
        if w is not None:
            mass = mass * w
        if not mass.is_zero():
            out.append((key, mass))
        return
    if refine <= 0:
        if status is Membership.IN and g is None:
            raise DensityNotUnit(f"density not a unit near {_cell_label(coords, level)}")
        raise CellSplit(f"source cell {_cell_label(coords, level)} does not map into a single "
                        f"target cell at precision {prec}")
    for child in subdivide(field, coords, level):
        _push_cell(gamma, a, chart, dens, field, child, level + 1, m, prec, weight, refine - 1, out)


def _image_key(gamma: Morphism, a: int, coords, level: int, prec: int, field):
    b, g = gamma.pieces[a]
    lifted = [c.lift(level) for c in coords]
    if not g.is_polynomial:
        den = poly_eval(g.denom, lifted, field)
        if den.is_zero():
            return None
    try:
        img = g.evaluate(lifted, prec, field)
    except (ArithmeticError, EffTopError):
        return None
    if any(v.prec < prec for v in img):
        return None
    return tuple(v.truncate(prec) for v in img)


# -- inequality verifiers -------------------------------------------------------------------

@dataclass
class BoundResult:
    """Outcome of an exponent search: the minimal exponent, or None with a witness cell."""

    exponent: int | None
    margin: Fraction | None = None
    witness: tuple | None = None
    ties: int = 0
    cells: int = 0
    note: str = ""

    @property
    def found(self) -> bool:
        return self.exponent is not None


def target_cell_measure(Y: MuRectifiedVariety, chart: int, key, level: int, r: int,
                        field: FieldSpec, refine: int = DEFAULT_REFINE) -> MeasureValue:
    return cell_measure(Y.charts[chart], Y.densities[chart], field, [c.lift() for c in key],
                        level, r, refine)


def _require_simple(Y: MuRectifiedVariety):
    if len(Y.charts) != 1:
        raise ShapeError("measure inequalities are verified against simply rectified targets")


def verify_upper_bound(gamma: Morphism, X: MuRectifiedVariety, Y: MuRectifiedVariety,
                       field: FieldSpec, m: int, prec: int, cap: int = 12,
                       refine: int = DEFAULT_REFINE, budget: int | None = None,
                       workers: int = 1, floor: int = 0) -> BoundResult:
    """Least m' with gamma_*(mu_m) < q^m' mu_m' on every target cell carrying mass."""
    _require_simple(Y)
    table = pushforward_density(gamma, X, field, m, prec, refine=refine, budget=budget,
                                workers=workers)
    last_bad = None
    for mp in range(floor, cap + 1):
        ok, margin, ties = True, Fraction(0), 0
        for key, mass in table.sorted_items():
            rhs = target_cell_measure(Y, table.target_chart, key, prec, mp, field, refine).shift(mp)
            lhs, rv = mass.as_fraction(), rhs.as_fraction()
            if lhs == rv:
                ties += 1
            if not lhs < rv:
                ok, last_bad = False, key
                break
            margin = max(margin, lhs / rv)
        if ok:
            return BoundResult(mp, margin, ties=ties, cells=len(table.masses))
    return BoundResult(None, witness=last_bad, note=f"no exponent up to {cap}")


def verify_support_lower_bound(gamma: Morphism, X: MuRectifiedVariety, Y: MuRectifiedVariety,
                               field: FieldSpec, m: int, m_src: int, prec: int, cap: int = 12,
                               refine: int = DEFAULT_REFINE, budget: int | None = None,
                               workers: int = 1) -> BoundResult:
    """Least M >= 1 with mu_m < q^M gamma_*(mu_m_src) on the support of the pushforward."""
    _require_simple(Y)
    table = pushforward_density(gamma, X, field, m_src, prec, refine=refine, budget=budget,
                                workers=workers)
    lhs_cache = {key: target_cell_measure(Y, table.target_chart, key, prec, m, field, refine)
                 for key, _ in table.sorted_items()}
    last_bad = None
    for M in range(1, cap + 1):
        ok, margin = True, Fraction(0)
        for key, mass in table.sorted_items():
            lhs = lhs_cache[key].as_fraction()
            rhs = mass.shift(M).as_fraction()
            if not lhs < rhs:
                ok, last_bad = False, key
                break
            margin = max(margin, lhs / rhs)
        if ok:
            return BoundResult(M, margin, cells=len(table.masses))
    return BoundResult(None, witness=last_bad, note=f"no exponent up to {cap}")


def verify_total_mass(X: MuRectifiedVariety, field: FieldSpec, m: int, prec: int, cap: int = 64,
                      refine: int = DEFAULT_REFINE, budget: int | None = None) -> BoundResult:
    """Least M >= 1 with mu_m(B_m) < q^M."""
    total = ball_measure(X, field, m, prec, refine, budget)
    for M in range(1, cap + 1):
        if total < MeasureValue.power(field.q, M):
            return BoundResult(M, total.as_fraction() / field.q ** M)
    return BoundResult(None, note=f"total mass {total} not below q^{cap}")


def verify_pushforward_lower_bound(gamma: Morphism, X: MuRectifiedVariety,
                                   Y: MuRectifiedVariety, field: FieldSpec, m: int, prec: int,
                                   cap: int = 8, refine: int = DEFAULT_REFINE,
                                   budget: int | None = None, workers: int = 1,
                                   floor: int = 0) -> BoundResult:
    """Least m' with mu_m < q^m' gamma_*(mu_m') on every cell of B_m of the target."""
    _require_simple(Y)
    ychart, ydens = Y.charts[0], Y.densities[0]
    targets = []
    for coords in box_points(field, Y.dim, m, prec, budget):
        mu = cell_measure(ychart, ydens, field, coords, prec, m, refine)
        if not mu.is_zero():
            targets.append((tuple(c.lift(prec) for c in coords), mu))
    last_bad = None
    for mp in range(floor, cap + 1):
        table = pushforward_density(gamma, X, field, mp, prec, refine=refine, budget=budget,
                                    workers=workers)
        ok, margin = True, Fraction(0)
        for key, mu in targets:
            lhs = mu.as_fraction()
            rhs = table.get(key).shift(mp).as_fraction()
            if not lhs < rhs:
                ok, last_bad = False, key
                break
            margin = max(margin, lhs / rhs)
        if ok:
            return BoundResult(mp, margin, cells=len(targets))
    return BoundResult(None, witness=last_bad, note=f"no exponent up to {cap}")


# -- coverage of a ball by an open subset and a neighbourhood of its complement ------------------

@dataclass
class CoverageResult:
    m_prime: int | None
    witness: PointRep | None = None
    grid_size: int = 0


def coverage_check(X: RectifiedVariety, field: FieldSpec, m: int, prec: int,
                   U: RectifiedVariety | None, to_U: Morphism | None, Z: Subvariety,
                   m_prime: int | None = None, budget: int | None = None) -> CoverageResult:
    """Least m' with every grid point of B_m^X in B_m'^U or in B_-m^X(Z).

    With ``m_prime`` given, checks that value instead and returns a witness on
    failure.  ``to_U`` expresses points of X in U's charts (the identity on
    the underlying variety); points outside U must be caught by Z.
    """
    grid = ball_grid(X, field, m, prec, budget)
    need = 0
    for x in grid:
        status, _ = near_subvariety(X, Z, x, -m, budget=budget)
        if status is Membership.IN:
            continue
        if U is None or to_U is None:
            return CoverageResult(None, x, len(grid))
        xu, st = _to_open(U, to_U, x, field)
        if st is not Membership.IN:
            return CoverageResult(None, x, len(grid))
        lo, hi = radius_bounds(U, xu)
        if lo != hi:
            return CoverageResult(None, x, len(grid))
        if m_prime is not None and hi > m_prime:
            return CoverageResult(None, x, len(grid))
        need = max(need, int(hi))
    return CoverageResult(need if m_prime is None else m_prime, None, len(grid))


def _to_open(U: RectifiedVariety, to_U: Morphism, x: PointRep, field):
    b, g = to_U.pieces[x.chart]
    if not g.is_polynomial:
        den = poly_eval(g.denom, list(x.coords), field)
        if den.is_zero():
            return None, Membership.OUT
    y = to_U.apply(x)
    for p in U.charts[y.chart].inverted:
        if poly_eval(p, list(y.coords), field).is_zero():
            return None, Membership.OUT
    return y, Membership.IN

