"""Rectified varieties, their balls and grid scans over them.

A chart has intrinsic coordinates x (an open piece of affine d-space) and a
closed embedding

    x -> (x, g_1(x), ..., g_a(x), 1/p_1(x), ..., 1/p_b(x))

into affine space.  This covers affine spaces, principal opens with their
standard embedding x -> (x, 1/f(x)), graph charts and the universal family of
monic polynomials.  Balls use a single integer *valuative radius* r: a point
lies in B_r when some chart embeds it with every coordinate of valuation
>= -r, and y lies in B_r(x) when the embedded offsets i(y) - i(x) all have
valuation >= -r in a chart containing both.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from typing import Iterator, Sequence

from .arith.enumerate import check_budget, digit_tuples
from .arith.field import FieldSpec
from .arith.series import INF, LaurentSeries
from .errors import PrecisionLoss, ShapeError
from .polyalg import MultiPoly, RationalMap, jacobian, poly_eval

NEG_INF = -math.inf

# precision used when exact points are pushed through rational transitions
EXACT_CAP = 48


class Membership(enum.Enum):
    IN = "In"
    OUT = "Out"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


# -- charts -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    """One piece of a rectification.

    ``extra`` lists bound ambient coordinates as polynomials in the intrinsic
    coordinates; ``inverted`` lists polynomials whose inverses are embedded
    (the chart domain is where they do not vanish).  ``equations`` are the
    defining polynomials of a graph chart in ambient coordinates, kept for
    validation only.
    """

    dim: int
    ell: int
    extra: tuple[MultiPoly, ...] = ()
    inverted: tuple[MultiPoly, ...] = ()
    kind: str = "affine"
    label: str = ""
    equations: tuple[MultiPoly, ...] = ()

    def __post_init__(self):
        for p in self.extra + self.inverted:
            if p.nvars != self.dim:
                raise ShapeError("chart polynomials must live in the intrinsic coordinates")
            if p.ell != self.ell:
                raise ShapeError("chart polynomials over a different prime")
        for p in self.inverted:
            if p.is_zero():
                raise ShapeError("a principal open needs a nonzero polynomial")

    @property
    def embedding_dim(self) -> int:
        return self.dim + len(self.extra) + len(self.inverted)

    def embed(self, coords: Sequence[LaurentSeries], prec=None,
              field: FieldSpec | None = None) -> list[LaurentSeries]:
        """Embedded coordinates; inverses are computed to at most ``prec``."""
        coords = list(coords)
        out = coords + [poly_eval(g, coords, field) for g in self.extra]
        fld = field or coords[0].field
        for p in self.inverted:
            v = poly_eval(p, coords, fld)
            cap = prec
            if cap is None and v.is_exact and len(v._c) > 1:
                cap = EXACT_CAP
            out.append(LaurentSeries.one(fld).div(v, cap))
        return out

    def ambient_values(self, coords, field=None):
        """(plain values, inverted-polynomial values) without any division."""
        coords = list(coords)
        plain = coords + [poly_eval(g, coords, field) for g in self.extra]
        inv = [poly_eval(p, coords, field) for p in self.inverted]
        return plain, inv


def affine_space(d: int, ell: int) -> Chart:
    return Chart(d, ell, kind="affine", label=f"A{d}")


def principal_open(d: int, f: MultiPoly, label: str = "") -> Chart:
    """(A^d)_f with its standard embedding x -> (x, 1/f(x))."""
    return Chart(d, f.ell, inverted=(f,), kind="principal", label=label or f"(A{d})_f")


def graph_chart(ambient: int, free: Sequence[int], graph: Sequence[MultiPoly],
                inverted: Sequence[MultiPoly] = (), label: str = "") -> Chart:
    """Subvariety of A^ambient where coordinates outside ``free`` are polynomials of the free ones."""
    free = tuple(free)
    bound = [j for j in range(ambient) if j not in free]
    if len(bound) != len(graph) or len(set(free)) != len(free):
        raise ShapeError("free and bound coordinates must partition the ambient coordinates")
    ell = graph[0].ell if graph else (inverted[0].ell if inverted else None)
    if ell is None:
        raise ShapeError("graph chart needs at least one polynomial to fix the prime")
    d = len(free)
    eqs = []
    for j, g in zip(bound, graph):
        lifted = g.extend(ambient, free)
        eqs.append(MultiPoly.var(ambient, ell, j) - lifted)
    return Chart(d, ell, extra=tuple(graph), inverted=tuple(inverted), kind="graph",
                 label=label or f"graph in A{ambient}", equations=tuple(eqs))


def embedded_chart(d: int, ell: int, extra: Sequence[MultiPoly] = (),
                   inverted: Sequence[MultiPoly] = (), label: str = "") -> Chart:
    return Chart(d, ell, extra=tuple(extra), inverted=tuple(inverted), kind="embedded",
                 label=label)


# -- varieties ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RectifiedVariety:
    charts: tuple[Chart, ...]
    transitions: tuple[tuple[tuple[int, int], RationalMap], ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        if not self.charts:
            raise ShapeError("a rectification needs at least one chart")
        if len({c.dim for c in self.charts}) != 1:
            raise ShapeError("charts must share their intrinsic dimension")
        trans = self.transitions
        if isinstance(trans, dict):
            trans = tuple(sorted(trans.items()))
        object.__setattr__(self, "transitions", tuple(trans))

    @property
    def dim(self) -> int:
        return self.charts[0].dim

    @property
    def ell(self) -> int:
        return self.charts[0].ell

    @property
    def is_simple(self) -> bool:
        return len(self.charts) == 1

    def transition(self, a: int, b: int) -> RationalMap | None:
        for key, tmap in self.transitions:
            if key == (a, b):
                return tmap
        return None


@dataclass(frozen=True)
class MuRectifiedVariety:
    """A rectified variety with a density unit g_alpha per chart (omega = g dx)."""

    base: RectifiedVariety
    densities: tuple[tuple[MultiPoly, MultiPoly], ...] = ()

    def __post_init__(self):
        dens = tuple(self.densities)
        if not dens:
            one = MultiPoly.const(self.base.dim, self.base.ell, 1)
            dens = tuple((one, one) for _ in self.base.charts)
        if len(dens) != len(self.base.charts):
            raise ShapeError("one density per chart")
        for num, den in dens:
            if num.is_zero() or den.is_zero():
                raise ShapeError("density must be a unit")
        object.__setattr__(self, "densities", dens)

    @property
    def charts(self):
        return self.base.charts

    @property
    def dim(self):
        return self.base.dim


@dataclass(frozen=True)
class PointRep:
    chart: int
    coords: tuple[LaurentSeries, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))

    @property
    def prec(self):
        return min((c.prec for c in self.coords), default=INF)


@dataclass(frozen=True)
class Subvariety:
    """Z with its own rectification and, per Z-chart, a map into an X chart."""

    variety: RectifiedVariety
    maps: tuple[tuple[int, RationalMap], ...]

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if len(self.maps) != len(self.variety.charts):
            raise ShapeError("one inclusion map per subvariety chart")


@dataclass(frozen=True)
class BallSpec:
    variety: RectifiedVariety
    radius: int
    center: PointRep | None = None
    around: Subvariety | None = None

    def __post_init__(self):
        if self.center is not None and self.around is not None:
            raise ShapeError("a ball is centered at a point or around a subvariety, not both")


@dataclass(frozen=True)
class Morphism:
    """A map of rectified varieties given chartwise: source chart a -> (target chart, map)."""

    source: RectifiedVariety
    target: RectifiedVariety
    pieces: tuple[tuple[int, RationalMap], ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != len(self.source.charts):
            raise ShapeError("one chart map per source chart")
        for b, g in self.pieces:
            if g.source_dim != self.source.dim or g.target_dim != self.target.dim:
                raise ShapeError("chart map dimensions do not match the varieties")

    def apply(self, x: PointRep, prec=None, field=None) -> PointRep:
        b, g = self.pieces[x.chart]
        cap = prec
        if cap is None and not g.is_polynomial:
            cap = x.prec if x.prec != INF else EXACT_CAP
        fld = x.coords[0].field if x.coords else field
        return PointRep(b, tuple(g.evaluate(list(x.coords), cap, fld)))


# -- valuation bookkeeping ------------------------------------------------------------------

def _radius_contrib_plain(v: LaurentSeries):
    if not v.is_zero():
        c = -v.val
        return c, c
    if v.prec == INF:
        return NEG_INF, NEG_INF
    return NEG_INF, -v.prec


def _radius_contrib_inv(p: LaurentSeries):
    if not p.is_zero():
        return p.val, p.val
    if p.prec == INF:
        return None
    return p.prec, math.inf


def chart_radius(chart: Chart, coords: Sequence[LaurentSeries], field=None):
    """Bounds (lo, hi) on max_j(-val i(x)_j); None when x is exactly outside the chart.

    With coordinates known modulo t^L the bounds hold for every point of the
    cell x + t^L O^d, which is what cell classification relies on.
    """
    plain, inv = chart.ambient_values(coords, field)
    lo = hi = NEG_INF
    for v in plain:
        a, b = _radius_contrib_plain(v)
        lo, hi = max(lo, a), max(hi, b)
    for p in inv:
        c = _radius_contrib_inv(p)
        if c is None:
            return None
        lo, hi = max(lo, c[0]), max(hi, c[1])
    return lo, hi


def chart_offset(chart: Chart, xc, yc, field=None):
    """Bounds (lo, hi) on min_j val(i(y)_j - i(x)_j), or None if a point leaves the chart."""
    px, ix = chart.ambient_values(xc, field)
    py, iy = chart.ambient_values(yc, field)
    lo = hi = math.inf
    for a, b in zip(px, py):
        diff = b - a
        if diff.is_zero():
            clo, chi = (math.inf, math.inf) if diff.prec == INF else (diff.prec, math.inf)
        else:
            clo = chi = diff.val
        lo, hi = min(lo, clo), min(hi, chi)
    for a, b in zip(ix, iy):
        if a.is_zero() or b.is_zero():
            if (a.is_zero() and a.prec == INF) or (b.is_zero() and b.prec == INF):
                return None
            return NEG_INF, math.inf
        num = a - b
        shift = a.val + b.val
        if num.is_zero():
            clo, chi = (math.inf, math.inf) if num.prec == INF else (num.prec - shift, math.inf)
        else:
            clo = chi = num.val - shift
        lo, hi = min(lo, clo), min(hi, chi)
    return lo, hi


def _decide_le(bounds, r) -> Membership:
    lo, hi = bounds
    if hi <= r:
        return Membership.IN
    if lo > r:
        return Membership.OUT
    return Membership.INCONCLUSIVE


def point_in_chart(X: RectifiedVariety, y: PointRep, b: int):
    """Coordinates of y in chart b: (coords, status) with status IN, OUT or INCONCLUSIVE."""
    if y.chart == b:
        return y.coords, Membership.IN
    tmap = X.transition(y.chart, b)
    if tmap is None:
        return None, Membership.INCONCLUSIVE
    fld = y.coords[0].field if y.coords else None
    cap = y.prec if y.prec != INF else EXACT_CAP
    if not tmap.is_polynomial:
        den = poly_eval(tmap.denom, list(y.coords), fld)
        if den.is_zero():
            return None, (Membership.OUT if den.prec == INF else Membership.INCONCLUSIVE)
    coords = tuple(tmap.evaluate(list(y.coords), None if tmap.is_polynomial else cap, fld))
    for p in X.charts[b].inverted:
        v = poly_eval(p, list(coords), fld)
        if v.is_zero():
            return None, (Membership.OUT if v.prec == INF else Membership.INCONCLUSIVE)
    return coords, Membership.IN


def radius_bounds(X: RectifiedVariety, y: PointRep):
    """Bounds on the smallest r with y in B_r (min over charts of the chart radius)."""
    lo = hi = math.inf
    for b, chart in enumerate(X.charts):
        coords, status = point_in_chart(X, y, b)
        if status is Membership.OUT:
            continue
        if status is Membership.INCONCLUSIVE:
            lo = NEG_INF
            continue
        fld = y.coords[0].field if y.coords else None
        rb = chart_radius(chart, coords, fld)
        if rb is None:
            continue
        lo, hi = min(lo, rb[0]), min(hi, rb[1])
    return lo, hi


def point_radius(X: RectifiedVariety, y: PointRep) -> int:
    """Exact smallest r with y in B_r; raises PrecisionLoss when undetermined."""
    lo, hi = radius_bounds(X, y)
    if lo != hi:
        raise PrecisionLoss(f"radius of point undetermined at precision {y.prec}")
    return lo


def offset_bounds(X: RectifiedVariety, x: PointRep, y: PointRep):
    """Bounds on the largest s with y in B_{-s}(x) (max over charts containing x)."""
    lo, hi = NEG_INF, NEG_INF
    for b, chart in enumerate(X.charts):
        xc, xs = point_in_chart(X, x, b)
        if xs is Membership.OUT:
            continue
        yc, ys = point_in_chart(X, y, b)
        if xs is Membership.INCONCLUSIVE or ys is Membership.INCONCLUSIVE:
            hi = math.inf
            continue
        if ys is Membership.OUT:
            continue
        fld = x.coords[0].field if x.coords else None
        ob = chart_offset(chart, xc, yc, fld)
        if ob is None:
            continue
        lo, hi = max(lo, ob[0]), max(hi, ob[1])
    return lo, hi


def centered_offset(X: RectifiedVariety, x: PointRep, y: PointRep):
    lo, hi = offset_bounds(X, x, y)
    if lo != hi:
        raise PrecisionLoss("centered offset undetermined at the available precision")
    return lo


def ball_member(spec: BallSpec, y: PointRep, prec: int | None = None,
                budget: int | None = None) -> Membership:
    """Three-valued membership of y in the ball described by ``spec``."""
    X, r = spec.variety, spec.radius
    if spec.center is not None:
        lo, hi = offset_bounds(X, spec.center, y)
        if lo >= -r:
            return Membership.IN
        if hi < -r:
            return Membership.OUT
        return Membership.INCONCLUSIVE
    if spec.around is not None:
        return near_subvariety(X, spec.around, y, r, prec, budget)[0]
    return _decide_le(radius_bounds(X, y), r)


def near_subvariety(X: RectifiedVariety, Z: Subvariety, y: PointRep, r: int,
                    prec: int | None = None, budget: int | None = None):
    """Search Z's points for one whose ball of radius r contains y.

    Z's charts are scanned over a box large enough to contain every candidate
    and at a precision that resolves offsets of valuation -r; returns the
    membership and the witness point of Z (in X coordinates) if found.
    """
    fld = y.coords[0].field if y.coords else None
    lo, hi = radius_bounds(X, y)
    if hi == math.inf:
        return Membership.INCONCLUSIVE, None
    R = int(max(hi if hi != NEG_INF else 0, r, 0))
    inconclusive = False
    for zc, (xb, zmap) in zip(Z.variety.charts, Z.maps):
        deg = max([1] + [h.deg() for h in zmap.numerators])
        P = max(-r + (deg - 1) * (R + r if r < 0 else R) + 1, -R + 1)
        if prec is not None:
            P = max(P, min(prec, P))
        e = zc.dim
        if fld is None:
            raise ShapeError("cannot infer the field for a subvariety search")
        check_budget(fld.q ** (e * (P + R)), budget, "subvariety scan")
        for digits in digit_tuples(fld.q, e * (P + R)):
            zcoords = [LaurentSeries.from_digits(fld, -R, digits[i * (P + R):(i + 1) * (P + R)])
                       for i in range(e)]
            if zc.inverted and any(poly_eval(p, zcoords, fld).is_zero() for p in zc.inverted):
                continue
            z = PointRep(xb, tuple(zmap.evaluate(zcoords, None if zmap.is_polynomial
                                                  else EXACT_CAP, fld)))
            olo, ohi = offset_bounds(X, z, y)
            if olo >= -r:
                return Membership.IN, z
            if ohi >= -r:
                inconclusive = True
    return (Membership.INCONCLUSIVE if inconclusive else Membership.OUT), None


# -- grids --------------------------------------------------------------------------------

def box_points(field: FieldSpec, d: int, r: int, prec: int, budget: int | None = None,
               prefix: Sequence[int] = ()) -> Iterator[tuple[LaurentSeries, ...]]:
    """Exact representatives of (t^-r O)^d modulo t^prec, coordinate 0 varying fastest."""
    n = prec + r
    if n < 0:
        raise ValueError("precision below the box radius")
    check_budget(field.q ** (d * n - len(prefix)), budget, "grid scan")
    for digits in digit_tuples(field.q, d * n, prefix):
        yield tuple(LaurentSeries.from_digits(field, -r, digits[i * n:(i + 1) * n])
                    for i in range(d))


def ball_grid(X: RectifiedVariety, field: FieldSpec, r: int, prec: int,
              budget: int | None = None) -> list[PointRep]:
    """Grid representatives (exact) of B_r, chart by chart, overlaps not merged.

    Intrinsic coordinates are among the embedded ones, so each chart's part of
    B_r sits inside the box (t^-r O)^d.
    """
    d = X.dim
    check_budget(len(X.charts) * field.q ** (d * (prec + r)), budget, "ball grid")
    out = []
    for a, chart in enumerate(X.charts):
        for coords in box_points(field, d, r, prec, budget):
            rb = chart_radius(chart, coords, field)
            if rb is not None and rb[1] <= r:
                out.append(PointRep(a, coords))
    return out


def cell_status(chart: Chart, coords: Sequence[LaurentSeries], level: int, r: int,
                field=None) -> Membership:
    """Whether the whole cell coords + t^level O^d lies in (IN) or outside (OUT) the chart's B_r."""
    lifted = [c.lift(level) for c in coords]
    rb = chart_radius(chart, lifted, field)
    if rb is None:
        return Membership.OUT
    return _decide_le(rb, r)


def subdivide(field: FieldSpec, coords: Sequence[LaurentSeries], level: int
              ) -> Iterator[tuple[LaurentSeries, ...]]:
    """The q^d children of a cell at the next level."""
    d = len(coords)
    for digits in digit_tuples(field.q, d):
        yield tuple(c + LaurentSeries.monomial(field, digits[i], level)
                    for i, c in enumerate(coords))


# -- continuity and rectification comparison -------------------------------------------------

@dataclass
class ContinuityResult:
    m: int
    m_image: int
    m_modulus: int | None
    image_witness: PointRep | None = None
    modulus_witness: tuple[PointRep, PointRep] | None = None
    unsatisfied: bool = False
    grid_size: int = 0
    notes: list[str] = dc_field(default_factory=list)


def continuity_modulus(gamma: Morphism, field: FieldSpec, m: int, prec: int, cap: int = 64,
                       budget: int | None = None, workers: int = 1,
                       modulus: bool = True) -> ContinuityResult:
    """Empirical moduli for gamma(B_m) in B_m' and gamma(B_-m'(x)) in B_-m(gamma(x)).

    Both values are exact minima over the exact grid representatives of B_m
    modulo t^prec, hence lower bounds for the true constants.
    """
    from .scan import parallel_map

    grid = ball_grid(gamma.source, field, m, prec, budget)
    Y = gamma.target
    images = parallel_map(_image_task, [(gamma, x, field) for x in grid], workers)
    m_image, witness = NEG_INF, None
    for x, (img, rad) in zip(grid, images):
        if rad > m_image:
            m_image, witness = rad, x
    res = ContinuityResult(m, int(m_image) if m_image != NEG_INF else 0, NEG_INF,
                           image_witness=witness, grid_size=len(grid))
    if res.m_image > cap:
        res.unsatisfied = True
    if not modulus:
        return res
    X = gamma.source
    worst = NEG_INF
    pair = None
    for i, x in enumerate(grid):
        gx = images[i][0]
        for j, y in enumerate(grid):
            if i == j:
                continue
            gy = images[j][0]
            olo, ohi = offset_bounds(Y, gx, gy)
            if olo >= m:
                continue
            xlo, xhi = offset_bounds(X, x, y)
            need = xhi + 1
            if need > worst:
                worst, pair = need, (x, y)
    res.m_modulus = int(worst) if worst != NEG_INF else None
    res.modulus_witness = pair
    if res.m_modulus is not None and res.m_modulus >= prec:
        res.unsatisfied = True
        res.notes.append("modulus saturated at the grid precision")
    return res


def _image_task(args):
    gamma, x, field = args
    img = gamma.apply(x, field=field)
    lo, hi = radius_bounds(gamma.target, img)
    if lo != hi:
        raise PrecisionLoss("image radius undetermined")
    return img, lo


@dataclass
class CompareResult:
    rows: list[tuple[int, int]]
    a: int


def rect_compare(bridge: Morphism, field: FieldSpec, ms: Sequence[int], prec: int,
                 budget: int | None = None) -> CompareResult:
    """Minimal m' with B_m of the source rectification inside B_m' of the target one.

    ``bridge`` expresses the identity of the underlying variety between the two
    chart systems.  ``a`` is the smallest integer with m' <= a*m + a for all m.
    """
    rows = []
    for m in ms:
        res = continuity_modulus(bridge, field, m, prec, budget=budget, modulus=False)
        rows.append((m, res.m_image))
    a = 1
    for m, mp in rows:
        while mp > a * m + a:
            a += 1
    return CompareResult(rows, a)


def jacobian_rank_ok(chart: Chart, gamma: RationalMap, point: Sequence[LaurentSeries]) -> bool:
    """Spot check that a square Jacobian is invertible at a point."""
    jd = jacobian(gamma)
    if jd.det is None:
        return True
    return not poly_eval(jd.det, list(point)).is_zero()


def check_transitions(X: RectifiedVariety, field: FieldSpec, samples: int = 50, prec: int = 6,
                      seed: int = 0) -> list[str]:
    """Round-trip each supplied transition pair on random points of the overlap."""
    import random

    rng = random.Random(seed)
    problems = []
    for (a, b), tmap in X.transitions:
        back = X.transition(b, a)
        if back is None:
            continue
        done = tries = 0
        while done < samples and tries < samples * 20:
            tries += 1
            coords = tuple(LaurentSeries.from_digits(field, 0, [rng.randrange(field.q)
                                                               for _ in range(prec)])
                           for _ in range(X.dim))
            y = PointRep(a, coords)
            zc, status = point_in_chart(X, y, b)
            if status is not Membership.IN:
                continue
            try:
                wc = back.evaluate(list(zc), None if back.is_polynomial else 2 * EXACT_CAP, field)
            except (PrecisionLoss, ZeroDivisionError):
                continue
            done += 1
            for u, w in zip(coords, wc):
                if not (u - w).truncate(prec).is_zero():
                    problems.append(f"transition {a}->{b}->{a} moves {u}")
                    break
    return problems

