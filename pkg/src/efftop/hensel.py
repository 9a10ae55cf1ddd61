"""Certified Newton solving, root isolation on cells, and uniqueness radii for simple roots.

Newton steps use the adjugate of the Jacobian so that nothing is inverted
except the determinant.  Every run records, per iteration, the residual
valuation and three checks: the residual bound val(y' - gamma(x_r)) >= m' + r,
membership of x_r in B_m, and the step bound val(x_{r+1} - x_r) >= m + r.
Radii are measured in the rectification x -> (x, 1/f(x), 1/j(x)) where f is
the denominator of gamma and j its Jacobian determinant.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .arith.enumerate import DEFAULT_BUDGET, check_budget, digit_tuples
from .arith.field import FieldSpec
from .arith.series import INF, LaurentSeries, format_series
from .errors import (CellSplit, EffTopError, PrecisionLoss, PreconditionViolated, ShapeError,
                     SingularJacobian)
from .geometry import PointRep, subdivide
from .polyalg import (MultiPoly, RationalMap, jacobian, mat_vec, poly_det, poly_eval,
                      series_adjugate, series_det, taylor_coefficients)
from .scan import parallel_map

log = logging.getLogger(__name__)


# -- radius formulas -------------------------------------------------------------------------

def ift_radius(m: int, M: int, d: int, deg_f: int, deg_j: int) -> int:
    """Target radius m' for which gamma(B_{-m}(x)) contains B_{-m'}(gamma(x))."""
    _nonneg(m=m, M=M, d=d, deg_f=deg_f, deg_j=deg_j)
    return m * M + m * (deg_f * M + M + deg_j) + 8 * m * d * M * deg_f + M * m


def mono_radius(m: int, n: int) -> int:
    """Radius m' below which a simple root of a degree-n monic polynomial is unique."""
    _nonneg(m=m, n=n)
    return m * n + m + 2


def _nonneg(**kw):
    for k, v in kw.items():
        if v < 0:
            raise PreconditionViolated(f"{k} must be non-negative, got {v}")


@dataclass(frozen=True)
class EffectiveRadii:
    m: int
    M: int
    d: int
    deg_f: int
    deg_j: int
    n: int
    ift_m_prime: int
    mono_m_prime: int

    @classmethod
    def compute(cls, m: int, M: int, d: int, deg_f: int, deg_j: int, n: int = 0
                ) -> EffectiveRadii:
        return cls(m, M, d, deg_f, deg_j, n, ift_radius(m, M, d, deg_f, deg_j),
                   mono_radius(m, n))


# -- square systems ------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonSystem:
    """gamma as a function of the source variables ``free``; the rest stay fixed.

    ``partials`` holds Jacobian numerators for the free columns; the actual
    entries are these divided by f^denom_power, and ``det`` is the numerator of
    j = det / f^(denom_power * d).
    """

    gamma: RationalMap
    free: tuple[int, ...]
    partials: tuple[tuple[MultiPoly, ...], ...]
    det: MultiPoly
    denom_power: int

    @classmethod
    def build(cls, gamma: RationalMap, free: Sequence[int] | None = None) -> NewtonSystem:
        free = tuple(range(gamma.source_dim)) if free is None else tuple(free)
        if len(free) != gamma.target_dim:
            raise ShapeError(f"{len(free)} free variables for {gamma.target_dim} equations")
        if len(set(free)) != len(free) or any(not 0 <= i < gamma.source_dim for i in free):
            raise ShapeError("free variables must be distinct source coordinates")
        jac = jacobian(gamma)
        rows = tuple(tuple(row[i] for i in free) for row in jac.partials)
        return cls(gamma, free, rows, poly_det([list(r) for r in rows]), jac.denom_power)

    @property
    def d(self) -> int:
        return len(self.free)

    def radii(self, m: int) -> EffectiveRadii:
        g = self.gamma
        deg_f = g.denom.deg() if g.power else 0
        return EffectiveRadii.compute(m, g.effective_power(), self.d, deg_f, self.det.deg())

    def f_at(self, xs) -> LaurentSeries:
        return poly_eval(self.gamma.denom, xs)

    def j_parts(self, xs) -> tuple[LaurentSeries, LaurentSeries]:
        """(numerator, denominator) of j at xs."""
        num = poly_eval(self.det, xs)
        if self.denom_power == 0:
            return num, LaurentSeries.one(num.field)
        return num, self.f_at(xs) ** (self.denom_power * self.d)

    def j_val(self, xs) -> float:
        num, den = self.j_parts(xs)
        if num.is_zero():
            return INF
        return num.val - den.val

    def residual(self, xs, y, cap) -> list[LaurentSeries]:
        return [b - a for a, b in zip(self.gamma.evaluate(xs, cap), y)]

    def in_ball(self, xs, m: int) -> bool:
        """x in B_m of the rectification (x, 1/f, 1/j)."""
        if any(not c.is_zero() and c.val < -m for c in xs):
            return False
        f = self.f_at(xs)
        if f.is_zero() or f.val > m:
            return False
        return self.j_val(xs) <= m

    def offset(self, xs, ys) -> float:
        """min valuation of the embedded offsets between two exact points."""
        best = min((b - a).val for a, b in zip(xs, ys))
        one = LaurentSeries.one(xs[0].field)
        fx, fy = self.f_at(xs), self.f_at(ys)
        best = min(best, _quotient_offset(one, fx, one, fy))
        nx, dx = self.j_parts(xs)
        ny, dy = self.j_parts(ys)
        return min(best, _quotient_offset(dx, nx, dy, ny))


def _quotient_offset(nx, dx, ny, dy) -> float:
    """val(ny/dy - nx/dx) for exact nonzero denominators."""
    if dx.is_zero() or dy.is_zero():
        return -INF
    diff = ny * dx - nx * dy
    if diff.is_zero():
        return INF
    return diff.val - dx.val - dy.val


def check_solution(gamma: RationalMap, x: Sequence[LaurentSeries], y: Sequence[LaurentSeries],
                   prec: int) -> bool:
    """Whether gamma(x) = y mod t^prec, checked as val(h(x) - y f(x)^M) - M val f(x) >= prec.

    Clears the denominator instead of dividing, so it does not share the
    evaluation path used by the solver.
    """
    xs = [c.lift() for c in x]
    f = poly_eval(gamma.denom, xs)
    if f.is_zero():
        return False
    fM = f ** gamma.power
    for h, yc in zip(gamma.numerators, y):
        diff = poly_eval(h, xs) - yc.lift() * fM
        if not diff.is_zero() and diff.val - fM.val < prec:
            return False
    return True


# -- Newton iteration ------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonStep:
    r: int
    x: tuple[LaurentSeries, ...]
    residual_val: float
    residual_ok: bool
    in_ball: bool
    step_val: float | None = None
    step_ok: bool | None = None


@dataclass
class NewtonCertificate:
    m: int
    m_prime: int
    prec: int
    target: tuple[LaurentSeries, ...]
    start: tuple[LaurentSeries, ...]
    iterates: list[NewtonStep] = dc_field(default_factory=list)
    converged_at: int | None = None
    final: PointRep | None = None
    preconditions: bool = True
    verified: bool = False
    final_offset: float | None = None

    @property
    def success(self) -> bool:
        return self.converged_at is not None and self.verified

    @property
    def invariants_ok(self) -> bool:
        return all(s.residual_ok and s.in_ball and s.step_ok is not False for s in self.iterates)

    @property
    def certified(self) -> bool:
        return (self.success and self.preconditions and self.invariants_ok
                and self.final_offset is not None and self.final_offset >= self.m)

    def to_text(self) -> str:
        """Line-oriented record, stable across runs."""
        lines = ["newton-certificate",
                 f"m = {self.m}", f"m_prime = {self.m_prime}", f"prec = {self.prec}",
                 f"target = {_fmt_vec(self.target, self.prec)}",
                 f"start = {_fmt_vec(self.start, self.prec)}",
                 f"preconditions = {_fmt_bool(self.preconditions)}"]
        for s in self.iterates:
            parts = [f"iter {s.r}", f"x = {_fmt_vec(s.x, self.prec)}",
                     f"residual_val = {_fmt_val(s.residual_val, self.prec)}",
                     f"a = {_fmt_bool(s.residual_ok)}", f"b = {_fmt_bool(s.in_ball)}"]
            if s.step_val is not None:
                parts += [f"step_val = {_fmt_val(s.step_val, self.prec)}",
                          f"c = {_fmt_bool(s.step_ok)}"]
            lines.append(" ; ".join(parts))
        lines.append(f"converged_at = {'none' if self.converged_at is None else self.converged_at}")
        if self.final is not None:
            lines.append(f"final = {_fmt_vec(self.final.coords, self.prec)}")
            lines.append(f"final_offset = {_fmt_val(self.final_offset, self.prec)}")
        lines.append(f"verified = {_fmt_bool(self.verified)}")
        lines.append(f"certified = {_fmt_bool(self.certified)}")
        return "\n".join(lines) + "\n"


def _fmt_vec(v, prec) -> str:
    return "(" + ", ".join(format_series(c.truncate(prec)) for c in v) + ")"


def _fmt_val(v, prec) -> str:
    if v is None:
        return "none"
    return f">={prec}" if v >= prec else str(int(v))


def _fmt_bool(b) -> str:
    return "true" if b else "false"


def working_precision(system: NewtonSystem, m: int, prec: int) -> int:
    """Precision carried by iterates; generous enough that truncation never shows mod t^prec."""
    degs = [h.deg() for h in system.gamma.numerators] + [system.gamma.denom.deg(), system.det.deg()]
    return 2 * prec + 4 * abs(m) * (max(degs) + system.denom_power + 1) + 8


def newton_solve(gamma: RationalMap, x, y: Sequence[LaurentSeries], m: int, prec: int,
                 free: Sequence[int] | None = None, m_prime: int | None = None,
                 force: bool = False, max_iter: int | None = None) -> NewtonCertificate:
    """Solve gamma(x') = y mod t^prec starting from x, recording the certificate.

    Without ``force`` the start must lie in B_m and the target within B_{-m'}
    of gamma(x); otherwise PreconditionViolated (or SingularJacobian when the
    Jacobian bound fails) is raised.  With ``force`` the run proceeds and the
    certificate is marked as not meeting its preconditions.
    """
    system = gamma if isinstance(gamma, NewtonSystem) else NewtonSystem.build(gamma, free)
    gamma = system.gamma
    coords = x.coords if isinstance(x, PointRep) else tuple(x)
    if len(coords) != gamma.source_dim or len(y) != gamma.target_dim:
        raise ShapeError("point or target has the wrong number of coordinates")
    xs = [c.lift() for c in coords]
    ys = [c.lift() for c in y]
    mp = system.radii(m).ift_m_prime if m_prime is None else m_prime
    W = working_precision(system, m, prec)

    f0 = system.f_at(xs)
    if f0.is_zero():
        raise PreconditionViolated("start point lies outside the chart (denominator vanishes)")
    jnum, _ = system.j_parts(xs)
    if jnum.is_zero():
        raise SingularJacobian("Jacobian determinant vanishes at the start point")
    ok = True
    if system.j_val(xs) > m:
        if not force:
            raise SingularJacobian(f"val j(x) = {system.j_val(xs)} exceeds m = {m}")
        ok = False
    if not system.in_ball(xs, m):
        if not force:
            raise PreconditionViolated(f"start point is not in B_{m}")
        ok = False
    res = system.residual(xs, ys, W)
    v0 = _vec_val(res)
    if v0 < mp:
        if not force:
            raise PreconditionViolated(f"val(y' - gamma(x)) = {int(v0)} is below m' = {mp}")
        ok = False

    cert = NewtonCertificate(m, mp, prec, tuple(ys), tuple(xs), preconditions=ok)
    limit = max_iter if max_iter is not None else max(prec - min(mp, v0) + 2, 1)
    cur = xs
    for r in range(limit + 1):
        if r:
            res = system.residual(cur, ys, W)
        v = _vec_val(res)
        step = NewtonStep(r, tuple(cur), v, v >= mp + r, system.in_ball(cur, m))
        if v >= prec:
            cert.iterates.append(step)
            cert.converged_at = r
            break
        if r == limit:
            cert.iterates.append(step)
            break
        nxt = _newton_update(system, cur, res, W)
        sv = min((b - a).val for a, b in zip(cur, nxt))
        off = system.offset(cur, nxt)
        cert.iterates.append(NewtonStep(r, tuple(cur), v, step.residual_ok, step.in_ball,
                                        sv, off >= m + r))
        cur = nxt

    if cert.converged_at is None:
        if force:
            return cert
        raise PrecisionLoss(f"Newton did not reach precision {prec} within {limit} steps",
                            prec + limit)
    cert.final = PointRep(0, tuple(cur))
    cert.verified = check_solution(gamma, cur, ys, prec)
    if not cert.verified:
        raise EffTopError("Newton result failed the independent residual check")
    cert.final_offset = system.offset(xs, cur)
    return cert


def _vec_val(v: Sequence[LaurentSeries]) -> float:
    return min(c.vlb for c in v)


def _newton_update(system: NewtonSystem, xs, res, W) -> list[LaurentSeries]:
    """x + Adj(D) w / det(D), with the f-powers of a rational map cleared."""
    P = [[poly_eval(p, xs) for p in row] for row in system.partials]
    det = poly_eval(system.det, xs)
    if det.is_zero():
        raise SingularJacobian("Jacobian determinant vanished during iteration")
    num = mat_vec(series_adjugate(P), res)
    if system.denom_power:
        fp = system.f_at(xs) ** system.denom_power
        num = [c * fp for c in num]
    out = list(xs)
    for k, i in enumerate(system.free):
        delta = num[k].div(det, W)
        out[i] = (xs[i] + delta).truncate(W).lift()
    return out


# -- root isolation on cells -----------------------------------------------------------------

_NO_ROOT, _ROOT, _UNDECIDED = "none", "root", "undecided"


@dataclass(frozen=True)
class RootCell:
    """A cell center + t^level O^d containing exactly one root of a square system."""

    center: tuple[LaurentSeries, ...]
    level: int

    def approx(self) -> tuple[LaurentSeries, ...]:
        return tuple(c.lift(self.level) for c in self.center)

    def contains(self, pt: Sequence[LaurentSeries]) -> bool:
        return all((a - c).vlb >= self.level for a, c in zip(pt, self.center))


def cell_root_test(polys: Sequence[MultiPoly], d: int, params: Sequence[LaurentSeries],
                   center: Sequence[LaurentSeries], level: int) -> str:
    """Decide whether the cell holds no root, exactly one root, or neither is provable.

    With F(c + z) = b_0 + A z + sum_{|i|>=2} b_i z^i on z in t^L O^d: if some
    component has val b_0 below every other term the cell is empty; if all
    val(A^{-1} b_i) + (|i|-1) L > 0 the map z -> -A^{-1}(b_0 + sum b_i z^i) is
    a contraction of t^L O^d and there is a root iff val(A^{-1} b_0) >= L.
    """
    pt = list(center) + list(params)
    field = pt[0].field
    zero = LaurentSeries.zero(field)
    tcs = [taylor_coefficients(p, pt, d) for p in polys]
    z0 = (0,) * d
    for tc in tcs:
        b0 = tc.get(z0, zero)
        if b0.is_zero():
            continue
        tail = min((b.vlb + sum(i) * level for i, b in tc.items() if any(i)), default=INF)
        if b0.val < tail:
            return _NO_ROOT
    units = [tuple(1 if k == t else 0 for k in range(d)) for t in range(d)]
    A = [[tc.get(u, zero) for u in units] for tc in tcs]
    j = series_det(A)
    if j.is_zero():
        return _UNDECIDED
    adj = series_adjugate(A)
    higher = sorted({i for tc in tcs for i in tc if sum(i) >= 2})
    for i in higher:
        w = mat_vec(adj, [tc.get(i, zero) for tc in tcs])
        if _vec_val(w) - j.val + (sum(i) - 1) * level <= 0:
            return _UNDECIDED
    u = mat_vec(adj, [tc.get(z0, zero) for tc in tcs])
    if _vec_val(u) - j.val >= level:
        return _ROOT
    if any(not c.is_zero() and c.val - j.val < level for c in u):
        return _NO_ROOT
    return _UNDECIDED


def isolate_roots(polys: Sequence[MultiPoly], d: int, params: Sequence[LaurentSeries],
                  center: Sequence[LaurentSeries], level: int, stop_level: int,
                  max_level: int | None = None, field: FieldSpec | None = None,
                  budget: int | None = None, allowed=None) -> list[RootCell]:
    """All roots of polys(z, params) = 0 in center + t^level O^d, each in a cell of level >= stop_level.

    The first d variables are unknowns; the remaining ones take the values
    ``params``.  Cells for which ``allowed(center, level)`` is false are
    skipped.  Raises CellSplit when some cell is still undecided at
    ``max_level``.
    """
    if len(polys) != d:
        raise ShapeError("root isolation needs a square system")
    field = field or center[0].field
    max_level = stop_level + 16 if max_level is None else max_level
    limit = DEFAULT_BUDGET if budget is None else budget
    out: list[RootCell] = []
    stack = [(tuple(center), level)]
    visited = 0
    while stack:
        c, L = stack.pop()
        if allowed is not None and not allowed(c, L):
            continue
        visited += 1
        check_budget(visited, limit, "root isolation")
        status = cell_root_test(polys, d, params, c, L)
        if status == _NO_ROOT:
            continue
        if status == _ROOT and L >= stop_level:
            out.append(RootCell(c, L))
            continue
        if status == _UNDECIDED and L >= max_level:
            raise CellSplit(f"cell ({', '.join(format_series(x) for x in c)}) + t^{L} "
                            "not resolved at the precision limit")
        stack.extend(reversed([(ch, L + 1) for ch in subdivide(field, c, L)]))
    return out


# -- monic polynomials with a simple root --------------------------------------------------

def family_polys(n: int, ell: int) -> tuple[MultiPoly, MultiPoly]:
    """F(x; c) = x^n + sum c_i x^i and dF/dx, with variables (x, c_0, ..., c_{n-1})."""
    x = MultiPoly.var(n + 1, ell, 0)
    F = x ** n
    for i in range(n):
        F = F + MultiPoly.var(n + 1, ell, i + 1) * x ** i
    return F, F.partial(0)


@dataclass(frozen=True)
class UniversalFamilyPoint:
    """A monic f of degree n together with a simple root a, embedded as (f, a, 1/f'(a))."""

    coeffs: tuple[LaurentSeries, ...]
    a: LaurentSeries
    inv_fprime: LaurentSeries

    @classmethod
    def make(cls, coeffs: Sequence[LaurentSeries], a: LaurentSeries) -> UniversalFamilyPoint:
        coeffs = tuple(coeffs)
        n = len(coeffs)
        if n < 1:
            raise ShapeError("degree must be at least 1")
        field = a.field
        F, dF = family_polys(n, field.ell)
        pt = [a] + list(coeffs)
        if not poly_eval(F, pt).is_zero():
            raise PreconditionViolated("a is not a root of f")
        fp = poly_eval(dF, pt)
        if fp.is_zero():
            raise PreconditionViolated("a is not a simple root of f")
        cap = min([a.prec] + [c.prec for c in coeffs])
        cap = cap if cap != INF else max(16, 2 * abs(fp.val) + 16)
        return cls(coeffs, a, LaurentSeries.one(field).div(fp, cap))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @property
    def field(self) -> FieldSpec:
        return self.a.field

    def embedded(self) -> tuple[LaurentSeries, ...]:
        return self.coeffs + (self.a, self.inv_fprime)

    def in_ball(self, m: int) -> bool:
        return all(c.is_zero() or c.val >= -m for c in self.embedded())

    def fprime(self, b: LaurentSeries) -> LaurentSeries:
        _, dF = family_polys(self.n, self.field.ell)
        return poly_eval(dF, [b] + list(self.coeffs))


def root_bound(coeffs: Sequence[LaurentSeries]) -> int:
    """A level L with every root of the monic polynomial in t^L O."""
    n = len(coeffs)
    vals = [math.floor(c.vlb / (n - i)) for i, c in enumerate(coeffs) if c.vlb != INF]
    return min([0] + vals)


def family_roots(coeffs: Sequence[LaurentSeries], prec: int, field: FieldSpec | None = None,
                 max_level: int | None = None, budget: int | None = None) -> list[RootCell]:
    """Isolated roots in F_q((t)) of x^n + sum c_i x^i, each known modulo t^prec."""
    field = field or coeffs[0].field
    F, _ = family_polys(len(coeffs), field.ell)
    L = root_bound(coeffs)
    return isolate_roots([F], 1, coeffs, (LaurentSeries.zero(field),), L, prec, max_level,
                         field, budget)


@dataclass
class MonoResult:
    unique: bool
    m: int
    m_prime: int
    prec: int
    counterexample: LaurentSeries | None = None
    cells: int = 0
    roots_in_ball: int = 0
    other_roots: list = dc_field(default_factory=list)
    empirical_radius: int | None = None

    def describe(self) -> str:
        if self.unique:
            return "Unique"
        return f"CounterexampleRoot({format_series(self.counterexample)})"


def _inverse_gap(p: UniversalFamilyPoint, b: LaurentSeries) -> tuple[float, float]:
    """Bounds (lo, hi) on val(1/f'(b) - 1/f'(a)) with b known to its precision."""
    fa = p.fprime(p.a)
    fb = p.fprime(b)
    if fb.is_zero():
        return -INF, INF
    diff = fa - fb
    shift = fa.val + fb.val
    if diff.is_zero():
        return diff.vlb - shift, INF
    return diff.val - shift, diff.val - shift


def _root_distance(p: UniversalFamilyPoint, cell: RootCell, m_prime: int, max_level: int
                   ) -> tuple[float, RootCell]:
    """Lower bound on min(val(b - a), val(1/f'(b) - 1/f'(a))), refined until it decides >= m'."""
    F, _ = family_polys(p.n, p.field.ell)
    while True:
        b = cell.center[0].lift(cell.level)
        d_lo = (b - p.a).vlb
        d_hi = (b - p.a).val if not (b - p.a).is_zero() else INF
        g_lo, g_hi = _inverse_gap(p, b)
        lo, hi = min(d_lo, g_lo), min(d_hi, g_hi)
        if lo >= m_prime or hi < m_prime or lo == hi or cell.level >= max_level:
            return lo, cell
        nxt = isolate_roots([F], 1, p.coeffs, cell.center, cell.level, cell.level + 1,
                            max_level, p.field)
        if len(nxt) != 1:
            raise EffTopError("isolated root cell split during refinement")
        cell = nxt[0]


def _is_base_root(p: UniversalFamilyPoint, cell: RootCell) -> bool:
    n = min(cell.level, p.a.prec)
    return (cell.center[0] - p.a).vlb >= n


def mono_check(p: UniversalFamilyPoint, m: int, prec: int | None = None,
               budget: int | None = None, max_extra: int = 16,
               empirical: bool = True, m_prime: int | None = None) -> MonoResult:
    """Search B_{-m'}((f, a)) for a second root b of f, m' = mono_radius(m, n).

    The ball a + t^{m'} O is scanned cell by cell modulo t^prec (default
    m' + 2); every cell is certified to contain no root or exactly one root.
    A root other than a whose 1/f' also agrees with 1/f'(a) to order m' is a
    counterexample.  ``m_prime`` overrides the radius (for negative controls).
    """
    if not p.in_ball(m):
        raise PreconditionViolated(f"(f, a) is not in B_{m}")
    field = p.field
    F, _ = family_polys(p.n, field.ell)
    mp = mono_radius(m, p.n) if m_prime is None else m_prime
    P = mp + 2 if prec is None else prec
    if P < mp:
        raise PreconditionViolated("scan precision below the radius")
    max_level = P + max_extra
    res = MonoResult(True, m, mp, P)
    base = p.a.truncate(mp).lift() if p.a.prec >= mp else None
    if base is None:
        raise PrecisionLoss(f"root known only modulo t^{p.a.prec}, need t^{mp}", mp)
    n_cells = field.q ** (P - mp)
    check_budget(n_cells, budget, "root-pair scan")
    found = []
    for digits in digit_tuples(field.q, P - mp):
        c = base + LaurentSeries.from_digits(field, mp, digits)
        res.cells += 1
        found += isolate_roots([F], 1, p.coeffs, (c,), P, P, max_level, field, budget)
    res.roots_in_ball = len(found)
    mine = [cell for cell in found if _is_base_root(p, cell)]
    if len(mine) != 1:
        raise PrecisionLoss("root a is not separated from its neighbours at this precision",
                            max(P, int(p.a.prec)) + 1)
    for cell in found:
        if cell is mine[0]:
            continue
        lo, cell = _root_distance(p, cell, mp, max_level)
        if lo >= mp:
            res.unique = False
            res.counterexample = cell.center[0].lift(cell.level)
            break
    if empirical:
        res.empirical_radius, res.other_roots = empirical_mono_radius(p, P, max_level, budget)
    return res


def check_second_root(p: UniversalFamilyPoint, b: LaurentSeries, m_prime: int) -> bool:
    """b's cell holds a root of f other than a, with (f, b) within offset m' of (f, a)."""
    field = p.field
    level = int(b.prec)
    center = b.truncate(level).lift()
    F, _ = family_polys(p.n, field.ell)
    cells = isolate_roots([F], 1, p.coeffs, (center,), level, level, level + 16, field)
    if len(cells) != 1:
        return False
    if (center - p.a).vlb >= level or (center - p.a).vlb < m_prime:
        return False
    lo, _ = _inverse_gap(p, cells[0].approx()[0])
    return lo >= m_prime


def empirical_mono_radius(p: UniversalFamilyPoint, prec: int, max_level: int | None = None,
                          budget: int | None = None) -> tuple[int | None, list[LaurentSeries]]:
    """Smallest m'' with no other root of f in B_{-m''}((f, a)), or None if a is the only root.

    Distances at or beyond ``prec`` are reported as ``prec``.
    """
    max_level = prec + 16 if max_level is None else max_level
    cells = family_roots(p.coeffs, prec, p.field, max_level, budget)
    mine = [c for c in cells if _is_base_root(p, c)]
    if len(mine) != 1:
        raise PrecisionLoss("root a is not separated from the other roots", prec + 1)
    worst = None
    others = []
    for cell in cells:
        if cell is mine[0]:
            continue
        lo, cell = _root_distance(p, cell, prec, max_level)
        lo = min(lo, prec)
        others.append(cell.center[0].lift(cell.level))
        worst = lo if worst is None else max(worst, lo)
    return (None if worst is None else int(worst) + 1), others


# -- inverse function verification ------------------------------------------------------------

@dataclass
class IFTReport:
    m: int
    m_prime: int
    prec: int
    targets: int = 0
    solved: int = 0
    max_iterations: int = 0
    violations: list = dc_field(default_factory=list)
    certificates: list = dc_field(default_factory=list)
    empirical_radius: int | None = None
    scan_prec: int | None = None
    saturated: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations and self.solved == self.targets

    def to_text(self) -> str:
        lines = ["ift-report", f"m = {self.m}", f"m_prime = {self.m_prime}",
                 f"prec = {self.prec}", f"targets = {self.targets}", f"solved = {self.solved}",
                 f"max_iterations = {self.max_iterations}",
                 f"violations = {len(self.violations)}"]
        for y, why in self.violations:
            lines.append(f"violation target = {_fmt_vec(y, self.prec)} ; reason = {why}")
        if self.empirical_radius is not None:
            sat = " (saturated)" if self.saturated else ""
            lines.append(f"empirical_radius = {self.empirical_radius}{sat}")
            lines.append(f"scan_prec = {self.scan_prec}")
        return "\n".join(lines) + "\n"


def _solve_task(args):
    system, x, y, m, prec, mp = args
    try:
        cert = newton_solve(system, x, y, m, prec, m_prime=mp)
    except EffTopError as exc:
        return None, f"{type(exc).__name__}: {exc}"
    if not cert.certified:
        return cert, "certificate invariants failed"
    return cert, None


def ift_verify(gamma: RationalMap, x, m: int, field: FieldSpec, prec: int,
               free: Sequence[int] | None = None, m_prime: int | None = None,
               budget: int | None = None, workers: int = 1, scan_prec: int | None = None,
               scan_budget: int = 10 ** 5, empirical: bool = True,
               keep_certificates: bool = True) -> IFTReport:
    """Solve every grid target of B_{-m'}(gamma(x)) modulo t^prec and check each lands in B_{-m}(x)."""
    system = NewtonSystem.build(gamma, free)
    coords = x.coords if isinstance(x, PointRep) else tuple(x)
    xs = [c.lift() for c in coords]
    mp = system.radii(m).ift_m_prime if m_prime is None else m_prime
    W = working_precision(system, m, prec)
    y0 = gamma.evaluate(xs, W)
    e = gamma.target_dim
    report = IFTReport(m, mp, prec)
    n = max(prec - mp, 0)
    check_budget(field.q ** (e * n), budget, "target grid")
    base = [c.truncate(min(mp, prec)).lift() for c in y0]
    tasks = []
    for digits in digit_tuples(field.q, e * n):
        y = tuple(b + LaurentSeries.from_digits(field, mp, digits[s * n:(s + 1) * n])
                  for s, b in enumerate(base))
        tasks.append((system, tuple(xs), y, m, prec, mp))
    report.targets = len(tasks)
    for (_, _, y, _, _, _), (cert, why) in zip(tasks, parallel_map(_solve_task, tasks, workers)):
        if why is None:
            report.solved += 1
            report.max_iterations = max(report.max_iterations, cert.converged_at)
        else:
            report.violations.append((y, why))
        if keep_certificates and cert is not None:
            report.certificates.append(cert)
    if empirical:
        P = min(prec, mp + 1) if scan_prec is None else scan_prec
        d = system.d
        while P > m + 1 and field.q ** (d * (P - m)) > scan_budget:
            P -= 1
        report.scan_prec = P
        report.empirical_radius, report.saturated = empirical_ift_radius(
            system, xs, m, field, P, budget)
    return report


def empirical_ift_radius(gamma, x, m: int, field: FieldSpec, scan_prec: int,
                         budget: int | None = None, free: Sequence[int] | None = None
                         ) -> tuple[int, bool]:
    """Smallest m'' with gamma(B_{-m}(x)) containing B_{-m''}(gamma(x)) modulo t^scan_prec.

    The image of every source cell x + t^m u (free coordinates only) is
    computed with precision propagation, so each cell maps to one residue.
    Returns (m'', saturated) where saturated means m'' hit scan_prec.
    """
    system = gamma if isinstance(gamma, NewtonSystem) else NewtonSystem.build(gamma, free)
    gamma = system.gamma
    xs = [c.lift() for c in x]
    d, e, P = system.d, gamma.target_dim, scan_prec
    y0 = gamma.evaluate(xs, working_precision(system, m, P))
    src_prec = P
    while True:
        n = max(src_prec - m, 0)
        check_budget(field.q ** (d * n), budget, "source scan")
        image = set()
        short = 0
        for digits in digit_tuples(field.q, d * n):
            pt = list(xs)
            for k, i in enumerate(system.free):
                u = LaurentSeries.from_digits(field, m, digits[k * n:(k + 1) * n])
                pt[i] = (xs[i] + u).lift(src_prec)
            vals = gamma.evaluate(pt, src_prec)
            lost = P - min(v.prec for v in vals)
            if lost > 0:
                short = max(short, lost)
                break
            image.add(tuple((v - b).truncate(P) for v, b in zip(vals, y0)))
        if not short:
            break
        src_prec += short
    k = 0
    while field.q ** (e * (k + 1)) <= len(image):
        k += 1
    for mpp in range(P - k, P + 1):
        n2 = P - mpp
        if all(tuple(LaurentSeries.from_digits(field, mpp, digits[s * n2:(s + 1) * n2], P)
                     for s in range(e)) in image
               for digits in digit_tuples(field.q, e * n2)):
            return mpp, mpp == P
    return P, True
