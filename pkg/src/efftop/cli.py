"""Command line interface: single experiments as subcommands and config-driven runs.

Every subcommand builds one experiment stanza and runs it through the same
code path as ``run``.  Exit codes: 0 when everything passes, 1 when some
experiment found a violation (its witness is printed), 2 when some result is
inconclusive (precision or budget).
"""

from __future__ import annotations

import argparse
import difflib
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import library
from .arith.field import FieldSpec, is_prime
from .arith.series import LaurentSeries, format_series, parse_series
from .config import ExperimentConfig, Section, Value, load_config
from .errors import (BudgetExceeded, CellSplit, DensityNotUnit, EffTopError, ParseError,
                     PrecisionLoss, PreconditionViolated, SingularJacobian)
from .geometry import (BallSpec, Membership, Morphism, PointRep, RectifiedVariety,
                       ball_member, continuity_modulus, embedded_chart, principal_open,
                       radius_bounds)
from .hensel import (UniversalFamilyPoint, check_second_root, ift_verify, mono_check,
                     newton_solve)
from .measure import (ball_measure, pushforward_density, verify_support_lower_bound,
                      verify_total_mass, verify_upper_bound)
from .measure import verify_pushforward_lower_bound as measure_lower_bound
from .polyalg import MultiPoly, RationalMap, parse_poly
from .smoothfn import pushforward_measure_smooth
from .surjectivity import (SectionWitness, check_section, confirm_no_preimage, eff_surj_search,
                           glue_verify)

log = logging.getLogger("efftop")

PASS, VIOLATION, INCONCLUSIVE = "Pass", "Violation", "Inconclusive"
EXIT_CODES = {PASS: 0, VIOLATION: 1, INCONCLUSIVE: 2}


# -- results ------------------------------------------------------------------------------------

@dataclass
class Witness:
    """A machine-checkable reason for a violation: a kind plus the data its checker needs."""

    kind: str
    data: dict
    check: Callable[[], bool] | None = None

    def to_text(self) -> str:
        parts = [f"kind = {self.kind}"]
        for k in sorted(self.data):
            parts.append(f"{k} = {self.data[k]}")
        return " ; ".join(parts)


@dataclass
class Outcome:
    name: str
    op: str
    q: int
    status: str
    detail: str
    report: str
    witness: Witness | None = None


@dataclass
class Context:
    cfg: ExperimentConfig | None
    field: FieldSpec
    budget: int | None = None
    workers: int = 1
    seed: int = 0
    force: bool = False


# -- resolving names ------------------------------------------------------------------------------

def _poly(val: Value, text: str, nvars: int, ell: int, offset: int = 0) -> MultiPoly:
    try:
        return parse_poly(text, nvars, ell, val.line)
    except ParseError as exc:
        col = val.column + offset + (exc.column or 1) - 1
        raise ParseError(str(exc).split(": ", 1)[-1], val.line, col) from None


def _polys(val: Value, nvars: int, ell: int) -> list[MultiPoly]:
    out, offset = [], 0
    for part in val.text.split(";"):
        lead = len(part) - len(part.lstrip())
        if part.strip():
            out.append(_poly(val, part.strip(), nvars, ell, offset + lead))
        offset += len(part) + 1
    if not out:
        raise val.error("expected at least one polynomial")
    return out


def resolve_variety(ctx: Context, name: str, at: Value | None = None) -> RectifiedVariety:
    ell = ctx.field.ell
    cfg = ctx.cfg
    if cfg is not None and name in cfg.varieties:
        sec = cfg.varieties[name]
        d = sec.require("dim").as_int()
        inv = [_poly(sec.values["invert"], sec.values["invert"].text, d, ell)] \
            if "invert" in sec.values else []
        extra = _polys(sec.values["extra"], d, ell) if "extra" in sec.values else []
        if extra:
            chart = embedded_chart(d, ell, extra, inv, label=name)
        elif inv:
            chart = principal_open(d, inv[0], name)
        else:
            return library.affine(d, ell)
        return RectifiedVariety((chart,), name=name)
    if name in library.VARIETIES:
        return library.VARIETIES[name](ell)
    msg = f"unknown variety {name!r}"
    raise at.error(msg) if at is not None else ParseError(msg)


def resolve_map(ctx: Context, name: str, at: Value | None = None) -> Morphism:
    ell = ctx.field.ell
    cfg = ctx.cfg
    if cfg is not None and name in cfg.maps:
        sec = cfg.maps[name]
        X = resolve_variety(ctx, sec.values["source"].text, sec.values["source"])
        Y = resolve_variety(ctx, sec.values["target"].text, sec.values["target"])
        comps = _polys(sec.values["components"], X.dim, ell)
        if len(comps) != Y.dim:
            raise sec.values["components"].error(
                f"{len(comps)} components for a target of dimension {Y.dim}")
        if "denominator" in sec.values:
            den = _poly(sec.values["denominator"], sec.values["denominator"].text, X.dim, ell)
            power = sec.values["power"].as_int() if "power" in sec.values else 1
            g = RationalMap(tuple(comps), den, power)
        else:
            g = RationalMap.polynomial(comps)
        return Morphism(X, Y, tuple((0, g) for _ in X.charts), name=name)
    if name in library.MAPS:
        return library.MAPS[name](ell)
    msg = f"unknown map {name!r}"
    raise at.error(msg) if at is not None else ParseError(msg)


def _series_list(ctx: Context, val: Value) -> list[LaurentSeries]:
    try:
        return [parse_series(ctx.field, p) for p in val.as_list(",")]
    except ParseError as exc:
        raise val.error(str(exc)) from None


def _int(sec: Section, key: str, default=None):
    v = sec.get(key)
    return default if v is None else v.as_int()


def _fmt_point(coords) -> str:
    return "(" + ", ".join(format_series(c) for c in coords) + ")"


def _fraction(val: Value) -> Fraction:
    try:
        return Fraction(val.text)
    except ValueError:
        raise val.error(f"expected a number, got {val.text!r}") from None


# -- experiments ------------------------------------------------------------------------------

def op_ball_volume(sec: Section, ctx: Context):
    X = library.mu(resolve_variety(ctx, sec.require("variety").text, sec.require("variety")))
    m, prec = sec.require("m").as_int(), _int(sec, "prec", 2)
    vol = ball_measure(X, ctx.field, m, prec, budget=ctx.budget, check_stability=True)
    report = f"{vol}\n"
    if "expect" in sec.values and vol.as_fraction() != _fraction(sec.values["expect"]):
        exp = sec.values["expect"].text
        w = Witness("ball-volume", {"variety": sec.values["variety"].text, "m": m,
                                    "prec": prec, "value": str(vol), "expect": exp},
                    lambda: ball_measure(X, ctx.field, m, prec + 1).as_fraction()
                    != Fraction(exp))
        return VIOLATION, f"volume {vol} differs from {exp}", report, w
    return PASS, f"volume {vol}", report, None


def op_continuity(sec: Section, ctx: Context):
    gamma = resolve_map(ctx, sec.require("map").text, sec.require("map"))
    m = sec.require("m").as_int()
    prec = _int(sec, "prec", max(1, -m + 1))
    modulus = sec.values["modulus"].as_bool() if "modulus" in sec.values else False
    res = continuity_modulus(gamma, ctx.field, m, prec, budget=ctx.budget,
                             workers=ctx.workers, modulus=modulus)
    lines = [f"m_prime = {res.m_image}"]
    if modulus:
        lines.append(f"modulus = {res.m_modulus}")
    report = "\n".join(lines) + "\n"
    claim = _int(sec, "expect")
    if claim is not None and res.m_image > claim:
        x = res.image_witness
        Y = gamma.target
        w = Witness("image-radius", {"map": gamma.name, "x": _fmt_point(x.coords),
                                     "claim": claim},
                    lambda: radius_bounds(Y, gamma.apply(x))[0] > claim)
        return VIOLATION, f"gamma(B_{m}) leaves B_{claim}", report, w
    if res.unsatisfied:
        return INCONCLUSIVE, "modulus saturated at the grid precision", report, None
    return PASS, f"m_prime {res.m_image}", report, None


def _free(sec: Section):
    v = sec.get("free") or sec.get("newton_free")
    return None if v is None else tuple(v.as_ints())


def op_newton(sec: Section, ctx: Context):
    gamma = resolve_map(ctx, sec.require("map").text, sec.require("map"))
    g = gamma.pieces[0][1]
    x = _series_list(ctx, sec.require("x"))
    y = _series_list(ctx, sec.require("y"))
    m, prec = sec.require("m").as_int(), sec.require("prec").as_int()
    force = ctx.force or (sec.values["force"].as_bool() if "force" in sec.values else False)
    try:
        cert = newton_solve(g, x, y, m, prec, free=_free(sec), m_prime=_int(sec, "m_prime"),
                            force=force)
    except (PreconditionViolated, SingularJacobian) as exc:
        w = Witness("newton-precondition", {"map": gamma.name, "x": _fmt_point(x),
                                            "y": _fmt_point(y), "m": m, "reason": str(exc)},
                    lambda: _newton_fails(g, x, y, m, prec, _free(sec), _int(sec, "m_prime")))
        return VIOLATION, str(exc), f"error = {exc}\n", w
    report = cert.to_text()
    if cert.certified:
        return PASS, f"converged at {cert.converged_at}", report, None
    w = Witness("newton-certificate", {"map": gamma.name, "x": _fmt_point(x),
                                       "y": _fmt_point(y), "m": m},
                lambda: not newton_solve(g, x, y, m, prec, free=_free(sec),
                                         m_prime=_int(sec, "m_prime"), force=True).certified)
    return VIOLATION, "certificate not established", report, w


def _newton_fails(g, x, y, m, prec, free, mp) -> bool:
    try:
        newton_solve(g, x, y, m, prec, free=free, m_prime=mp)
    except (PreconditionViolated, SingularJacobian):
        return True
    return False


def op_ift(sec: Section, ctx: Context):
    gamma = resolve_map(ctx, sec.require("map").text, sec.require("map"))
    g = gamma.pieces[0][1]
    x = _series_list(ctx, sec.require("x"))
    m, prec = sec.require("m").as_int(), sec.require("prec").as_int()
    rep = ift_verify(g, x, m, ctx.field, prec, free=_free(sec), m_prime=_int(sec, "m_prime"),
                     budget=ctx.budget, workers=ctx.workers, scan_prec=_int(sec, "scan_prec"),
                     keep_certificates=False)
    report = rep.to_text()
    if rep.ok:
        return PASS, f"{rep.solved}/{rep.targets} targets certified", report, None
    y, why = rep.violations[0]
    mp = rep.m_prime
    w = Witness("ift-target", {"map": gamma.name, "x": _fmt_point(x), "y": _fmt_point(y),
                               "m": m, "m_prime": mp, "reason": why},
                lambda: _ift_target_fails(g, x, y, m, prec, mp, _free(sec)))
    return VIOLATION, f"{len(rep.violations)} targets failed", report, w


def _ift_target_fails(g, x, y, m, prec, mp, free) -> bool:
    try:
        return not newton_solve(g, x, y, m, prec, free=free, m_prime=mp).certified
    except EffTopError:
        return True


def op_mono(sec: Section, ctx: Context):
    coeffs = _series_list(ctx, sec.require("coeffs"))
    a = _series_list(ctx, sec.require("a"))[0]
    m = sec.require("m").as_int()
    p = UniversalFamilyPoint.make(coeffs, a)
    res = mono_check(p, m, _int(sec, "prec"), budget=ctx.budget, m_prime=_int(sec, "m_prime"))
    report = (f"result = {res.describe()}\nm_prime = {res.m_prime}\nprec = {res.prec}\n"
              f"cells = {res.cells}\nroots_in_ball = {res.roots_in_ball}\n"
              f"empirical_radius = {res.empirical_radius}\n")
    if res.unique:
        return PASS, "Unique", report, None
    b = res.counterexample
    w = Witness("second-root", {"coeffs": ", ".join(format_series(c) for c in coeffs),
                                "a": format_series(a), "b": format_series(b),
                                "m_prime": res.m_prime},
                lambda: check_second_root(p, b, res.m_prime))
    return VIOLATION, res.describe(), report, w


def op_ball_member(sec: Section, ctx: Context):
    X = resolve_variety(ctx, sec.require("variety").text, sec.require("variety"))
    center = _series_list(ctx, sec.require("center"))
    point = _series_list(ctx, sec.require("point"))
    prec = _int(sec, "prec")
    if prec is not None:
        center = [c.truncate(prec) for c in center]
        point = [c.truncate(prec) for c in point]
    r = sec.require("r").as_int()
    spec = BallSpec(X, r, center=PointRep(0, tuple(center)))
    status = ball_member(spec, PointRep(0, tuple(point)), budget=ctx.budget)
    report = f"membership = {status}\n"
    if status is Membership.INCONCLUSIVE:
        return INCONCLUSIVE, "precision too low to decide membership", report, None
    return PASS, str(status), report, None


def op_pushforward(sec: Section, ctx: Context):
    gamma = resolve_map(ctx, sec.require("map").text, sec.require("map"))
    m, prec = sec.require("m").as_int(), sec.require("prec").as_int()
    table = pushforward_density(gamma, library.mu(gamma.source), ctx.field, m, prec,
                                budget=ctx.budget, workers=ctx.workers)
    report = table.to_text()
    total = table.total()
    if "expect_total" in sec.values:
        exp = _fraction(sec.values["expect_total"])
        if total.as_fraction() != exp:
            w = Witness("pushforward-total", {"map": gamma.name, "m": m, "prec": prec,
                                              "total": str(total), "expect": str(exp)},
                        lambda: ball_measure(library.mu(gamma.source), ctx.field, m,
                                             prec).as_fraction() != exp)
            return VIOLATION, f"total {total} differs from {exp}", report, w
    return PASS, f"total {total}", report, None


def op_verify_bounds(sec: Section, ctx: Context):
    gamma = resolve_map(ctx, sec.require("map").text, sec.require("map"))
    m, prec = sec.require("m").as_int(), sec.require("prec").as_int()
    cap = _int(sec, "cap", 8)
    which = sec.values["bound"].text if "bound" in sec.values else "all"
    kinds = ["upper", "support", "total", "lower"] if which == "all" else [which]
    X, Y = library.mu(gamma.source), library.mu(gamma.target)
    lines, bad = [], None
    for kind in kinds:
        if kind == "upper":
            res = verify_upper_bound(gamma, X, Y, ctx.field, m, prec, cap, budget=ctx.budget,
                                     workers=ctx.workers)
        elif kind == "support":
            res = verify_support_lower_bound(gamma, X, Y, ctx.field, m, m, prec, cap,
                                             budget=ctx.budget, workers=ctx.workers)
        elif kind == "total":
            res = verify_total_mass(X, ctx.field, m, prec, cap)
        elif kind == "lower":
            res = measure_lower_bound(gamma, X, Y, ctx.field, m, prec, cap, budget=ctx.budget,
                                      workers=ctx.workers)
        else:
            raise sec.values["bound"].error(f"unknown bound {kind!r}")
        lines.append(f"{kind}\t{res.exponent if res.exponent is not None else 'none'}\t"
                     f"{res.margin}")
        if res.exponent is None and bad is None:
            bad = (kind, res)
    report = "bound\texponent\tmargin\n" + "\n".join(lines) + "\n"
    if bad is not None:
        kind, res = bad
        w = Witness("bound-cell", {"map": gamma.name, "bound": kind, "cap": cap,
                                   "cell": str(res.witness), "note": res.note})
        return VIOLATION, f"no {kind} exponent up to {cap}", report, w
    return PASS, "all bounds found", report, None


def op_smoothness(sec: Section, ctx: Context):
    gamma = resolve_map(ctx, sec.require("map").text, sec.require("map"))
    m, prec = sec.require("m").as_int(), sec.require("prec").as_int()
    res = pushforward_measure_smooth(gamma, library.mu(gamma.source), library.mu(gamma.target),
                                     ctx.field, m, prec, budget=ctx.budget, workers=ctx.workers)
    report = (f"m_prime = {res.m_prime}\nsmoothness = {res.radius.describe()}\n"
              f"ball_radius = {res.ball_radius}\nverified = {str(res.verified).lower()}\n"
              + res.f.to_text())
    if not res.radius.smooth:
        return INCONCLUSIVE, res.radius.describe(), report, None
    claim = _int(sec, "expect_radius")
    if not res.verified or (claim is not None and res.radius.radius > claim):
        w = Witness("smoothness", {"map": gamma.name, "m": m, "radius": res.radius.radius,
                                   "claim": claim, "cells": str(res.radius.witness)})
        return VIOLATION, f"smoothness radius {res.radius.radius}", report, w
    return PASS, f"smooth at radius {res.radius.radius}", report, None


def op_surjectivity(sec: Section, ctx: Context):
    gamma = resolve_map(ctx, sec.require("map").text, sec.require("map"))
    ms = sec.require("m").as_ints()
    prec, cap = sec.require("prec").as_int(), _int(sec, "cap", 8)
    claims = sec.values["expect"].as_ints() if "expect" in sec.values else None
    rows = [eff_surj_search(gamma, ctx.field, m, prec, cap, newton_free=_free(sec),
                            budget=ctx.budget, workers=ctx.workers) for m in ms]
    from .surjectivity import SurjectivityReport
    report = SurjectivityReport(rows, ctx.field.q, prec, cap).to_text()
    for i, row in enumerate(rows):
        if row.m_prime is None:
            if not row.confirmed:
                return INCONCLUSIVE, f"m = {row.m}: {row.note or 'unconfirmed miss'}", report, None
            y = row.witness
            w = Witness("no-preimage", {"map": gamma.name, "y": _fmt_point(y), "N": prec,
                                        "r": cap},
                        lambda y=y: confirm_no_preimage(gamma, ctx.field, y, prec, cap)[0])
            return VIOLATION, f"m = {row.m}: NotFound({cap}) witness {_fmt_point(y)}", report, w
        if claims is not None and i < len(claims) and row.m_prime > claims[i]:
            w = Witness("surjectivity-claim", {"map": gamma.name, "m": row.m,
                                               "claim": claims[i], "found": row.m_prime})
            return VIOLATION, f"m = {row.m}: needs m' = {row.m_prime}", report, w
    return PASS, "all rows found", report, None


def op_section(sec: Section, ctx: Context):
    gamma = resolve_map(ctx, sec.require("map").text, sec.require("map"))
    e, ell = gamma.target.dim, ctx.field.ell
    comps = _polys(sec.require("section"), e, ell)
    if "denominator" in sec.values:
        den = _poly(sec.values["denominator"], sec.values["denominator"].text, e, ell)
        sigma = RationalMap(tuple(comps), den, _int(sec, "power", 1))
    else:
        sigma = RationalMap.polynomial(comps)
    nv = sec.get("nonvanishing")
    wit = SectionWitness(sigma, sec.name or "", _poly(nv, nv.text, e, ell) if nv else None)
    samples, prec = _int(sec, "samples", 100), _int(sec, "prec", 8)
    res = check_section(gamma, wit, ctx.field, samples, prec, ctx.seed)
    report = f"section_ok = {str(res.ok).lower()}\nchecked = {res.checked}\n"
    if res.ok:
        return PASS, f"{res.checked} samples", report, None
    y = res.witness
    report += f"witness = {_fmt_point(y)}\n"
    g = gamma.pieces[0][1]

    def recheck():
        xs = list(wit.apply(y, 2 * prec + 16))
        img = g.evaluate(xs, None if g.is_polynomial else 2 * prec + 16)
        return any(not (a - b).truncate(prec).is_zero() for a, b in zip(img, y))

    w = Witness("section-point", {"map": gamma.name, "y": _fmt_point(y)}, recheck)
    return VIOLATION, f"gamma(sigma(y)) != y at {_fmt_point(y)}", report, w


def op_glue(sec: Section, ctx: Context):
    name = sec.require("glue").text
    if name not in library.GLUE:
        raise sec.values["glue"].error(f"unknown glue data {name!r}")
    data = library.GLUE[name](ctx.field.ell)
    m, prec = sec.require("m").as_int(), sec.require("prec").as_int()
    res = glue_verify(data, ctx.field, m, prec, budget=ctx.budget, seed=ctx.seed)
    report = res.to_text()
    if res.ok:
        return PASS, f"m_prime {res.m_prime}", report, None
    if res.witness is None:
        return INCONCLUSIVE, "; ".join(res.notes), report, None
    y, r = res.witness, res.m_prime
    gamma = data.gamma
    w = Witness("no-preimage", {"map": gamma.name, "y": _fmt_point(y), "N": prec, "r": r},
                lambda: confirm_no_preimage(gamma, ctx.field, y, prec, r)[0])
    return VIOLATION, f"uncovered cell {_fmt_point(y)}", report, w


OPS = {
    "ball-volume": op_ball_volume,
    "continuity": op_continuity,
    "newton": op_newton,
    "ift": op_ift,
    "mono": op_mono,
    "ball-member": op_ball_member,
    "pushforward": op_pushforward,
    "verify-bounds": op_verify_bounds,
    "smoothness": op_smoothness,
    "surjectivity": op_surjectivity,
    "section": op_section,
    "glue": op_glue,
}


def run_experiment(sec: Section, ctx: Context) -> Outcome:
    op = sec.require("op").text
    try:
        status, detail, report, witness = OPS[op](sec, ctx)
    except (PrecisionLoss, BudgetExceeded, CellSplit, DensityNotUnit) as exc:
        status, detail, report, witness = (INCONCLUSIVE, f"{type(exc).__name__}: {exc}",
                                           f"inconclusive = {exc}\n", None)
    return Outcome(sec.name or op, op, ctx.field.q, status, detail, report, witness)


# -- runs ----------------------------------------------------------------------------------------

def field_from_q(q: int | None, k: int | None, ell: int | None = None) -> FieldSpec:
    if q is None:
        ell = ell or 2
        return FieldSpec.get(ell, k or 1)
    for p in range(2, q + 1):
        if q % p == 0:
            if not is_prime(p):
                continue
            e, n = 0, q
            while n % p == 0:
                n //= p
                e += 1
            if n != 1:
                break
            if k is not None and k != e:
                raise ParseError(f"--q {q} and --k {k} disagree")
            return FieldSpec.get(p, e)
    raise ParseError(f"q = {q} is not a prime power")


def combined_status(outcomes: list[Outcome]) -> str:
    statuses = {o.status for o in outcomes}
    if VIOLATION in statuses:
        return VIOLATION
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return PASS


def summary_text(outcomes: list[Outcome]) -> str:
    lines = ["experiment\top\tq\tstatus\tdetail"]
    for o in outcomes:
        lines.append(f"{o.name}\t{o.op}\t{o.q}\t{o.status}\t{o.detail}")
        if o.witness is not None:
            lines.append(f"witness\t{o.name}\t{o.q}\t{o.witness.to_text()}")
    lines.append(f"overall\t{combined_status(outcomes)}")
    return "\n".join(lines) + "\n"


def validate_definitions(cfg: ExperimentConfig) -> None:
    """Resolve every defined variety and map once so that typos fail before any run."""
    for k in cfg.ks:
        ctx = Context(cfg, FieldSpec.get(cfg.ell, k))
        for name in cfg.varieties:
            resolve_variety(ctx, name)
        for name in cfg.maps:
            resolve_map(ctx, name)


def run_config(cfg: ExperimentConfig, args) -> list[Outcome]:
    validate_definitions(cfg)
    outcomes = []
    for sec in cfg.experiments:
        ks = sec.values["k"].as_ints() if "k" in sec.values else cfg.ks
        for k in ks:
            ctx = Context(cfg, FieldSpec.get(cfg.ell, k), _budget(sec, args), args.workers,
                          args.seed, args.force)
            log.info("running %s over F_%d", sec.name, ctx.field.q)
            outcomes.append(run_experiment(sec, ctx))
    return outcomes


def _budget(sec: Section, args):
    if "budget" in sec.values:
        return sec.values["budget"].as_int()
    return args.budget


def write_reports(outcomes: list[Outcome], out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for o in outcomes:
        with open(os.path.join(out_dir, f"{o.name}.q{o.q}.txt"), "w", encoding="utf-8") as fh:
            fh.write(o.report)
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary_text(outcomes))


def check_witnesses(outcomes: list[Outcome]) -> bool:
    ok = True
    for o in outcomes:
        if o.witness is None or o.witness.check is None:
            continue
        good = bool(o.witness.check())
        print(f"witness {o.name} q={o.q}: {'confirmed' if good else 'NOT confirmed'}")
        ok = ok and good
    return ok


def report_diff(a: str, b: str) -> list[str]:
    """Unified diff lines between two report files or directories (empty when identical)."""
    pairs = []
    if os.path.isdir(a) and os.path.isdir(b):
        names = sorted(set(os.listdir(a)) | set(os.listdir(b)))
        pairs = [(os.path.join(a, n), os.path.join(b, n)) for n in names]
    else:
        pairs = [(a, b)]
    out = []
    for pa, pb in pairs:
        ta = _read(pa)
        tb = _read(pb)
        if ta != tb:
            out += list(difflib.unified_diff(ta.splitlines(True), tb.splitlines(True), pa, pb))
            if not out or not out[-1].endswith("\n"):
                out.append("\n")
    return out


def _read(path: str) -> str:
    if not os.path.exists(path):
        return ""
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


# -- argument parsing ----------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, m_default=None, prec_default=None, list_m=False):
    p.add_argument("--q", type=int, help="field size, a prime power (default 2)")
    p.add_argument("--k", type=int, help="extension degree (q = ell^k)")
    if list_m:
        p.add_argument("--m", default=m_default, help="comma separated list of radii")
    else:
        p.add_argument("--m", type=int, default=m_default, required=m_default is None)
    p.add_argument("--prec", type=int, default=prec_default)
    p.add_argument("--budget", type=int, default=None, help="largest grid to enumerate")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true", help="run Newton without its preconditions")
    p.add_argument("--out", help="write the report to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="efftop", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every experiment of a config file")
    p.add_argument("config")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.add_argument("--out", help="directory for the reports (overrides [output])")
    p.add_argument("--check-witness", action="store_true",
                   help="re-verify every violation witness with its own checker")

    p = sub.add_parser("ball-volume", help="mu_m(B_m) of a named variety")
    p.add_argument("--variety", required=True)
    _common(p, prec_default=2)

    p = sub.add_parser("continuity", help="least m' with gamma(B_m) inside B_m'")
    p.add_argument("--map", required=True)
    p.add_argument("--modulus", action="store_true", help="also measure the modulus")
    _common(p)

    p = sub.add_parser("newton", help="certified Newton solve of gamma(x') = y")
    p.add_argument("--map", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--m-prime", type=int)
    p.add_argument("--free")
    _common(p, prec_default=10)

    p = sub.add_parser("ift", help="solve every target of B_-m'(gamma(x)) on the grid")
    p.add_argument("--map", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--m-prime", type=int)
    p.add_argument("--free")
    _common(p, prec_default=10)

    p = sub.add_parser("mono", help="uniqueness of a simple root near (f, a)")
    p.add_argument("--coeffs", required=True, help="c_0, ..., c_{n-1} of x^n + sum c_i x^i")
    p.add_argument("--a", required=True)
    p.add_argument("--m-prime", type=int)
    _common(p)

    p = sub.add_parser("pushforward", help="pushforward density table")
    p.add_argument("--map", required=True)
    _common(p, prec_default=2)

    p = sub.add_parser("verify-bounds", help="measure bounds for a map")
    p.add_argument("--map", required=True)
    p.add_argument("--bound", default="all", choices=["all", "upper", "support", "total",
                                                      "lower"])
    p.add_argument("--cap", type=int, default=8)
    _common(p, prec_default=2)

    p = sub.add_parser("smoothness", help="pushforward measure as a smooth density")
    p.add_argument("--map", required=True)
    _common(p, prec_default=2)

    p = sub.add_parser("surjectivity", help="effective surjectivity radii")
    p.add_argument("--map")
    p.add_argument("--glue", choices=sorted(library.GLUE))
    p.add_argument("--section", help="';'-separated section components")
    p.add_argument("--cap", type=int, default=8)
    p.add_argument("--free")
    _common(p, m_default="0", prec_default=2, list_m=True)

    p = sub.add_parser("report-diff", help="compare two reports bit for bit")
    p.add_argument("a")
    p.add_argument("b")
    return parser


def _section_from_args(op: str, args, keys: dict) -> Section:
    sec = Section("experiment", op, 1)
    sec.values["op"] = Value(op, 1, 1)
    for k, v in keys.items():
        if v is not None:
            sec.values[k] = Value(str(v), 1, 1)
    return sec


def _single(args) -> Section:
    cmd = args.command
    if cmd == "ball-volume":
        return _section_from_args(cmd, args, {"variety": args.variety, "m": args.m,
                                              "prec": args.prec})
    if cmd == "continuity":
        return _section_from_args(cmd, args, {"map": args.map, "m": args.m, "prec": args.prec,
                                              "modulus": args.modulus})
    if cmd in ("newton", "ift"):
        keys = {"map": args.map, "x": args.x, "m": args.m, "prec": args.prec,
                "m_prime": args.m_prime, "free": args.free}
        if cmd == "newton":
            keys["y"] = args.y
        return _section_from_args(cmd, args, keys)
    if cmd == "mono":
        return _section_from_args(cmd, args, {"coeffs": args.coeffs, "a": args.a, "m": args.m,
                                              "prec": args.prec, "m_prime": args.m_prime})
    if cmd == "pushforward" or cmd == "smoothness":
        return _section_from_args(cmd, args, {"map": args.map, "m": args.m, "prec": args.prec})
    if cmd == "verify-bounds":
        return _section_from_args(cmd, args, {"map": args.map, "m": args.m, "prec": args.prec,
                                              "bound": args.bound, "cap": args.cap})
    if cmd == "surjectivity":
        if args.glue:
            return _section_from_args("glue", args, {"glue": args.glue, "m": args.m,
                                                     "prec": args.prec})
        if not args.map:
            raise ParseError("surjectivity needs --map or --glue")
        if args.section:
            return _section_from_args("section", args, {"map": args.map,
                                                        "section": args.section,
                                                        "prec": args.prec})
        return _section_from_args(cmd, args, {"map": args.map, "m": args.m, "prec": args.prec,
                                              "cap": args.cap, "newton_free": args.free})
    raise ParseError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report-diff":
            diff = report_diff(args.a, args.b)
            sys.stdout.write("".join(diff))
            return 1 if diff else 0
        if args.command == "run":
            cfg = load_config(args.config)
            outcomes = run_config(cfg, args)
            text = summary_text(outcomes)
            sys.stdout.write(text)
            out_dir = args.out or cfg.output_dir
            if out_dir:
                write_reports(outcomes, out_dir)
            if args.check_witness and not check_witnesses(outcomes):
                return 2
            return EXIT_CODES[combined_status(outcomes)]
        field = field_from_q(args.q, args.k)
        ctx = Context(None, field, args.budget, args.workers, args.seed, args.force)
        outcome = run_experiment(_single(args), ctx)
        text = outcome.report
        if outcome.witness is not None:
            text += f"witness: {outcome.witness.to_text()}\n"
        if outcome.status != PASS:
            text += f"status: {outcome.status} ({outcome.detail})\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        sys.stdout.write(text)
        return EXIT_CODES[outcome.status]
    except ParseError as exc:
        print(f"efftop: {exc}", file=sys.stderr)
        return 2
    except EffTopError as exc:
        print(f"efftop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
