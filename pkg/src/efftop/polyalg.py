"""Sparse multivariate polynomials over F_ell and rational maps built from them.

Coefficients are integers modulo ell (the base prime field); evaluation at
Laurent series over F_{ell^k} embeds them through the prime subfield.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .arith.series import INF, LaurentSeries
from .errors import ParseError, ShapeError


def lucas_binom(n: int, k: int, p: int) -> int:
    """C(n, k) mod p via Lucas' theorem."""
    if k < 0 or k > n:
        return 0
    result = 1
    while n or k:
        ni, ki = n % p, k % p
        if ki > ni:
            return 0
        num = den = 1
        for i in range(ki):
            num = num * (ni - i) % p
            den = den * (i + 1) % p
        result = result * num * pow(den, p - 2, p) % p
        n //= p
        k //= p
    return result


class MultiPoly:
    """Polynomial in ``nvars`` variables with coefficients in F_ell.

    ``terms`` maps exponent tuples to nonzero residues mod ell.
    """

    __slots__ = ("nvars", "ell", "terms", "_hash")

    def __init__(self, nvars: int, ell: int, terms: dict | Iterable = ()):
        items = terms.items() if isinstance(terms, dict) else terms
        clean: dict[tuple[int, ...], int] = {}
        for exps, c in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ShapeError(f"bad exponent vector {exps} for {nvars} variables")
            c = (clean.get(exps, 0) + int(c)) % ell
            if c:
                clean[exps] = c
            else:
                clean.pop(exps, None)
        self.nvars, self.ell = nvars, ell
        self.terms = dict(sorted(clean.items()))
        self._hash = None

    # -- constructors ----------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int, ell: int) -> MultiPoly:
        return cls(nvars, ell, {})

    @classmethod
    def const(cls, nvars: int, ell: int, c: int) -> MultiPoly:
        return cls(nvars, ell, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, ell: int, i: int) -> MultiPoly:
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, ell, {tuple(e): 1})

    @classmethod
    def parse(cls, text: str, nvars: int, ell: int) -> MultiPoly:
        return parse_poly(text, nvars, ell)

    # -- structure -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def deg(self) -> int:
        """Total degree; the zero polynomial and constants have degree 0."""
        return max((sum(e) for e in self.terms), default=0)

    def deg_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self) -> int:
        return self.terms.get((0,) * self.nvars, 0)

    def __eq__(self, other):
        return (isinstance(other, MultiPoly) and self.nvars == other.nvars
                and self.ell == other.ell and self.terms == other.terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, self.ell, tuple(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"MultiPoly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)

    def __getstate__(self):
        return (self.nvars, self.ell, self.terms)

    def __setstate__(self, state):
        self.nvars, self.ell, self.terms = state
        self._hash = None

    # -- ring operations ----------------------------------------------------------
    def _lift(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars or other.ell != self.ell:
                raise ShapeError("polynomials over different rings")
            return other
        if isinstance(other, int):
            return MultiPoly.const(self.nvars, self.ell, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return MultiPoly(self.nvars, self.ell, list(self.terms.items()) + list(other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, self.ell, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict[tuple[int, ...], int] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = (out.get(e, 0) + ca * cb) % self.ell
        return MultiPoly(self.nvars, self.ell, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(self.nvars, self.ell, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- calculus -------------------------------------------------------------
    def hasse(self, i: Sequence[int]) -> MultiPoly:
        """Hasse derivative: c x^a -> c prod_j C(a_j, i_j) x^(a - i)."""
        i = tuple(i)
        if len(i) != self.nvars:
            raise ShapeError("multi-index length differs from nvars")
        out = {}
        for e, c in self.terms.items():
            if any(a < b for a, b in zip(e, i)):
                continue
            coef = c
            for a, b in zip(e, i):
                coef = coef * lucas_binom(a, b, self.ell) % self.ell
                if not coef:
                    break
            if coef:
                out[tuple(a - b for a, b in zip(e, i))] = coef
        return MultiPoly(self.nvars, self.ell, out)

    def partial(self, t: int) -> MultiPoly:
        idx = [0] * self.nvars
        idx[t] = 1
        return self.hasse(idx)

    # -- evaluation -------------------------------------------------------------
    def __call__(self, xs: Sequence[LaurentSeries]) -> LaurentSeries:
        return poly_eval(self, xs)

    def compose(self, subs: Sequence[MultiPoly]) -> MultiPoly:
        """Substitute polynomials (all in a common ring) for the variables."""
        if len(subs) != self.nvars:
            raise ShapeError("substitution length differs from nvars")
        ring = subs[0] if subs else None
        result = MultiPoly.zero(ring.nvars, self.ell)
        cache: dict[tuple[int, int], MultiPoly] = {}
        for e, c in self.terms.items():
            term = MultiPoly.const(ring.nvars, self.ell, c)
            for j, a in enumerate(e):
                if a:
                    key = (j, a)
                    if key not in cache:
                        cache[key] = subs[j] ** a
                    term = term * cache[key]
            result = result + term
        return result

    def extend(self, nvars: int, positions: Sequence[int] | None = None) -> MultiPoly:
        """Reinterpret in a ring with more variables; variable j goes to positions[j]."""
        positions = list(range(self.nvars)) if positions is None else list(positions)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * nvars
            for j, a in enumerate(e):
                ne[positions[j]] += a
            out[tuple(ne)] = c
        return MultiPoly(nvars, self.ell, out)


def poly_eval(p: MultiPoly, xs: Sequence[LaurentSeries], field=None) -> LaurentSeries:
    """Evaluate at a point; precision propagates through series arithmetic."""
    if len(xs) != p.nvars:
        raise ShapeError(f"point has {len(xs)} coordinates, polynomial has {p.nvars} variables")
    if field is None:
        if not xs:
            raise ShapeError("evaluation of a polynomial in zero variables needs a field")
        field = xs[0].field
    powers: list[dict[int, LaurentSeries]] = [{0: LaurentSeries.one(field)} for _ in xs]

    def power(j: int, a: int) -> LaurentSeries:
        cache = powers[j]
        if a not in cache:
            b = max(k for k in cache if k < a)
            val = cache[b]
            for k in range(b + 1, a + 1):
                val = val * xs[j]
                cache[k] = val
        return cache[a]

    total = LaurentSeries.zero(field)
    for e, c in p.terms.items():
        term = LaurentSeries.scalar(field, c)
        for j, a in enumerate(e):
            if a:
                term = term * power(j, a)
        total = total + term
    return total


def hasse_derivative(p: MultiPoly, i: Sequence[int]) -> MultiPoly:
    return p.hasse(i)


def multi_indices(d: int, max_total: int) -> list[tuple[int, ...]]:
    """All multi-indices in d variables with total degree <= max_total."""
    return [i for i in itertools.product(range(max_total + 1), repeat=d) if sum(i) <= max_total]


def taylor_coefficients(p: MultiPoly, center: Sequence[LaurentSeries], d: int | None = None
                        ) -> dict[tuple[int, ...], LaurentSeries]:
    """Coefficients b_i of p(c + z) = sum_i b_i z^i in the first ``d`` variables.

    Remaining variables are held at the given values.  Computed by direct
    binomial expansion of each monomial.
    """
    d = p.nvars if d is None else d
    field = center[0].field
    out: dict[tuple[int, ...], LaurentSeries] = {}
    pw: dict[tuple[int, int], LaurentSeries] = {}

    def power(j: int, a: int) -> LaurentSeries:
        if (j, a) not in pw:
            pw[(j, a)] = center[j] ** a
        return pw[(j, a)]

    for e, c in p.terms.items():
        fixed = LaurentSeries.scalar(field, c)
        for j in range(d, p.nvars):
            if e[j]:
                fixed = fixed * power(j, e[j])
        for ks in itertools.product(*(range(e[j] + 1) for j in range(d))):
            coef = 1
            for j, k in enumerate(ks):
                coef = coef * lucas_binom(e[j], k, p.ell) % p.ell
                if not coef:
                    break
            if not coef:
                continue
            term = fixed.scale(coef)
            for j, k in enumerate(ks):
                if e[j] - k:
                    term = term * power(j, e[j] - k)
            out[ks] = out[ks] + term if ks in out else term
    return {k: v for k, v in out.items() if not v.is_zero() or v.prec != INF}


# -- matrices of series ---------------------------------------------------------

def series_det(a: Sequence[Sequence[LaurentSeries]]) -> LaurentSeries:
    n = len(a)
    if any(len(row) != n for row in a):
        raise ShapeError("determinant of a non-square matrix")
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        term = a[0][j] * series_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def series_adjugate(a: Sequence[Sequence[LaurentSeries]]) -> list[list[LaurentSeries]]:
    """Transposed cofactor matrix, so that A * Adj(A) = det(A) * I."""
    n = len(a)
    if any(len(row) != n for row in a):
        raise ShapeError("adjugate of a non-square matrix")
    field = a[0][0].field
    if n == 1:
        return [[LaurentSeries.one(field)]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(a) if k != i]
            c = series_det(minor)
            adj[j][i] = -c if (i + j) % 2 else c
    return adj


def mat_vec(a: Sequence[Sequence[LaurentSeries]], w: Sequence[LaurentSeries]) -> list[LaurentSeries]:
    if any(len(row) != len(w) for row in a):
        raise ShapeError("matrix/vector size mismatch")
    out = []
    for row in a:
        acc = row[0] * w[0]
        for x, y in zip(row[1:], w[1:]):
            acc = acc + x * y
        out.append(acc)
    return out


def mat_mul(a, b):
    return [[_dot([a[i][k] for k in range(len(b))], [b[k][j] for k in range(len(b))])
             for j in range(len(b[0]))] for i in range(len(a))]


def _dot(u, v):
    acc = u[0] * v[0]
    for x, y in zip(u[1:], v[1:]):
        acc = acc + x * y
    return acc


def adjugate_apply(jac: Sequence[Sequence[LaurentSeries]], w: Sequence[LaurentSeries]
                   ) -> list[LaurentSeries]:
    """Adj(J) w, the division-free part of J^{-1} w = Adj(J) w / det J."""
    return mat_vec(series_adjugate(jac), w)


# -- rational maps -------------------------------------------------------------------

@dataclass(frozen=True)
class RationalMap:
    """gamma = h / f^M componentwise, h a vector of polynomials."""

    numerators: tuple[MultiPoly, ...]
    denom: MultiPoly
    power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "numerators", tuple(self.numerators))
        if not self.numerators:
            raise ShapeError("a map needs at least one component")
        d = self.numerators[0].nvars
        if any(h.nvars != d for h in self.numerators) or self.denom.nvars != d:
            raise ShapeError("components must share the source dimension")
        if self.power < 0:
            raise ShapeError("negative denominator power")
        if self.power == 0 and self.denom != MultiPoly.const(d, self.ell, 1):
            raise ShapeError("power 0 requires denominator 1")
        if self.denom.is_zero():
            raise ShapeError("zero denominator")

    @classmethod
    def polynomial(cls, comps: Sequence[MultiPoly]) -> RationalMap:
        p = comps[0]
        return cls(tuple(comps), MultiPoly.const(p.nvars, p.ell, 1), 0)

    @classmethod
    def identity(cls, d: int, ell: int) -> RationalMap:
        return cls.polynomial([MultiPoly.var(d, ell, i) for i in range(d)])

    @property
    def ell(self) -> int:
        return self.numerators[0].ell

    @property
    def source_dim(self) -> int:
        return self.numerators[0].nvars

    @property
    def target_dim(self) -> int:
        return len(self.numerators)

    @property
    def is_polynomial(self) -> bool:
        return self.power == 0

    def effective_power(self) -> int:
        """The M bounding both the denominator power and the numerator degrees."""
        return max([self.power] + [h.deg() for h in self.numerators])

    def __call__(self, xs: Sequence[LaurentSeries], prec=None, field=None) -> list[LaurentSeries]:
        return self.evaluate(xs, prec, field)

    def evaluate(self, xs: Sequence[LaurentSeries], prec=None, field=None) -> list[LaurentSeries]:
        vals = [poly_eval(h, xs, field) for h in self.numerators]
        if self.power == 0:
            return [v if prec is None else v.truncate(prec) for v in vals]
        den = poly_eval(self.denom, xs, field) ** self.power
        return [v.div(den, prec) for v in vals]

    def denominator_at(self, xs) -> LaurentSeries:
        return poly_eval(self.denom, xs)

    def compose(self, inner: RationalMap) -> RationalMap:
        """self o inner, for polynomial ``self`` or polynomial ``inner`` numerators."""
        if inner.power == 0:
            nums = [h.compose(list(inner.numerators)) for h in self.numerators]
            den = self.denom.compose(list(inner.numerators))
            return RationalMap(tuple(nums), den, self.power)
        if self.power == 0:
            # h(g/F^M): clear denominators to the common power deg(h) * M
            top = max(h.deg() for h in self.numerators)
            nums = []
            for h in self.numerators:
                acc = MultiPoly.zero(inner.source_dim, self.ell)
                for e, c in h.terms.items():
                    term = MultiPoly.const(inner.source_dim, self.ell, c)
                    for j, a in enumerate(e):
                        if a:
                            term = term * inner.numerators[j] ** a
                    term = term * inner.denom ** (inner.power * (top - sum(e)))
                    acc = acc + term
                nums.append(acc)
            if top == 0:
                return RationalMap.polynomial(nums)
            return RationalMap(tuple(nums), inner.denom, inner.power * top)
        raise ShapeError("composition of two non-polynomial maps is not supported")


def parse_map(texts: Sequence[str], nvars: int, ell: int, denom: str = "1", power: int = 0
              ) -> RationalMap:
    nums = tuple(parse_poly(s, nvars, ell) for s in texts)
    return RationalMap(nums, parse_poly(denom, nvars, ell), power)


@dataclass(frozen=True)
class JacobianData:
    """Partial derivatives of gamma = h / f^M.

    ``partials[s][t]`` is the numerator f*d_t h_s - M*(d_t f)*h_s; the actual
    partial derivative is that numerator divided by f^(M+1) (for polynomial
    maps it is just d_t h_s).  ``det`` is the numerator of the Jacobian
    determinant, whose denominator is f^(d*(M+1)).
    """

    gamma: RationalMap
    partials: tuple[tuple[MultiPoly, ...], ...]
    det: MultiPoly | None

    @property
    def denom_power(self) -> int:
        return 0 if self.gamma.power == 0 else self.gamma.power + 1

    def matrix_at(self, xs: Sequence[LaurentSeries], prec=None) -> list[list[LaurentSeries]]:
        rows = [[poly_eval(p, xs) for p in row] for row in self.partials]
        if self.denom_power == 0:
            return rows
        den = poly_eval(self.gamma.denom, xs) ** self.denom_power
        return [[v.div(den, prec) for v in row] for row in rows]

    def det_at(self, xs: Sequence[LaurentSeries], prec=None) -> LaurentSeries:
        if self.det is None:
            raise ShapeError("determinant of a non-square Jacobian")
        v = poly_eval(self.det, xs)
        if self.denom_power == 0:
            return v
        den = poly_eval(self.gamma.denom, xs) ** (self.denom_power * self.gamma.source_dim)
        return v.div(den, prec)

    def det_degree(self) -> int:
        if self.det is None:
            raise ShapeError("determinant of a non-square Jacobian")
        return self.det.deg()


def poly_det(m: list[list[MultiPoly]]) -> MultiPoly:
    n = len(m)
    if n == 1:
        return m[0][0]
    total = MultiPoly.zero(m[0][0].nvars, m[0][0].ell)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * poly_det(minor)
        total = total - term if j % 2 else total + term
    return total


def jacobian(gamma: RationalMap) -> JacobianData:
    d = gamma.source_dim
    f, M = gamma.denom, gamma.power
    rows = []
    for h in gamma.numerators:
        row = []
        for t in range(d):
            if M == 0:
                row.append(h.partial(t))
            else:
                row.append(f * h.partial(t) - (f.partial(t) * h) * M)
        rows.append(tuple(row))
    det = poly_det([list(r) for r in rows]) if gamma.target_dim == d else None
    return JacobianData(gamma, tuple(rows), det)


# -- text grammar ---------------------------------------------------------------------

def format_poly(p: MultiPoly) -> str:
    if not p.terms:
        return "0"
    parts = []
    for e, c in sorted(p.terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-x for x in kv[0]))):
        mono = "*".join(f"x{j}" if a == 1 else f"x{j}^{a}" for j, a in enumerate(e) if a)
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts)


class _PolyParser:
    def __init__(self, text: str, nvars: int, ell: int, line: int | None):
        self.text, self.nvars, self.ell, self.line = text, nvars, ell, line
        self.pos = 0

    def error(self, msg: str) -> ParseError:
        return ParseError(f"{msg} in polynomial {self.text!r}", self.line, self.pos + 1)

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> MultiPoly:
        p = self.expr()
        if self.peek():
            raise self.error(f"unexpected {self.peek()!r}")
        return p

    def expr(self) -> MultiPoly:
        sign = 1
        if self.peek() in "+-" and self.peek():
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        acc = self.term() * sign
        while self.peek() in ("+", "-") and self.peek():
            op = self.text[self.pos]
            self.pos += 1
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> MultiPoly:
        acc = self.power()
        while self.peek() == "*":
            self.pos += 1
            acc = acc * self.power()
        return acc

    def power(self) -> MultiPoly:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            self.peek()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                raise self.error("expected exponent")
            base = base ** int(self.text[start:self.pos])
        return base

    def atom(self) -> MultiPoly:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                raise self.error("expected ')'")
            self.pos += 1
            return inner
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return MultiPoly.const(self.nvars, self.ell, int(self.text[start:self.pos]))
        if ch == "x":
            self.pos += 1
            if self.pos >= len(self.text) or not self.text[self.pos].isdigit():
                raise self.error("expected variable index after 'x'")
            idx = int(self.text[self.pos])
            self.pos += 1
            if idx >= self.nvars:
                self.pos -= 2
                raise self.error(f"variable x{idx} out of range for {self.nvars} variables")
            return MultiPoly.var(self.nvars, self.ell, idx)
        if not ch:
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {ch!r}")


def parse_poly(text: str, nvars: int, ell: int, line: int | None = None) -> MultiPoly:
    """Parse the grammar: x0..x9, integers, + - * ^ and parentheses."""
    return _PolyParser(text, nvars, ell, line).parse()
