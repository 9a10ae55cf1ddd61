"""Truncated Laurent series over F_q with absolute precision.

A series is known modulo ``t**prec``.  ``prec`` may be ``INF`` for exact
Laurent polynomials (finitely many nonzero terms); grid representatives and
polynomial images of them are exact in this sense.

Precision propagation follows the usual rules for absolute precision:

* ``a + b`` is known modulo ``t**min(pa, pb)``
* ``a * b`` is known modulo ``t**min(pa + vb, pb + va)``
* ``1 / b`` is known modulo ``t**(pb - 2*vb)``

where the valuation of a zero known only modulo ``t**p`` is taken to be ``p``
(a lower bound) inside these formulas.
"""

from __future__ import annotations

import math
import re

from ..errors import DivisionByZero, ParseError, PrecisionLoss
from .field import FieldSpec, FqElem, format_fq, parse_univariate

INF = math.inf


def _norm(field: FieldSpec, start: int, digits, prec):
    """Build a canonical series from raw digits starting at exponent ``start``."""
    n = len(digits)
    if prec != INF:
        n = min(n, max(0, int(prec) - start))
    i = 0
    while i < n and digits[i] == 0:
        i += 1
    if i == n:
        return LaurentSeries._make(field, None, (), prec)
    j = n
    while digits[j - 1] == 0:
        j -= 1
    return LaurentSeries._make(field, start + i, tuple(digits[i:j]), prec)


class LaurentSeries:
    """Element of F_q((t)) known modulo ``t**prec``.

    Nonzero values carry an exact valuation; a zero carries only its
    precision and reports ``val == INF``.
    """

    __slots__ = ("field", "_v", "_c", "prec")

    def __init__(self, field: FieldSpec, coeffs=(), val: int = 0, prec=INF):
        codes = []
        for c in coeffs:
            if isinstance(c, FqElem):
                codes.append(c.code)
            else:
                codes.append(int(c) % field.ell if field.k == 1 else int(c))
        s = _norm(field, val, codes, prec)
        self.field, self._v, self._c, self.prec = field, s._v, s._c, s.prec

    @classmethod
    def _make(cls, field, v, c, prec):
        obj = object.__new__(cls)
        obj.field, obj._v, obj._c, obj.prec = field, v, c, prec
        return obj

    # -- constructors -------------------------------------------------------------
    @classmethod
    def zero(cls, field: FieldSpec, prec=INF) -> LaurentSeries:
        return cls._make(field, None, (), prec)

    @classmethod
    def one(cls, field: FieldSpec, prec=INF) -> LaurentSeries:
        return cls.monomial(field, 1, 0, prec)

    @classmethod
    def monomial(cls, field: FieldSpec, code: int, exponent: int, prec=INF) -> LaurentSeries:
        if code == 0 or exponent >= prec:
            return cls._make(field, None, (), prec)
        return cls._make(field, exponent, (code,), prec)

    @classmethod
    def scalar(cls, field: FieldSpec, value, prec=INF) -> LaurentSeries:
        code = value.code if isinstance(value, FqElem) else field.from_int(value)
        return cls.monomial(field, code, 0, prec)

    @classmethod
    def from_digits(cls, field: FieldSpec, start: int, digits, prec=INF) -> LaurentSeries:
        return _norm(field, start, list(digits), prec)

    # -- basic properties ------------------------------------------------------
    @property
    def val(self):
        return INF if self._v is None else self._v

    @property
    def vlb(self):
        """Valuation lower bound usable in precision formulas."""
        return self.prec if self._v is None else self._v

    @property
    def coeffs(self) -> list[FqElem]:
        if self._v is None:
            return []
        out = [FqElem(self.field, c) for c in self._c]
        if self.prec != INF:
            out.extend(FqElem(self.field, 0) for _ in range(int(self.prec) - self._v - len(self._c)))
        return out

    @property
    def is_exact(self) -> bool:
        return self.prec == INF

    def is_zero(self) -> bool:
        return self._v is None

    def __bool__(self):
        return self._v is not None

    def coeff(self, e: int) -> int:
        """Code of the coefficient of t**e."""
        if e >= self.prec:
            raise PrecisionLoss(f"coefficient of t^{e} unknown at precision {self.prec}", e + 1)
        if self._v is None or e < self._v or e >= self._v + len(self._c):
            return 0
        return self._c[e - self._v]

    def digits(self, lo: int, hi: int) -> tuple[int, ...]:
        """Codes of the coefficients of t**lo .. t**(hi-1)."""
        if hi > self.prec:
            raise PrecisionLoss(f"digits up to t^{hi - 1} unknown at precision {self.prec}", hi)
        if self._v is None:
            return (0,) * (hi - lo)
        v, c = self._v, self._c
        return tuple(c[e - v] if v <= e < v + len(c) else 0 for e in range(lo, hi))

    def require_val(self) -> int:
        """Exact valuation; raises PrecisionLoss for a zero known only to finite precision."""
        if self._v is None:
            if self.prec == INF:
                raise DivisionByZero("valuation of the exact zero is infinite")
            raise PrecisionLoss(f"value vanishes modulo t^{self.prec}; valuation undetermined",
                                int(self.prec) + 1)
        return self._v

    def unit_part_leading(self) -> int:
        return self._c[0] if self._c else 0

    # -- precision handling ---------------------------------------------------------
    def truncate(self, prec) -> LaurentSeries:
        """Same series known only modulo t**prec (prec capped at the current one)."""
        if prec >= self.prec:
            return self
        if self._v is None:
            return LaurentSeries._make(self.field, None, (), prec)
        return _norm(self.field, self._v, list(self._c), prec)

    def lift(self, prec=INF) -> LaurentSeries:
        """Treat the stored digits as an exact representative, known to ``prec``."""
        return LaurentSeries._make(self.field, self._v, self._c, prec)

    def with_prec(self, prec) -> LaurentSeries:
        """Representative with precision set to ``prec`` (truncating or padding)."""
        if prec <= self.prec:
            return self.truncate(prec)
        return self.lift(prec)

    def congruent(self, other: LaurentSeries, n) -> bool:
        """Equality modulo t**n (both operands must be known to n)."""
        return (self - other).truncate(n).is_zero() and min(self.prec, other.prec) >= n

    def key(self, lo: int, hi: int) -> tuple[int, ...]:
        return self.digits(lo, hi)

    # -- arithmetic --------------------------------------------------------------
    def _coerce(self, other) -> LaurentSeries:
        if isinstance(other, LaurentSeries):
            if other.field is not self.field:
                raise ValueError("series over different fields")
            return other
        if isinstance(other, (int, FqElem)):
            return LaurentSeries.scalar(self.field, other)
        return NotImplemented

    def __neg__(self):
        f = self.field
        return LaurentSeries._make(f, self._v, tuple(f.neg(c) for c in self._c), self.prec)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(self, other, False)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(self, other, True)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(other, self, True)

    def __mul__(self, other):
        if isinstance(other, (int, FqElem)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self, other)

    __rmul__ = __mul__

    def scale(self, c) -> LaurentSeries:
        f = self.field
        code = c.code if isinstance(c, FqElem) else f.from_int(c)
        if code == 0:
            return LaurentSeries._make(f, None, (), self.prec)
        if code == 1:
            return self
        return LaurentSeries._make(f, self._v, tuple(f.mul(code, x) for x in self._c), self.prec)

    def shift(self, n: int) -> LaurentSeries:
        """Multiply by t**n."""
        return LaurentSeries._make(self.field, None if self._v is None else self._v + n, self._c,
                                   self.prec + n)

    def inverse(self, prec=None) -> LaurentSeries:
        return LaurentSeries.one(self.field).div(self, prec)

    def div(self, other, prec=None) -> LaurentSeries:
        """Quotient, optionally capped at absolute precision ``prec``.

        An exact quotient of exact operands exists only when the divisor is a
        monomial; otherwise ``prec`` must be supplied.
        """
        other = self._coerce(other)
        return _div(self, other, prec)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _div(self, other, None)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _div(other, self, None)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = LaurentSeries.one(self.field)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # -- comparison / display -------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (self.field is other.field and self._v == other._v and self._c == other._c
                and self.prec == other.prec)

    def __hash__(self):
        return hash((self._v, self._c, self.prec))

    def __repr__(self):
        return f"LaurentSeries({format_series(self)})"

    def __str__(self):
        return format_series(self)


def _add(a: LaurentSeries, b: LaurentSeries, negate: bool) -> LaurentSeries:
    f = a.field
    prec = min(a.prec, b.prec)
    if b._v is None:
        return a.truncate(prec)
    if a._v is None:
        return (-b if negate else b).truncate(prec)
    lo = min(a._v, b._v)
    hi = max(a._v + len(a._c), b._v + len(b._c))
    if prec != INF:
        hi = min(hi, int(prec))
    if hi <= lo:
        return LaurentSeries._make(f, None, (), prec)
    out = [0] * (hi - lo)
    off = a._v - lo
    for i, c in enumerate(a._c):
        if off + i >= hi - lo:
            break
        out[off + i] = c
    off = b._v - lo
    if f.k == 1:
        p = f.ell
        for i, c in enumerate(b._c):
            j = off + i
            if j >= hi - lo:
                break
            out[j] = (out[j] - c) % p if negate else (out[j] + c) % p
    else:
        add, neg = f.add, f.neg
        for i, c in enumerate(b._c):
            j = off + i
            if j >= hi - lo:
                break
            out[j] = add(out[j], neg(c) if negate else c)
    return _norm(f, lo, out, prec)


def _mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    f = a.field
    prec = min(a.prec + b.vlb, b.prec + a.vlb)
    if a._v is None or b._v is None:
        return LaurentSeries._make(f, None, (), prec)
    start = a._v + b._v
    n = len(a._c) + len(b._c) - 1
    if prec != INF:
        n = min(n, int(prec) - start)
    if n <= 0:
        return LaurentSeries._make(f, None, (), prec)
    A, B = a._c, b._c
    if f.k == 1:
        p = f.ell
        out = [0] * n
        for i, x in enumerate(A):
            if i >= n:
                break
            if x:
                for j in range(min(len(B), n - i)):
                    out[i + j] += x * B[j]
        out = [c % p for c in out]
    else:
        mul, add = f._mul, f._add
        out = [0] * n
        if mul is not None:
            for i, x in enumerate(A):
                if i >= n:
                    break
                if x:
                    row = mul[x]
                    for j in range(min(len(B), n - i)):
                        y = B[j]
                        if y:
                            out[i + j] = add[out[i + j]][row[y]]
        else:
            for i, x in enumerate(A):
                if i >= n:
                    break
                for j in range(min(len(B), n - i)):
                    out[i + j] = f.add(out[i + j], f.mul(x, B[j]))
    return _norm(f, start, out, prec)


def _unit_inverse(f: FieldSpec, U: tuple[int, ...], n: int) -> list[int]:
    """First n digits of the inverse of the unit power series with digits U."""
    w0 = f.inv(U[0])
    w = [w0]
    if f.k == 1:
        p = f.ell
        for m in range(1, n):
            s = 0
            for i in range(1, min(m, len(U) - 1) + 1):
                s += U[i] * w[m - i]
            w.append((-w0 * s) % p)
    else:
        for m in range(1, n):
            s = 0
            for i in range(1, min(m, len(U) - 1) + 1):
                s = f.add(s, f.mul(U[i], w[m - i]))
            w.append(f.neg(f.mul(w0, s)))
    return w


def _div(a: LaurentSeries, b: LaurentSeries, cap) -> LaurentSeries:
    f = a.field
    if b._v is None:
        raise DivisionByZero(f"division by a series vanishing modulo t^{b.prec}")
    vb = b._v
    prec = min(a.prec - vb, b.prec - 2 * vb + a.vlb)
    if cap is not None:
        prec = min(prec, cap)
    if a._v is None:
        return LaurentSeries._make(f, None, (), prec)
    if prec == INF:
        if len(b._c) == 1:
            inv = f.inv(b._c[0])
            return LaurentSeries._make(f, a._v - vb, tuple(f.mul(inv, c) for c in a._c), INF)
        raise PrecisionLoss("exact quotient is not a Laurent polynomial; specify a precision")
    start = a._v - vb
    n = int(prec) - start
    if n <= 0:
        return LaurentSeries._make(f, None, (), prec)
    winv = _unit_inverse(f, b._c, n)
    quotient_unit = LaurentSeries._make(f, 0, tuple(winv), INF)
    a_unit = LaurentSeries._make(f, 0, a._c, INF)
    q = _mul(a_unit, quotient_unit)
    return _norm(f, start, list(q._c), prec)


def ls_arith(a: LaurentSeries, b: LaurentSeries, op: str) -> LaurentSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


# -- literal syntax ------------------------------------------------------------------

def _format_exp(e: int) -> str:
    return "t" if e == 1 else f"t^{e}"


def format_series(s: LaurentSeries) -> str:
    f = s.field
    parts = []
    if s._v is not None:
        for i, c in enumerate(s._c):
            if not c:
                continue
            e = s._v + i
            cs = format_fq(f, c)
            if e == 0:
                parts.append(cs)
            elif c == 1:
                parts.append(_format_exp(e))
            else:
                parts.append(f"{cs}*{_format_exp(e)}")
    body = " + ".join(parts) if parts else "0"
    if s.prec == INF:
        return body
    return f"{body} (mod t^{int(s.prec)})"


_MOD_RE = re.compile(r"\(\s*mod\s+t\^(-?\d+)\s*\)\s*$")


def _split_terms(body: str) -> list[tuple[str, str]]:
    terms, depth, cur, sign = [], 0, "", "+"
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in "+-" and cur.strip() and not cur.rstrip().endswith("^"):
            terms.append((sign, cur.strip()))
            cur, sign = "", ch
            continue
        if depth == 0 and ch in "+-" and not cur.strip():
            sign = "-" if (sign == "-") != (ch == "-") else "+"
            continue
        cur += ch
    if cur.strip():
        terms.append((sign, cur.strip()))
    return terms


def parse_series(field: FieldSpec, text: str) -> LaurentSeries:
    """Parse the literal syntax ``t^-1 + 2 + t^2 (mod t^5)``.

    Coefficients may be integers, powers of ``u`` or parenthesized
    polynomials in ``u`` (for extension fields), e.g. ``(u+1)*t^3``.
    """
    text = text.strip()
    prec = INF
    m = _MOD_RE.search(text)
    if m:
        prec = int(m.group(1))
        text = text[: m.start()].strip()
    if not text:
        raise ParseError("empty series literal")
    result = LaurentSeries.zero(field)
    for sign, term in _split_terms(text):
        coeff = field.elem(1)
        exponent = 0
        for factor in term.split("*"):
            factor = factor.strip()
            if not factor:
                raise ParseError(f"bad term {term!r}")
            if factor.startswith("("):
                if not factor.endswith(")"):
                    raise ParseError(f"unbalanced parentheses in {term!r}")
                coeff = coeff * field.elem(parse_univariate(factor[1:-1], field.ell))
            elif factor[0] == "t":
                mm = re.fullmatch(r"t(?:\^(-?\d+))?", factor)
                if mm is None:
                    raise ParseError(f"bad power of t {factor!r}")
                exponent += int(mm.group(1)) if mm.group(1) else 1
            elif factor[0] == "u":
                coeff = coeff * field.elem(parse_univariate(factor, field.ell))
            elif factor.isdigit():
                coeff = coeff * int(factor)
            else:
                raise ParseError(f"bad factor {factor!r} in series literal")
        if sign == "-":
            coeff = -coeff
        result = result + LaurentSeries.monomial(field, coeff.code, exponent)
    return result.truncate(prec) if prec != INF else result
