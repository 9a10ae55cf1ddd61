"""Finite fields F_q, q = ell**k, realized as F_ell[u]/(modulus).

Elements are handled internally as integer *codes*: the coefficient vector
``(c_0, ..., c_{k-1})`` in the power basis of ``u`` packed as
``c_0 + c_1*ell + ... + c_{k-1}*ell**(k-1)``.  Code 0 is zero and code 1 is one.
Small fields carry full addition/multiplication tables.
"""

from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass

from ..errors import DivisionByZero, ParseError

_TABLE_LIMIT = 256

# Conway polynomials, low-to-high coefficients, monic.
_CONWAY = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (5, 4): (2, 4, 4, 0, 1),
    (7, 2): (3, 6, 1),
    (7, 3): (4, 0, 6, 1),
    (7, 4): (3, 4, 5, 0, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _poly_mod(a: list[int], m: tuple[int, ...], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m over F_p."""
    a = [c % p for c in a]
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    del a[dm:]
    return a


def is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """Exhaustive factor test: no monic divisor of degree 1..deg//2."""
    k = len(modulus) - 1
    if k < 1 or modulus[-1] % p != 1:
        return False
    for d in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            divisor = tuple(low) + (1,)
            if not any(_poly_mod(list(modulus), divisor, p)):
                return False
    return True


def first_irreducible(p: int, k: int) -> tuple[int, ...]:
    if (p, k) in _CONWAY:
        return _CONWAY[(p, k)]
    for low in itertools.product(range(p), repeat=k):
        cand = tuple(reversed(low)) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise ValueError(f"no irreducible polynomial of degree {k} over F_{p}")


class FieldSpec:
    """The field F_{ell^k} with a fixed irreducible modulus.

    Instances are interned per ``(ell, k, modulus)``; use :meth:`get` or the
    constructor interchangeably.
    """

    __slots__ = ("ell", "k", "modulus", "q", "_add", "_mul", "_neg", "_inv", "_pw")

    def __new__(cls, ell: int, k: int = 1, modulus: tuple[int, ...] | None = None):
        if modulus is None:
            modulus = (0, 1) if k == 1 else first_irreducible(ell, k)
        return _intern(ell, k, tuple(int(c) % ell for c in modulus))

    @classmethod
    def get(cls, ell: int, k: int = 1, modulus: tuple[int, ...] | None = None) -> FieldSpec:
        return cls(ell, k, modulus)

    def __getnewargs__(self):
        return (self.ell, self.k, self.modulus)

    def __getstate__(self):
        return None

    def __setstate__(self, state):
        pass

    def __repr__(self):
        return f"FieldSpec({format_field(self)})"

    # -- code-level arithmetic -------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self._add is not None:
            return self._add[a][b]
        if self.k == 1:
            return (a + b) % self.ell
        return self._from_vec([x + y for x, y in zip(self._vec(a), self._vec(b))])

    def neg(self, a: int) -> int:
        return self._neg[a] if self._neg is not None else self._from_vec([-x for x in self._vec(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self._mul is not None:
            return self._mul[a][b]
        return self._mul_slow(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero(f"inverse of zero in {format_field(self)}")
        if self._inv is not None:
            return self._inv[a]
        return self.pow(a, self.q - 2)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def from_int(self, n: int) -> int:
        """Image of the integer n (prime-field element)."""
        return n % self.ell

    def elem(self, value) -> FqElem:
        if isinstance(value, FqElem):
            return value
        if isinstance(value, int):
            return FqElem(self, value % self.ell)
        return FqElem(self, self._from_vec(list(value)))

    def elements(self):
        return [FqElem(self, c) for c in range(self.q)]

    # -- internals --------------------------------------------------------------
    def _vec(self, a: int) -> list[int]:
        out = []
        for _ in range(self.k):
            a, r = divmod(a, self.ell)
            out.append(r)
        return out

    def _from_vec(self, v: list[int]) -> int:
        if len(v) > self.k:
            v = _poly_mod(v, self.modulus, self.ell)
        code = 0
        for c in reversed(v):
            code = code * self.ell + c % self.ell
        return code

    def _mul_slow(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.ell
        va, vb = self._vec(a), self._vec(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(va):
            if x:
                for j, y in enumerate(vb):
                    prod[i + j] += x * y
        return self._from_vec(_poly_mod(prod, self.modulus, self.ell))


@functools.lru_cache(maxsize=None)
def _intern(ell: int, k: int, modulus: tuple[int, ...]) -> FieldSpec:
    if not is_prime(ell):
        raise ValueError(f"ell={ell} is not prime")
    if k < 1 or len(modulus) != k + 1:
        raise ValueError(f"modulus {modulus} does not have degree k={k}")
    if k > 1 and not is_irreducible(modulus, ell):
        raise ValueError(f"modulus {modulus} is reducible over F_{ell}")
    self = object.__new__(FieldSpec)
    self.ell, self.k, self.modulus, self.q = ell, k, modulus, ell ** k
    self._add = self._mul = self._neg = self._inv = self._pw = None
    q = self.q
    if q <= _TABLE_LIMIT:
        vecs = [self._vec(a) for a in range(q)]
        self._add = [[self._from_vec([x + y for x, y in zip(vecs[a], vecs[b])]) for b in range(q)]
                     for a in range(q)]
        self._neg = [self._from_vec([-x for x in vecs[a]]) for a in range(q)]
        self._mul = [[self._mul_slow(a, b) for b in range(q)] for a in range(q)]
        inv = [0] * q
        for a in range(1, q):
            row = self._mul[a]
            inv[a] = row.index(1)
        self._inv = inv
    return self


@dataclass(frozen=True, eq=True)
class FqElem:
    """An element of F_q; ``coeffs`` gives its coordinates in the modulus basis."""

    field: FieldSpec
    code: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple(self.field._vec(self.code))

    def __bool__(self):
        return self.code != 0

    def _other(self, other) -> int:
        if isinstance(other, FqElem):
            if other.field is not self.field:
                raise ValueError("elements of different fields")
            return other.code
        if isinstance(other, int):
            return other % self.field.ell
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        return FqElem(self.field, self.field.add(self.code, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return FqElem(self.field, self.field.sub(self.code, b))

    def __rsub__(self, other):
        b = self._other(other)
        return FqElem(self.field, self.field.sub(b, self.code))

    def __neg__(self):
        return FqElem(self.field, self.field.neg(self.code))

    def __mul__(self, other):
        b = self._other(other)
        return FqElem(self.field, self.field.mul(self.code, b))

    __rmul__ = __mul__

    def inverse(self) -> FqElem:
        return FqElem(self.field, self.field.inv(self.code))

    def __truediv__(self, other):
        b = self._other(other)
        return FqElem(self.field, self.field.mul(self.code, self.field.inv(b)))

    def __pow__(self, e: int):
        return FqElem(self.field, self.field.pow(self.code, e))

    def __repr__(self):
        return f"FqElem({format_fq(self.field, self.code)})"


def fq_arith(a: FqElem, b: FqElem | int | None, op: str) -> FqElem:
    """Dispatch ``op`` in {add, sub, mul, inv, pow}; for pow, b is the exponent."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown op {op!r}")


# -- text formats ---------------------------------------------------------------

def format_fq(field: FieldSpec, code: int, var: str = "u") -> str:
    if field.k == 1:
        return str(code)
    parts = []
    for i, c in reversed(list(enumerate(field._vec(code)))):
        if not c:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if not mono:
            parts.append(str(c))
        else:
            parts.append(mono if c == 1 else f"{c}*{mono}")
    if not parts:
        return "0"
    return parts[0] if len(parts) == 1 else "(" + " + ".join(parts) + ")"


def format_field(field: FieldSpec) -> str:
    if field.k == 1:
        return f"F({field.ell})"
    terms = []
    for i in range(field.k, -1, -1):
        c = field.modulus[i]
        if not c:
            continue
        mono = "" if i == 0 else ("u" if i == 1 else f"u^{i}")
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}*{mono}")
    return f"F({field.ell},{field.k};{'+'.join(terms)})"


_FIELD_RE = re.compile(r"^\s*F\(\s*(\d+)\s*(?:,\s*(\d+)\s*(?:;\s*([^)]*))?)?\)\s*$")


def parse_univariate(text: str, p: int, var: str = "u") -> list[int]:
    """Parse a sum of terms like ``2*u^3 + u + 1`` into low-to-high coefficients."""
    s = text.replace(" ", "")
    if not s:
        raise ParseError("empty polynomial")
    if s[0] not in "+-":
        s = "+" + s
    coeffs: dict[int, int] = {}
    for sign, body in re.findall(r"([+-])([^+-]+)", s):
        m = re.fullmatch(rf"(?:(\d+)\*?)?(?:({var})(?:\^(\d+))?)?", body)
        if m is None or (m.group(1) is None and m.group(2) is None):
            raise ParseError(f"bad term {body!r} in {text!r}")
        c = int(m.group(1)) if m.group(1) else 1
        e = 0 if m.group(2) is None else int(m.group(3) or 1)
        coeffs[e] = coeffs.get(e, 0) + (c if sign == "+" else -c)
    deg = max(coeffs)
    return [coeffs.get(i, 0) % p for i in range(deg + 1)]


def parse_field_spec(text: str) -> FieldSpec:
    """Parse ``F(3)``, ``F(3,2)`` or ``F(3,2;u^2+1)``."""
    m = _FIELD_RE.match(text)
    if m is None:
        raise ParseError(f"bad field spec {text!r}")
    ell = int(m.group(1))
    k = int(m.group(2) or 1)
    modulus = None
    if m.group(3):
        modulus = tuple(parse_univariate(m.group(3), ell))
    try:
        return FieldSpec(ell, k, modulus)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
