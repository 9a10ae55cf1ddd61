"""Independent reference computations used to check the library.

Nothing here imports the arithmetic under test: series are plain dicts
{exponent: coefficient} over a prime field, or digit lists for F_q with
q = ell^k built from schoolbook polynomial arithmetic.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def gf_mul(a: int, b: int, ell: int, modulus: tuple[int, ...]) -> int:
    """Multiply packed codes in F_ell[u]/(modulus) by schoolbook polynomial arithmetic."""
    k = len(modulus) - 1
    va = [(a // ell ** i) % ell for i in range(k)]
    vb = [(b // ell ** i) % ell for i in range(k)]
    prod = [0] * (2 * k)
    for i, x in enumerate(va):
        for j, y in enumerate(vb):
            prod[i + j] += x * y
    for i in range(2 * k - 1, k - 1, -1):
        c = prod[i] % ell
        if c:
            for j in range(k + 1):
                prod[i - k + j] -= c * modulus[j]
    return sum((prod[i] % ell) * ell ** i for i in range(k))


def gf_add(a: int, b: int, ell: int, k: int) -> int:
    return sum((((a // ell ** i) + (b // ell ** i)) % ell) * ell ** i for i in range(k))


def series_mul(a: dict, b: dict, mul, add, n: int) -> dict:
    """Product of two exact Laurent polynomials (dicts), truncated below t^n."""
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            if e < n:
                out[e] = add(out.get(e, 0), mul(c1, c2))
    return {e: c for e, c in out.items() if c}


class GF:
    """F_{ell^k} on packed codes via schoolbook arithmetic; independent of the library tables."""

    def __init__(self, ell: int, modulus: tuple[int, ...]):
        self.ell, self.modulus, self.k = ell, tuple(modulus), len(modulus) - 1
        self.q = ell ** self.k

    def mul(self, a: int, b: int) -> int:
        return gf_mul(a, b, self.ell, self.modulus)

    def add(self, a: int, b: int) -> int:
        return gf_add(a, b, self.ell, self.k)


def square_digits(x: list[int], gf: GF, n: int) -> list[int]:
    """Digits of x^2 mod t^n for x given by its digits (index = exponent >= 0)."""
    out = [0] * n
    for i, a in enumerate(x[:n]):
        for j, b in enumerate(x[: n - i]):
            out[i + j] = gf.add(out[i + j], gf.mul(a, b))
    return out


def square_roots_tree(y_digits: list[int], gf: GF, prec: int, start: list[int]) -> list[list[int]]:
    """All x = start + ... mod t^prec with x^2 = y mod t^prec, lifted digit by digit.

    x^2 mod t^(j+1) only depends on x mod t^(j+1), so partial solutions are
    pruned level by level.
    """
    sols = [list(start)]
    if square_digits(start, gf, len(start)) != y_digits[: len(start)]:
        return []
    for j in range(len(start), prec):
        nxt = []
        for x in sols:
            for c in range(gf.q):
                cand = x + [c]
                if square_digits(cand, gf, j + 1) == y_digits[: j + 1]:
                    nxt.append(cand)
        sols = nxt
    return sols


def _sq_digits(x: list[int], ell: int, n: int) -> list[int]:
    return square_digits(x, GF(ell, (0, 1)), n)


def ball_volume_affine(q: int, d: int, m: int) -> Fraction:
    """Haar volume of (t^-m O)^d with O^d normalized to 1."""
    return Fraction(q) ** (m * d)


def brute_image(f, digits_range, n: int):
    """Set of f(x) over all digit vectors of length n with entries in digits_range."""
    return {f(x) for x in itertools.product(digits_range, repeat=n)}
