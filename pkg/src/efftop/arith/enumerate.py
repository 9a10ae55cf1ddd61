"""Deterministic enumeration of residues t^v_min * F_q[t] modulo t^prec."""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence

from ..errors import BudgetExceeded
from .field import FieldSpec
from .series import INF, LaurentSeries

DEFAULT_BUDGET = 10 ** 6


def check_budget(count: int, budget: int | None, what: str = "enumeration") -> None:
    limit = DEFAULT_BUDGET if budget is None else budget
    if count > limit:
        raise BudgetExceeded(f"{what} needs {count} points, budget is {limit}", count)


def digit_tuples(q: int, n: int, prefix: Sequence[int] = ()) -> Iterator[tuple[int, ...]]:
    """Digit vectors (low exponent first) in counting order, low digit fastest.

    ``prefix`` fixes the highest digits (highest exponent first), which lets a
    scan be partitioned and restarted.
    """
    free = n - len(prefix)
    if free < 0:
        raise ValueError("prefix longer than digit vector")
    tail = tuple(reversed(prefix))
    for high_first in itertools.product(range(q), repeat=free):
        yield tuple(reversed(high_first)) + tail


def ls_enumerate(field: FieldSpec, v_min: int, prec: int, budget: int | None = None,
                 prefix: Sequence[int] = (), exact: bool = False) -> Iterator[LaurentSeries]:
    """Stream the q**(prec - v_min) residues of t^v_min F_q[t] modulo t^prec.

    Order is lexicographic in coefficients from low to high exponent, with the
    lowest exponent varying fastest (q=2, v_min=0, prec=2 gives 0, 1, t, 1+t).
    With ``exact=True`` the representatives are emitted as exact Laurent
    polynomials instead of series known modulo t^prec.
    """
    if v_min >= prec:
        raise ValueError("v_min must be below prec")
    n = prec - v_min
    check_budget(field.q ** (n - len(prefix)), budget)
    p = INF if exact else prec
    for digits in digit_tuples(field.q, n, prefix):
        yield LaurentSeries.from_digits(field, v_min, digits, p)
