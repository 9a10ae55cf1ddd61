from .enumerate import DEFAULT_BUDGET, check_budget, digit_tuples, ls_enumerate
from .field import (FieldSpec, FqElem, format_field, format_fq, fq_arith, is_irreducible,
                    parse_field_spec)
from .series import INF, LaurentSeries, format_series, ls_arith, parse_series

__all__ = [
    "DEFAULT_BUDGET", "FieldSpec", "FqElem", "INF", "LaurentSeries", "check_budget",
    "digit_tuples", "format_field", "format_fq", "format_series", "fq_arith", "is_irreducible",
    "ls_arith", "ls_enumerate", "parse_field_spec", "parse_series",
]
