"""Exception types shared across the package."""

from __future__ import annotations


class EffTopError(Exception):
    """Base class for library errors."""


class DivisionByZero(EffTopError, ZeroDivisionError):
    pass


class PrecisionLoss(EffTopError):
    """Raised when a result cannot be determined at the available precision.

    ``required`` carries an estimate of the absolute precision that would have
    been sufficient, when one is known.
    """

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class BudgetExceeded(EffTopError):
    def __init__(self, message: str, cardinality: int | None = None):
        super().__init__(message)
        self.cardinality = cardinality


class ShapeError(EffTopError, ValueError):
    pass


class PreconditionViolated(EffTopError):
    pass


class SingularJacobian(EffTopError):
    pass


class CellSplit(EffTopError):
    """A grid cell could not be resolved into a single outcome."""


class DensityNotUnit(EffTopError):
    pass


class ParseError(EffTopError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column
