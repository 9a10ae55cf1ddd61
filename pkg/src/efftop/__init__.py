"""Exact non-Archimedean toolkit over F_q((t)): balls, measures, certified Newton
lifting, smooth functions and effective surjectivity checks."""

__version__ = "0.1.0"
