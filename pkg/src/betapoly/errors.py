"""Exception hierarchy.

Every error carries the module and operation that raised it so the CLI can
name the failure site.
"""

from __future__ import annotations


class BetaPolyError(Exception):
    """Base class for all package errors."""

    def __init__(self, module: str, op: str, message: str):
        self.module = module
        self.op = op
        super().__init__(f"{module}.{op}: {message}")


class DomainError(BetaPolyError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(BetaPolyError, ArithmeticError):
    """An iterative scheme failed to reach its tolerance."""

    def __init__(self, module: str, op: str, message: str, last_values=()):
        self.last_values = tuple(last_values)
        super().__init__(module, op, message)


class BudgetError(BetaPolyError):
    """The number of summation terms exceeds the configured cap."""


class DegeneracyError(BetaPolyError, ArithmeticError):
    """Points are not in general position within tolerance."""


class MonteCarloAbort(BetaPolyError):
    """Too many degenerate draws were rejected during simulation."""

    def __init__(self, module: str, op: str, message: str, rate: float):
        self.rate = rate
        super().__init__(module, op, message)
