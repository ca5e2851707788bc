"""Exception types raised by the solvers."""

from __future__ import annotations


class PeaceGameError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PeaceGameError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateSupportError(PeaceGameError, ValueError):
    """A truncation or distribution would have an empty or single-point support."""


class ContractError(PeaceGameError, ValueError):
    """An operation was called without its documented precondition holding."""


class NumericFailure(PeaceGameError, RuntimeError):
    """An iterative solver did not converge.

    ``bracket`` carries the last interval known to contain the solution, when
    one exists.
    """

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class InvariantViolation(PeaceGameError, RuntimeError):
    """A quantity that is provably well-defined came out inconsistent."""
