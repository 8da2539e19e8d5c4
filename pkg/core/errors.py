"""
Exception hierarchy for sphere-moments.

The CLI maps these onto exit codes: configuration-type failures exit with 2,
numerical invariant violations with 3.
"""

from typing import List, Optional


class SphereMomentsError(Exception):
    """Base class for all library errors."""


class DomainError(SphereMomentsError, ValueError):
    """An argument lies outside the domain of the operation (e.g. a point on the interface)."""


class UsageError(SphereMomentsError, ValueError):
    """An operation was called with inconsistent arguments."""


class UnsupportedModelError(SphereMomentsError):
    """The perturbation model cannot be handled by the requested assembly."""


class ConfigError(SphereMomentsError):
    """Invalid run configuration. `fields` lists the offending keys."""

    def __init__(self, message: str, fields: Optional[List[str]] = None):
        self.fields = list(fields or [])
        if self.fields:
            message = f"{message}: {', '.join(self.fields)}"
        super().__init__(message)


class InvariantViolation(SphereMomentsError):
    """A numerical invariant failed to hold within its tolerance."""
