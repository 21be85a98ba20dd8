"""Exception hierarchy shared by every module."""

from __future__ import annotations


class HoconvexError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(HoconvexError, ValueError):
    """Bad arguments: wrong lengths, non-positive steps, too few points."""


class DomainError(HoconvexError, ValueError):
    """A required evaluation point is outside the available domain."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class ModeError(HoconvexError, TypeError):
    """Exact and floating scalars were mixed in one computation."""


class ConsistencyError(HoconvexError, ValueError):
    """Input data contradicts a stated bound (e.g. a Lipschitz modulus)."""

    def __init__(self, message: str, pair=None):
        super().__init__(message)
        self.pair = pair


class IngestionError(HoconvexError, ValueError):
    """A CSV file could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DecompositionRejected(HoconvexError):
    """Input failed the Wright-convexity pre-check; carries the report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
