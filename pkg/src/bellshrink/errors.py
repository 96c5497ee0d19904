"""Exception hierarchy and CLI exit codes.

Every failure mode raised by this package derives from :class:`BellshrinkError`
so callers can catch one base class. The CLI maps the four externally
documented failure classes to distinct exit codes.
"""

from __future__ import annotations


class BellshrinkError(Exception):
    """Base class for all errors raised by bellshrink."""


class InvalidInputError(BellshrinkError):
    """Structurally invalid input (e.g. a non-symmetric matrix)."""


class DomainError(BellshrinkError):
    """Parameter outside its mathematical domain."""


class NumericFailureError(BellshrinkError):
    """A numerical routine failed to converge or overflowed."""


class NotPositiveDefiniteError(NumericFailureError):
    """Cholesky factorization hit a non-positive pivot."""


class CollinearityError(BellshrinkError):
    """Design matrix is rank deficient or the weighted cross-product is singular."""


class OverflowGuardError(BellshrinkError):
    """A configurable cap (e.g. the Bell-number table) was exceeded."""


class DegenerateInputError(BellshrinkError):
    """Input is degenerate for the requested operation (e.g. all-zero coefficients)."""


class SchemaError(BellshrinkError):
    """A file or config does not match its declared schema."""


class ValidationError(BellshrinkError):
    """Well-formed input with invalid content (e.g. fractional counts)."""


class CellFailureError(BellshrinkError):
    """Every repetition of a simulation cell failed."""


# CLI exit codes (0 = success, 1 = unexpected error).
EXIT_SCHEMA = 3
EXIT_VALIDATION = 4
EXIT_COLLINEARITY = 5
EXIT_NUMERIC = 6


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code documented in the README."""
    if isinstance(exc, SchemaError):
        return EXIT_SCHEMA
    if isinstance(exc, (ValidationError, DomainError, InvalidInputError, DegenerateInputError)):
        return EXIT_VALIDATION
    if isinstance(exc, CollinearityError):
        return EXIT_COLLINEARITY
    if isinstance(exc, (NumericFailureError, OverflowGuardError, CellFailureError)):
        return EXIT_NUMERIC
    return 1
