"""Exception types shared across the package."""


class RelsubError(Exception):
    """Base class for all package errors."""


class DomainError(RelsubError, ValueError):
    """A point lies outside the set or domain an operation requires."""


class EvaluationError(RelsubError, ArithmeticError):
    """A piece expression could not be evaluated (pole, NaN)."""


class DSLSyntaxError(RelsubError, ValueError):
    """Malformed expression, guard or interval text.

    ``column`` is the 1-based offset inside the offending text when known.
    """

    def __init__(self, message, text=None, column=None):
        self.text = text
        self.column = column
        where = ""
        if text is not None:
            where = f" in {text!r}"
            if column is not None:
                where += f" at column {column}"
        super().__init__(message + where)


class ValidationError(RelsubError, ValueError):
    """A piecewise function failed validation (overlapping guards, poles)."""


class SplitRequired(RelsubError):
    """An ``abs`` argument changes sign inside a piece; split at ``point``."""

    def __init__(self, point, piece=None):
        self.point = float(point)
        self.piece = piece
        super().__init__(f"abs argument changes sign at {self.point!r}"
                         + (f" inside piece {piece}" if piece is not None else ""))


class IsolatedEpigraphPoint(RelsubError):
    """No epigraph samples other than the vertical ray at the smallest radii."""


class EstimationFailure(RelsubError):
    """The sampling oracle produced too many unknown verdicts."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class InconclusiveLimit(RelsubError):
    """Endpoint sequences of an outer limit did not settle.

    ``raw`` keeps the (index, set) pairs that were examined.
    """

    def __init__(self, message, raw):
        self.raw = raw
        super().__init__(message)


class ProblemError(RelsubError, ValueError):
    """Invalid problem file. ``field`` is a dotted path, ``line`` 1-based."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field:
            parts.append(field)
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class SearchFailure(RelsubError):
    """A certificate search ended without a witness below tolerance."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
