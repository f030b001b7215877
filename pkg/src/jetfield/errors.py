"""Exception types shared across the package."""


class JetfieldError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(JetfieldError):
    """Syntax or validation error in an expression or scenario document.

    Carries a 1-based (line, column) position when one is known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"{message} (line {line}, col {column})"
        elif column is not None:
            message = f"{message} (col {column})"
        super().__init__(message)


class DomainError(JetfieldError):
    """Evaluation left the domain of an elementary function.

    Raised for log of a non-positive value, sqrt of a negative value,
    division by zero, or a fractional power of a non-positive base at the
    evaluation point.  Evaluators attach the offending subexpression.
    """

    def __init__(self, reason, subexpression=None):
        self.reason = reason
        self.subexpression = subexpression
        if subexpression is not None:
            super().__init__(f"{reason} in '{subexpression}'")
        else:
            super().__init__(reason)


class OrderError(JetfieldError):
    """A derivative was requested beyond the truncation order of a jet."""


class SingularMatrixError(JetfieldError):
    """A metric (or other symmetric matrix) is singular or too ill-conditioned."""

    def __init__(self, message, family=None, point=None):
        self.family = family
        self.point = point
        parts = [message]
        if family:
            parts.append(f"family: {family}")
        if point is not None:
            parts.append(f"point: {point}")
        super().__init__("; ".join(parts))


class ScenarioError(JetfieldError):
    """Invalid scenario document or inconsistent scenario data."""
