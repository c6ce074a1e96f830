"""Exception hierarchy shared by every module.

Validation errors carry enough structure for the CLI to emit a useful
JSON error report (exit code 65).  Budget exhaustion is an exception
only where an answer cannot be given at all; three-valued operations
report it through their status instead of raising.
"""

from __future__ import annotations

from typing import Any


class LocqError(Exception):
    """Base class.  ``payload`` is a JSON-serializable detail dict."""

    def __init__(self, message: str, **payload: Any):
        super().__init__(message)
        self.message = message
        self.payload = payload

    def report(self) -> dict:
        return {"error": type(self).__name__, "message": self.message, **self.payload}


class ValidationError(LocqError):
    """Malformed input data (CLI exit code 65)."""


class SimplicialIdentityViolation(ValidationError):
    pass


class DanglingFace(ValidationError):
    pass


class BadNormalForm(ValidationError):
    pass


class CapExceeded(ValidationError):
    pass


class EndpointMismatch(ValidationError):
    pass


class AssociativityViolation(ValidationError):
    pass


class TopologyAxiomViolation(ValidationError):
    pass


class CubicalIdentityViolation(ValidationError):
    pass


class DanglingBoundary(ValidationError):
    pass


class DimensionUnsupported(ValidationError):
    pass


class TargetNotNerve(ValidationError):
    pass


class NotAQuasicategory(LocqError):
    pass


class NotSectionwiseQuasicategory(LocqError):
    pass


class UndecidedWordProblem(LocqError):
    pass


class SearchBudgetExceeded(LocqError):
    """The search space was too large; never means the answer is negative."""


class OracleDisagreement(LocqError):
    """Two independent routes to the same answer disagreed: a bug trap."""
