"""
Domain Errors
Exception hierarchy shared by the numeric core, the runner and the front ends
"""

from typing import Any, Dict, Optional


class RCFinslerError(Exception):
    """Base class for every domain error raised by the toolkit"""

    name = "RCFinslerError"

    def __init__(self, message: str = "", details: Optional[Dict[str, Any]] = None):
        super().__init__(message or self.name)
        self.message = message or self.name
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Serializable form used in reports"""
        return {"success": False, "error": self.name, "message": self.message, **self.details}


class SingularMatrix(RCFinslerError):
    name = "SingularMatrix"


class DimensionMismatch(RCFinslerError):
    name = "DimensionMismatch"


class ExprSyntaxError(RCFinslerError):
    """Parse failure with 1-based position information"""

    name = "SyntaxError"

    def __init__(self, message: str, line: int, column: int, expected: str):
        super().__init__(
            f"{message} at line {line}, column {column} (expected {expected})",
            {"line": line, "column": column, "expected": expected},
        )
        self.line = line
        self.column = column
        self.expected = expected


class IndexOutOfRange(RCFinslerError):
    name = "IndexOutOfRange"


class DivisionNearZero(RCFinslerError):
    name = "DivisionNearZero"


class DegenerateAlpha(RCFinslerError):
    name = "DegenerateAlpha"


class ZeroSection(RCFinslerError):
    name = "ZeroSection"


class SingularBaseMetric(RCFinslerError):
    name = "SingularBaseMetric"


class PoleAtAlphaEqualsBeta(RCFinslerError):
    name = "PoleAtAlphaEqualsBeta"


class TooCloseToSingularLocus(RCFinslerError):
    name = "TooCloseToSingularLocus"


class SigmaUndefined(RCFinslerError):
    name = "SigmaUndefined"


class UnstableStencil(RCFinslerError):
    name = "UnstableStencil"


class UpdateSingular(RCFinslerError):
    name = "UpdateSingular"


class NotNonHermitian(RCFinslerError):
    name = "NotNonHermitian"


class StepSingular(RCFinslerError):
    """A rank-one step of the inversion pipeline hit its guard"""

    name = "StepSingular"

    def __init__(self, step: int, message: str = ""):
        super().__init__(message or f"Step {step} of the inversion is singular", {"step": step})
        self.step = step


class NoValidPoints(RCFinslerError):
    name = "NoValidPoints"


class ConfigError(RCFinslerError):
    name = "ConfigError"
