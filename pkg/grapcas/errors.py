"""
Exception hierarchy for grapcas.

Every error knows the exit code the command-line front end reports for it and
renders itself as a JSON-ready dictionary.
"""

from typing import Any, Dict, List, Optional

import numpy as np

__all__ = [
    "GrapcasError",
    "ConfigurationError",
    "ValidationError",
    "OpticalDataError",
    "DomainError",
    "NumericalError",
    "QuadratureError",
    "ConvergenceError",
]


class GrapcasError(Exception):
    """Root of all grapcas errors."""

    exit_code = 1

    def details(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        body = {"error": type(self).__name__, "message": str(self)}
        body.update(self.details())
        return body


class ConfigurationError(GrapcasError, ValueError):
    """Invalid configuration, scenario or command-line input."""

    exit_code = 2


class ValidationError(ConfigurationError):
    """A record failed validation; `violations` names every offending field."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))

    def details(self) -> Dict[str, Any]:
        return {"violations": self.violations}


class OpticalDataError(ConfigurationError):
    """An optical data file could not be parsed or is unphysical."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)

    def details(self) -> Dict[str, Any]:
        return {"row": self.row}


class DomainError(GrapcasError, ValueError):
    """Argument outside the domain of an operation."""

    exit_code = 3


class NumericalError(GrapcasError, ArithmeticError):
    """A numerical procedure failed."""

    exit_code = 3


class QuadratureError(NumericalError):
    """Adaptive integration ran out of budget before reaching tolerance."""

    def __init__(self, message: str, value: Any, error_estimate: float):
        self.value = value
        self.error_estimate = float(error_estimate)
        super().__init__(
            f"{message} (value={value!r}, error estimate={error_estimate:.3e})"
        )

    def details(self) -> Dict[str, Any]:
        values = [complex(v) for v in np.ravel(self.value)]
        rendered = [[v.real, v.imag] if v.imag else v.real for v in values]
        return {
            "value": rendered[0] if len(rendered) == 1 else rendered,
            "error_estimate": self.error_estimate,
        }


class ConvergenceError(NumericalError):
    """A series showed no decay within its term budget."""

    def __init__(self, message: str, value: float, terms_used: int):
        self.value = value
        self.terms_used = int(terms_used)
        super().__init__(f"{message} (partial sum={value!r}, terms={terms_used})")

    def details(self) -> Dict[str, Any]:
        return {"value": float(self.value), "terms_used": self.terms_used}
