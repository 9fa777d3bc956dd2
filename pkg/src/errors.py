"""
Exception hierarchy for AtomLens
"""
from typing import Any, Dict, Optional


class AtomLensError(Exception):
    """Base error; carries the failing module and the offending parameters"""

    module: str = "atomlens"

    def __init__(self, message: str, *, module: Optional[str] = None,
                 context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        if module is not None:
            self.module = module
        self.context: Dict[str, Any] = dict(context or {})

    def describe(self) -> str:
        """One-line diagnostic with module and parameters"""
        details = ", ".join(f"{key}={value!r}" for key, value in self.context.items())
        text = f"[{self.module}] {self}"
        return f"{text} ({details})" if details else text


class DomainError(AtomLensError, ValueError):
    """Argument outside the domain of an operation"""


class PreconditionError(DomainError):
    """Physical validity guard violated (far field, paraxial expansion, ...)"""


class ConfigError(AtomLensError, ValueError):
    """Invalid run configuration or unparsable quantity"""

    module = "cli"


class ConvergenceError(AtomLensError, ArithmeticError):
    """Iterative scheme stopped before meeting its tolerance"""

    def __init__(self, message: str, *, estimate: Any = None,
                 error_bound: Optional[float] = None, **kwargs: Any):
        super().__init__(message, **kwargs)
        self.estimate = estimate
        self.error_bound = error_bound


class FitError(ConvergenceError):
    """Least-squares fit did not converge"""

    module = "spectra"
