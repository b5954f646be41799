"""Exception types shared across the package.

Every error carries a short, stable ``code`` (for example ``"grid-too-short"``)
so the CLI and tests can match on it without parsing messages.
"""

from __future__ import annotations


class AtomLoadError(Exception):
    code = "error"

    def __init__(self, message: str, *, code: str | None = None, module: str | None = None):
        if code is not None:
            self.code = code
        self.module = module
        super().__init__(f"[{self.code}] {message}")


class GridError(AtomLoadError, ValueError):
    code = "grid-too-short"


class IntegrationError(AtomLoadError, ArithmeticError):
    code = "integration-diverged"


class EfficiencyError(AtomLoadError, ValueError):
    code = "reference-energy-nonpositive"


class FitError(AtomLoadError, ValueError):
    code = "fit-error"


class FitDivergedError(FitError):
    """Raised when the fit does not converge; ``result`` holds the best iterate."""

    code = "fit-diverged"

    def __init__(self, message: str, result=None):
        super().__init__(message, module="charfit")
        self.result = result


class ConfigError(AtomLoadError, ValueError):
    code = "config"

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, module="cli")
        self.line = line
