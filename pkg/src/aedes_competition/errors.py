"""Exception hierarchy shared by the computational modules and the CLI."""

from __future__ import annotations


class ModelError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ModelError):
    """Malformed or incomplete scenario configuration."""


class NumericalError(ModelError):
    """A numerical procedure failed (bracketing, convergence, NaN, ...).

    ``diagnostics`` carries whatever the failing routine could report
    (offending matrix, residual history, last iterate).
    """

    def __init__(self, message: str, diagnostics: object = None):
        super().__init__(message)
        self.diagnostics = diagnostics


class DegenerateParametersError(NumericalError):
    pass


class NonConvergenceError(NumericalError):
    pass


class ConstructionFailedError(NumericalError):
    pass


class CriterionFailedError(ModelError):
    """The invasion hypothesis Gamma(F*) > 0 does not hold."""
