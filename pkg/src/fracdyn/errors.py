"""Exception types shared across the package.

The CLI maps these onto process exit codes (see ``fracdyn.cli``):
config/validation problems -> 2, accuracy/instability -> 3,
non-convergence -> 4.
"""


class FracdynError(Exception):
    """Base class for package errors."""


class DomainError(FracdynError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(FracdynError, ValueError):
    """A structured object (state, generator, config) failed validation."""


class AccuracyError(FracdynError, RuntimeError):
    """A numerical routine could not meet its accuracy contract.

    ``achieved`` carries the best error bound the routine could certify,
    so callers can decide whether the result is still usable.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class NumericalInstabilityError(FracdynError, RuntimeError):
    """A propagation step produced a state violating its invariants."""


class NonConvergenceError(FracdynError, RuntimeError):
    """An iterative procedure (fit, bracket search) failed to converge."""
