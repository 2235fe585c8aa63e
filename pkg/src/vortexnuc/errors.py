"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates a documented precondition."""


class ResolutionError(DomainError):
    """A field configuration cannot be resolved on the requested grid."""


class StepSizeUnderflowError(RuntimeError):
    """Adaptive integration drove the step size below the representable
    minimum, typically because a singularity was reached faster than the
    tolerance permits."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching the
    residual target."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class HypothesisError(DomainError):
    """A parameter family violates the hypotheses required for regime
    classification."""


class HorizonError(RuntimeError):
    """A simulated evolution exceeded its time horizon without reaching the
    terminating event."""
