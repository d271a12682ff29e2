"""Exception types shared across the package."""


class ScalarKindError(TypeError):
    """Exact-rational and float values were mixed in one operation."""


class TruncationError(ValueError):
    """A result needs wavenumbers beyond the declared truncation."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class ResonanceError(ArithmeticError):
    """A stable mode has a zero divisor in the homological equation."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
