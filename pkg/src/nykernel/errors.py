"""Exception types shared across the package."""


class NyKernelError(Exception):
    """Base class for all errors raised by nykernel."""


class ValidationError(NyKernelError, ValueError):
    """Input violates a precondition (shape, symmetry, labels, ...)."""


class NotPSDError(ValidationError):
    """A kernel that must be positive semi-definite is not."""


class NumericalError(NyKernelError, ArithmeticError):
    """A computation broke down numerically (collapse, degenerate score)."""
