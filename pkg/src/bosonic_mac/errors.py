"""Exception types shared across the package."""


class ResourceError(RuntimeError):
    """A configured size guard (pairs, Hilbert dimension, enumeration) was exceeded."""


class ConditioningError(ArithmeticError):
    """A Gram matrix failed the positive-semidefinite check."""


class TruncationError(ValueError):
    """A Fock-space truncation is too small for the requested state or operator.

    Attributes:
        required_dim: smallest dimension estimated to satisfy the policy, if known.
    """

    def __init__(self, message: str, required_dim: int | None = None):
        super().__init__(message)
        self.required_dim = required_dim
