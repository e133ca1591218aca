"""Exception types shared across the package."""

import numpy as np


class ContractViolation(ValueError):
    """An input broke a documented precondition (shape, symmetry, sign...)."""


class DecompositionError(np.linalg.LinAlgError):
    """A factorization did not converge or the input was rank deficient."""

    def __init__(self, message, shape=None):
        if shape is not None:
            message = f"{message} (matrix shape {shape[0]}x{shape[1]})"
        super().__init__(message)
        self.shape = shape


class NumericFailure(ArithmeticError):
    """A computed quantity came out NaN or infinite."""


class ConfigError(ValueError):
    """Malformed experiment configuration."""
