"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """Raised for malformed inputs (dimension mismatch, out-of-range values)."""


class InvalidConfigError(ValueError):
    """Raised when a configuration is inconsistent or unsupported."""


class InvalidStateError(RuntimeError):
    """Raised when an operation is called on an object in the wrong state."""


class FactorizationError(ArithmeticError):
    """Raised when a covariance matrix cannot be Cholesky-factorized."""
