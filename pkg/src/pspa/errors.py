class PSPAError(Exception):
    """Base class for errors raised by this package."""


class DataError(PSPAError, ValueError):
    """Input data violates a structural requirement (shape, finiteness, size)."""


class ModeError(PSPAError, ValueError):
    """The estimator does not support the dataset's prediction mode."""


class SingularMatrixError(PSPAError, ArithmeticError):
    """A matrix that must be inverted is singular or too ill-conditioned."""


class ConfigError(PSPAError, ValueError):
    """A simulation or CLI configuration is infeasible or malformed."""
