"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes (configuration 1, data 2,
numerical 3), so new exception types should subclass one of the three
branches below rather than Exception directly.
"""


class OrthoFpcaError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(OrthoFpcaError):
    """Invalid option, hyperparameter, or model dimension requested."""


class DimensionError(ConfigurationError):
    """Array arguments whose shapes do not match the declared model."""


class DataError(OrthoFpcaError):
    """Input data that cannot be used: unparseable, missing, or ill-posed."""


class DomainError(DataError):
    """Evaluation point outside the interval a basis or curve is defined on."""


class NumericalError(OrthoFpcaError):
    """Numerical failure (factorization breakdown, divergence, overflow)."""


class DegenerateConstraintError(NumericalError):
    """Constraint system A_j became (near-)singular at some level.

    Carries the 1-based level index so callers can report which
    coefficient vector caused the degeneracy.
    """

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level
