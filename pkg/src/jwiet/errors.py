"""Exception types raised by the solvers."""


class JwietError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(JwietError, ValueError):
    pass


class NumericInputError(JwietError, ValueError):
    pass


class DegenerateCurveError(JwietError, ValueError):
    """Raised when a geodesic is requested between (nearly) collinear vectors."""


class DomainError(JwietError, ValueError):
    pass


class InfeasibleError(JwietError):
    """The requested harvested-energy target cannot be met.

    ``max_energy`` carries the largest energy the configuration can deliver.
    """

    def __init__(self, message, max_energy=None):
        super().__init__(message)
        self.max_energy = max_energy


class ResourceError(JwietError):
    pass


class ConfigError(JwietError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
