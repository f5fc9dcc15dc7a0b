"""Exception types shared across the library.

Numerical failures (NotPSDError, SingularMatrixError, TruncationFailure) map to
CLI exit code 3; ConfigError maps to exit code 2.
"""


class PilotsecError(Exception):
    """Base class for all library errors."""


class NotPSDError(PilotsecError):
    """A matrix required to be positive semidefinite is not."""


class SingularMatrixError(PilotsecError):
    """A linear system or block matrix is singular at working precision."""


class DimensionError(PilotsecError):
    """Inconsistent or unsupported array dimensions."""


class TooFewObservationsError(PilotsecError):
    """A distance-based identifier needs at least 3 observations."""


class TruncationFailure(PilotsecError):
    """The series remainder bound cannot reach the requested tolerance."""


class ConfigError(PilotsecError):
    """Invalid experiment configuration (bad value or unknown key)."""
