"""Exception types raised across the package."""


class KrausThermoError(Exception):
    """Base class for all package errors."""


class DimensionError(KrausThermoError, ValueError):
    """Operands have incompatible shapes."""


class NotHermitianError(KrausThermoError, ValueError):
    pass


class NotPositiveError(KrausThermoError, ValueError):
    """A matrix expected to be positive (semi)definite is not."""


class ConvergenceError(KrausThermoError, RuntimeError):
    """An iterative method stopped without meeting its tolerance.

    ``partial`` holds the last iterate so callers can still inspect it.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NotStochasticError(KrausThermoError, ValueError):
    pass


class SpectralError(KrausThermoError, RuntimeError):
    """Perron data could not be extracted (reducibility or numerical failure)."""


class NormalizationError(KrausThermoError, RuntimeError):
    pass


class TruncationError(KrausThermoError, RuntimeError):
    pass


class MeasureMismatchError(KrausThermoError, ValueError):
    pass


class SpecFormatError(KrausThermoError, ValueError):
    """A channel-spec document failed validation."""
