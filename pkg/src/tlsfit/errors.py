"""Exception types raised across the package."""


class TLSFitError(Exception):
    """Base class for all package errors."""


class DomainError(TLSFitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class FieldMapError(TLSFitError, ValueError):
    """A field map failed to parse or violates an invariant."""


class DatasetError(TLSFitError, ValueError):
    """A dataset failed to parse or is unusable for fitting."""


class DatasetTooSmallError(DatasetError):
    pass


class InsufficientPlateauError(DatasetError):
    pass


class QuadratureError(TLSFitError, RuntimeError):
    """Distribution average did not converge under node doubling."""


class FitConvergenceError(TLSFitError, RuntimeError):
    """Optimizer starts failed to agree on a minimum.

    ``outcomes`` holds one ``(chi2, params)`` pair per start.
    """

    def __init__(self, message, outcomes=()):
        super().__init__(message)
        self.outcomes = list(outcomes)


class UnboundedProfileError(TLSFitError, RuntimeError):
    """The chi2/DoF + 1 level was not crossed inside the scan range."""


class MixedDatasetError(TLSFitError, ValueError):
    pass
