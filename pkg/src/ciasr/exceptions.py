"""Exception types shared across the package."""


class CiasrError(Exception):
    """Base class for package-specific errors."""


class DomainError(CiasrError, ValueError):
    """An argument is outside the documented domain of an operation."""


class ConvergenceError(CiasrError, RuntimeError):
    """A numerical procedure failed to converge.

    Carries the partial result and the amount of work done so the caller
    can decide whether the partial value is still usable.
    """

    def __init__(self, message, partial=None, work=None):
        super().__init__(message)
        self.partial = partial
        self.work = work


class ScanFailureError(CiasrError, RuntimeError):
    """The moment scan exhausted its iteration budget without a sign change."""

    def __init__(self, message, last_moment=None, iterations=None):
        super().__init__(message)
        self.last_moment = last_moment
        self.iterations = iterations


class MomentDomainError(CiasrError, ValueError):
    """An empirical Bessel moment left the log-domain needed by the closed forms."""

    def __init__(self, message, a=None):
        super().__init__(message)
        self.a = a


class RasterFormatError(CiasrError, ValueError):
    """A raster file is malformed or inconsistent with its declared layout."""
