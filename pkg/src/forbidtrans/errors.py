"""Exception hierarchy shared by all analysis modules."""


class ForbidTransError(Exception):
    """Base class for toolkit errors."""


class InvalidOperatorError(ForbidTransError, ValueError):
    """An operator violates a structural requirement (Hermiticity, shape, ...)."""


class DimensionMismatchError(ForbidTransError, ValueError):
    pass


class StructureError(ForbidTransError, RuntimeError):
    """A numerical structure the analysis relies on could not be established."""


class AmbiguousGroundStateError(StructureError):
    pass


class StructureNotFoundError(StructureError):
    pass


class TruncationUnconvergedError(ForbidTransError, RuntimeError):
    pass


class ConfigError(ForbidTransError, ValueError):
    """Invalid configuration document; the message names the offending key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
