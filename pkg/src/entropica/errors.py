"""Exception types shared across the package."""


class EntropicaError(Exception):
    """Base class for all package-specific failures."""


class ConsistencyViolation(EntropicaError):
    """A freshly computed approximation contradicts a cached one.

    Signals a broken approximator: two approximations at precisions n and m
    must agree within 2^-n + 2^-m.
    """


class UnknownSpaceError(EntropicaError):
    pass


class UnknownMeasureError(EntropicaError):
    pass


class UnknownSystemError(EntropicaError):
    pass


class ZeroMassError(EntropicaError):
    """Total mass could not be certified above the configured threshold."""


class SearchExhaustedError(EntropicaError):
    """No admissible radius found within the grid budget."""


class EmptyCellError(EntropicaError):
    """A decoded cell provably contains no ideal point within search reach."""


class PrecisionUnreachableError(EntropicaError):
    """The system cannot certify the requested output accuracy."""


class UnsupportedError(EntropicaError):
    """Input exceeds a documented capability limit (e.g. atom count)."""


class ConfigError(EntropicaError):
    """Malformed experiment configuration."""


class BoundaryPointError(EntropicaError):
    """A point could not be encoded because some membership stayed Unknown."""
