"""Exception types raised by swarmsearch."""


class SwarmSearchError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(SwarmSearchError, ValueError):
    """A parameter lies outside its mathematical domain."""


class DegenerateGeometryError(SwarmSearchError, ValueError):
    """Two points coincide where a direction is required."""


class SetupError(SwarmSearchError, RuntimeError):
    """A scenario or experiment cannot be constructed."""


class PheromoneError(SwarmSearchError, RuntimeError):
    """A target was marked twice."""


class StatisticsInputError(SwarmSearchError, ValueError):
    """Samples handed to a statistical test are unusable."""
