"""Exception types raised across the package."""


class SisterCitiesError(Exception):
    """Base class for all package errors."""


class IngestError(SisterCitiesError, ValueError):
    """Bad input tables or edge lists."""


class GraphError(SisterCitiesError, ValueError):
    """A graph operation was called on a graph it is undefined for."""


class UndefinedCorrelationError(SisterCitiesError, ArithmeticError):
    """Edge-end values have zero variance, so Pearson r does not exist."""


class RandomizationError(SisterCitiesError, RuntimeError):
    """Double-edge swapping ran out of its rejection budget."""

    def __init__(self, message: str, accepted: int):
        super().__init__(message)
        self.accepted = accepted


class CacheFormatError(SisterCitiesError, ValueError):
    """A geocode cache record could not be parsed."""


class ProviderUnavailableError(SisterCitiesError, ConnectionError):
    """The geocoding provider could not be reached.

    Distinct from a city that the provider reports as not locatable.
    """
