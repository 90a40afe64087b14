"""
Exception hierarchy for parqlab.

Every error raised on purpose by the library derives from ParqLabError so
callers (and the CLI) can catch the whole family at once.
"""


class ParqLabError(Exception):
    """Base class for all parqlab errors."""


class InvalidArgumentError(ParqLabError, ValueError):
    """An argument violates an operation precondition."""


class DomainError(ParqLabError, ValueError):
    """A value lies outside the domain where an operation is defined."""


class ShapeMismatchError(ParqLabError, ValueError):
    """Vectors handed to an optimizer step have incompatible shapes."""


class ConfigError(ParqLabError):
    """An experiment configuration cannot be parsed or is inconsistent."""


class OracleUnavailableError(ParqLabError):
    """No optimum oracle exists for the requested problem."""


class DivergenceError(ParqLabError):
    """A run produced a non-finite loss."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step
