"""Exception hierarchy shared by all modules."""


class LrodError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LrodError, ValueError):
    """An argument lies outside the domain of an operation."""


class SchemaError(LrodError, ValueError):
    """A required input column is missing."""


class DataError(LrodError, ValueError):
    """Input data violates a structural invariant (contiguity, signs, ...)."""


class ConfigError(LrodError, ValueError):
    """A configuration key is unknown, malformed or out of range."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class DegenerateSampleError(DomainError):
    """A sample carries no information for the requested fit."""


class ConvergenceError(LrodError, ArithmeticError):
    """An iterative solver failed to converge."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class NothingToForecastError(LrodError):
    """The account is already observed to its contractual term."""


class PreconditionError(LrodError, ValueError):
    """An input is not in the state an operation requires."""


class ScenarioError(LrodError):
    """A scenario-matrix cell could not be computed."""
