"""Exception types raised across the package."""


class QLinkError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QLinkError, ValueError):
    """A model or sweep configuration cannot be built."""


class DomainError(QLinkError, ValueError):
    """An argument lies outside the domain of a formula."""


class AmbiguityError(QLinkError):
    """An eigenvector selection rule could not pick a unique candidate."""


class IntegratorError(QLinkError, RuntimeError):
    """The adaptive integrator failed (step-size underflow or step budget)."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ProbeInvalidError(QLinkError):
    """A monochromatic probe leaked out of its initial mode."""
