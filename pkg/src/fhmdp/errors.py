"""Exception hierarchy shared across the package."""


class FhmdpError(Exception):
    """Base class for all errors raised by this package."""


class ModelFormatError(FhmdpError, ValueError):
    """Raised when a serialized model or fixture file cannot be parsed."""


class ModelValidationError(FhmdpError, ValueError):
    """Raised when parsed model data violates a stochastic-model invariant."""


class InstanceTooLargeError(FhmdpError):
    """Raised when exhaustive enumeration would exceed the configured policy cap."""
