"""Exceptions raised across branchwm."""


class BranchWMError(Exception):
    """Base class for all branchwm errors."""

    pass


class ConfigurationError(BranchWMError):
    """Raised for invalid parameters, key files or configuration values."""

    pass


class TokenizationError(BranchWMError):
    """Raised when text or ids do not belong to the vocabulary."""

    pass


class MalformedTriggerError(BranchWMError):
    """Raised when a digit tail cannot be decoded into a tag."""

    pass


class CapacityError(BranchWMError):
    """Raised when an image cannot carry a full tag."""

    pass


class BackendError(BranchWMError):
    """Raised when the generation backend is unreachable or replies badly."""

    pass
