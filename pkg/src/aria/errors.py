"""Exception hierarchy shared across the runtime."""


class AriaError(Exception):
    """Base class for all runtime errors."""


class ValidationError(AriaError):
    """Input violates a documented precondition or schema."""


class ConfigError(AriaError):
    """Configuration file or script file is unusable."""


class RetryableError(AriaError):
    """Transient upstream failure; the caller may retry."""


class ProviderUnavailableError(AriaError):
    """An external provider failed after all retries."""


class ProtocolError(AriaError):
    """An external provider returned a payload we cannot interpret."""


class AmbiguityError(AriaError):
    """Conflicting identity claims; no record was mutated."""


class UnknownSessionError(AriaError):
    """Referenced session does not exist."""


class TurnInFlightError(AriaError):
    """A turn is already executing for this session."""
