"""Shared exception types."""


class ConfigurationError(ValueError):
    """A scenario or link configuration is incomplete or inconsistent."""


class RegimeError(ValueError):
    """A formula was evaluated outside its queue-stability regime."""
