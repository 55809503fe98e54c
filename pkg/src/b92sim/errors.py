"""Exception types raised by the simulator."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A session or experiment configuration is invalid.

    ``field`` names the offending configuration key when it is known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class InfeasibleAttackError(ValueError):
    """Eve cannot reproduce the honest detection rate at this placement."""


class UnsupportedConfigurationError(ValueError):
    """No analytic result is available for this configuration."""
