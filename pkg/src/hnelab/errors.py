class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigError(ValueError):
    """A simulation or CLI configuration value is invalid.

    ``key`` names the offending configuration key when known.
    """

    def __init__(self, message, key=None):
        if key is not None and key not in message:
            message = f"{key}: {message}"
        super().__init__(message)
        self.key = key
