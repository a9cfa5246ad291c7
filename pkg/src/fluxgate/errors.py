"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical routine failed or exceeded its accuracy contract."""


class NoCrossingError(RuntimeError):
    """No avoided level crossing found inside the search window."""


class PhaseUndefinedError(ValueError):
    """A matrix-element phase is undefined because its magnitude vanishes."""


class ConfigError(ValueError):
    """A run configuration file violates the schema."""
