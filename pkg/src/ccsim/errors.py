"""Exception types shared across the package."""


class DataError(Exception):
    """Raised for malformed or inconsistent input data (fatal parse errors,
    days that cannot be compiled, files that do not match their schema)."""


class ConfigError(Exception):
    """Raised for invalid configuration: unknown model names, missing
    distribution inputs required by a model configuration, bad agent maps."""
