"""Exception types shared across the package."""

__all__ = ["DomainTooSmallError", "BlowUpError", "NoContractionError", "ConfigError"]


class DomainTooSmallError(ValueError):
    """The box cannot accommodate the requested weight plateau."""


class BlowUpError(RuntimeError):
    """A solve produced non-finite or absurdly large samples."""


class NoContractionError(RuntimeError):
    """The fixed-point iteration failed to converge; the time window is too
    large for the given data."""


class ConfigError(ValueError):
    """A scenario config file failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
