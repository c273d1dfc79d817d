"""Exception types shared across the package."""


class NslitError(Exception):
    """Base class for all package-specific errors."""


class ResolutionError(NslitError):
    """A grid is too coarse for the requested operation."""


class UnsupportedConfigurationError(NslitError):
    """The requested configuration is outside what an operation supports."""


class DomainError(NslitError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(NslitError):
    """A quadrature failed to converge; carries the achieved residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(NslitError):
    """A configuration file is invalid; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
