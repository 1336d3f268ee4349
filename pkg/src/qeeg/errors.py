"""Exception types shared across the package."""


class QeegError(Exception):
    """Base class for all package errors."""


class ValidationError(QeegError):
    """Input data violates a structural or value constraint."""


class SplitError(ValidationError):
    """Dataset cannot be partitioned under the requested split convention."""


class ShapeError(QeegError):
    """Operands have incompatible dimensions."""


class ParameterError(QeegError):
    """A parameter is outside its admissible range."""


class DegenerateDataError(QeegError):
    """Data is degenerate for the requested computation (zero power,
    zero spectrum, single-class training set, ...)."""


class ConfigError(QeegError):
    """Command configuration is inconsistent."""
