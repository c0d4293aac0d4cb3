"""Exception hierarchy shared by all modules."""


class EmpChoiceError(Exception):
    """Base class for every error raised by the package."""


class ParseError(EmpChoiceError):
    """Malformed protocol file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(EmpChoiceError):
    """Consequence dimension or direction metadata does not fit the data."""


class ValidationError(EmpChoiceError):
    """A domain object violates one of its invariants."""


class DomainError(EmpChoiceError, ValueError):
    """Argument outside the domain of an operation."""


class ResourceError(EmpChoiceError):
    """A guarded enumeration would exceed its configured limit."""


class UnsupportedClassError(EmpChoiceError):
    """The function class cannot be used with the requested operation."""


class CoverageError(EmpChoiceError):
    """An integration grid does not cover the observed values."""
