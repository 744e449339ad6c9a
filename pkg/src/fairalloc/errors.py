"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ValidationError(ValueError):
    """Input data violates a structural invariant."""


class ParseError(ValueError):
    """A CSV or config file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownGroupError(KeyError):
    """A group identifier is not part of the population or policy."""


class CapabilityError(RuntimeError):
    """The request exceeds what the brute-force oracle can enumerate."""
