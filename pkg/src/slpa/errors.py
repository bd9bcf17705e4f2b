"""Exception hierarchy shared by the loaders, the pipeline and the CLI."""


class SLPAError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SLPAError, ValueError):
    """A text input could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResolutionError(SLPAError, KeyError):
    """A node name could not be resolved against a graph."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class StructuralError(SLPAError, ValueError):
    """The graph does not have the structure an operation requires."""


class ParameterError(SLPAError, ValueError):
    """An argument is outside its documented domain."""


class ConfigurationError(ParameterError):
    """A generator configuration is infeasible."""
