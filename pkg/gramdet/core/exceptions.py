"""Exceptions raised by gramdet.

Every exception carries the process exit code the command line front end
uses when it reaches the top level.
"""


class GramDetError(Exception):

    """Base class for all gramdet errors."""

    exit_code = 2


class ShapeError(GramDetError, ValueError):

    """Inputs disagree in length, dimension or label alphabet."""


class SingularMatrixError(GramDetError, ValueError):

    """A matrix is singular to working tolerance."""


class ParameterError(GramDetError, ValueError):

    """An argument is outside its valid range."""


class KernelDomainError(GramDetError, ValueError):

    """Observations are not in the domain of the chosen kernel."""

    exit_code = 3


class InputFileError(GramDetError):

    """A data file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = "{}:{}: {}".format(path, line, message)
        elif path is not None:
            message = "{}: {}".format(path, message)
        super().__init__(message)


class ConfigFileError(GramDetError):

    """A configuration value is unknown or invalid."""

    def __init__(self, message, field=None):
        self.field = field
        self._message = message
        super().__init__(self._format())

    def _format(self):
        if self.field:
            return "Config error in {}: {}".format(self.field, self._message)
        return "Config error: {}".format(self._message)

    def extend(self, message):
        """Prefix additional context to this error."""
        self._message = "{} >> {}".format(message, self._message)
        self.args = (self._format(), )
