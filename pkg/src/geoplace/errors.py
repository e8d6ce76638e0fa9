"""Exception hierarchy.

Everything derived from :class:`InputError` is a problem with what the caller
supplied (the CLI exits with status 1); anything else is a runtime failure.
"""


class GeoplaceError(Exception):
    """Base class for all package errors."""


class InputError(GeoplaceError, ValueError):
    """Invalid, malformed or insufficient input."""


class ValidationError(InputError):
    """A value violates a domain constraint (coordinate range, parameter bounds)."""


class EmptyInputError(InputError):
    """An operation received an empty collection."""


class InsufficientDataError(InputError):
    """Not enough data to fit or select a model."""


class ParseError(InputError):
    """A data file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class InvalidRecordError(ParseError, ValidationError):
    """A parsed field violates a domain constraint (for example latitude 91)."""


class BudgetError(InputError):
    """A requested grid exceeds the cell budget."""


class FoldError(GeoplaceError):
    """A cross-validation fold cannot be trained."""
