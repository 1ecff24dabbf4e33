"""Exception types raised across the package."""


class CatsketchError(Exception):
    """Base class for every error raised by catsketch."""


class InputError(CatsketchError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(CatsketchError):
    """A file or stream does not follow its documented grammar."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ComputeError(CatsketchError):
    """A computation failed on otherwise valid input."""
