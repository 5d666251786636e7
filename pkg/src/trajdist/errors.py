"""Exception types raised across the package."""


class TrajdistError(Exception):
    """Base class for all package errors."""


class DimensionError(TrajdistError, ValueError):
    """Points or sequences with mismatched or invalid dimension."""


class ParamError(TrajdistError, ValueError):
    """A numeric parameter is outside its admissible range."""


class GenerationError(TrajdistError, RuntimeError):
    """A curve generator could not satisfy its constraints."""


class RangeError(TrajdistError, IndexError):
    """Range query or update outside the populated index range."""


class ParseError(TrajdistError, ValueError):
    """Malformed trajectory file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CoverageError(TrajdistError, AssertionError):
    """The rectangle cover missed a grid point it is required to contain."""
