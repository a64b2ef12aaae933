"""Exception hierarchy shared across the package."""


class SlipmeterError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SlipmeterError, ValueError):
    """A parameter or vehicle specification is out of its valid range."""


class ParseError(SlipmeterError):
    """An input file violates its format contract."""

    def __init__(self, message, path=None, line=None):
        self.path = str(path) if path is not None else None
        self.line = line
        prefix = ""
        if self.path is not None:
            prefix = self.path if line is None else f"{self.path}:{line}"
            prefix += ": "
        super().__init__(prefix + message)


class InsufficientDataError(SlipmeterError):
    """Not enough samples to carry out the requested computation."""


class AlignmentError(SlipmeterError):
    """Command and velocity streams share no usable time overlap."""


class ValidationError(SlipmeterError):
    """A catalog or deployment record fails its consistency checks."""


class TerrainNotFoundError(ValidationError):
    """Terrain name missing from the active terrain scale."""
