"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage/config problems exit 1, data
integrity problems exit 2, training failures exit 3.
"""


class RelexError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RelexError):
    """A configuration value is out of range or inconsistent."""


class ParseError(RelexError):
    """An input file line could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif path is not None:
            where += " "
        super().__init__(where + message)


class IntegrityError(RelexError):
    """Data violates a structural invariant (spans, ids, hashes)."""


class SchemaError(RelexError):
    """An annotation does not type-check against the schema."""


class TrainingError(RelexError):
    """A model could not be trained on the given data."""
