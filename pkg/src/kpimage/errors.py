"""Exception types shared across the package.

The CLI maps these onto exit codes: usage/config problems exit 1, data
problems exit 2, internal invariant failures exit 3.
"""


class KpimageError(Exception):
    """Base class for all package errors."""


class ConfigError(KpimageError):
    """Invalid configuration or command-line usage."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ParseError(KpimageError):
    """Malformed input file (bad header, wrong cell count, bad magic)."""


class SchemaError(KpimageError):
    """Structurally valid input missing a required column or field."""


class DataError(KpimageError):
    """Well-formed data that cannot be used (empty, incompatible shapes)."""


class ShapeError(KpimageError):
    """Network layer shapes do not compose, or a batch does not fit."""


class EngineStateError(KpimageError):
    """Engine API called out of order (e.g. backward before forward)."""
