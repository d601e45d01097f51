"""Exception hierarchy shared by every module.

The harness maps these onto process exit codes: configuration problems
exit with 2, data problems with 3 and invariant violations with 4.
"""

from __future__ import annotations


class ArtifactError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigurationError(ArtifactError, ValueError):
    """Invalid hyperparameters, unknown config keys, bad CLI combinations."""

    exit_code = 2


class DataError(ArtifactError):
    """Input data that cannot be parsed or does not validate."""

    exit_code = 3


class ParseError(DataError, ValueError):
    """A file line that does not follow its declared format."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class ValidationError(DataError, ValueError):
    """Structurally valid input that breaks a semantic invariant."""


class GenerationError(DataError):
    """A synthetic corpus profile that cannot be realized."""


class IncompatibleModelError(DataError):
    """A model file written with an unsupported format version."""


class ModelIntegrityError(DataError):
    """A model file that is truncated, corrupted or fails its checksum."""


class InvariantViolation(ArtifactError, AssertionError):
    """An internal consistency check failed at run time."""

    exit_code = 4
