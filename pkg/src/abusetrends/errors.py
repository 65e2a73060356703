"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: config errors exit 2, ingest errors
exit 3, model errors exit 4.
"""

from __future__ import annotations


class AbuseTrendsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AbuseTrendsError):
    """Invalid or incomplete run configuration."""


class IngestError(AbuseTrendsError):
    """Input data could not be read or failed validation."""


class ParseError(IngestError):
    """A malformed row in an input file.

    ``line`` is the 1-based line number in the source file, when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(IngestError):
    """An input file is missing required columns."""


class GapError(IngestError):
    """A count series does not cover the requested window contiguously."""

    def __init__(self, message: str, missing_dates=()):
        super().__init__(message)
        self.missing_dates = tuple(missing_dates)


class SeriesValidationError(IngestError):
    """A series value violates an invariant (e.g. a negative count)."""


class AlignmentError(IngestError):
    """Two series that must share a date grid do not."""


class ModelError(AbuseTrendsError):
    """Model fitting failed or was asked to run on unusable data."""
