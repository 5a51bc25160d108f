"""Exception types shared across the audit pipeline."""

from __future__ import annotations


class CmlaError(Exception):
    """Base class for every error the toolkit raises on purpose."""


class LoadError(CmlaError):
    """A CSV file could not be parsed into a table."""


class SchemaError(CmlaError):
    """Tables or models disagree on column names, kinds, or dimensions."""


class ConfigError(CmlaError):
    """A run configuration value is invalid."""


class DegenerateGeometryError(CmlaError):
    """Automatic eps selection collapsed to zero."""


class LineageError(CmlaError):
    """Artifacts built under different encoding models were mixed."""


class CurveError(CmlaError):
    """An emitted curve violates its monotonicity contract."""


class OrderingError(CmlaError):
    """A scenario's declared leakage ordering does not hold."""


class StageError(CmlaError):
    """Wraps a pipeline error with the name of the stage that raised it."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause
