"""Exception hierarchy shared across the toolkit."""


class GreencastError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(GreencastError):
    """Invalid or inconsistent configuration."""


class SchemaError(GreencastError):
    """Input data does not match the expected column schema."""


class DuplicateTimestampError(GreencastError):
    """Two rows share the same timestamp."""


class InsufficientDataError(GreencastError):
    """Not enough rows/points to perform the requested operation."""


class DegenerateFeatureError(GreencastError):
    """A feature is constant on the fitting partition and cannot be scaled."""


class DimensionError(GreencastError):
    """Vector/matrix dimensions do not match."""


class NumericInputError(GreencastError):
    """Non-finite or otherwise invalid numeric input."""


class TrainingDivergedError(GreencastError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")


class UndefinedMetricError(GreencastError):
    """A metric has no defined value (e.g. every point guarded out)."""


class NoViableConfigError(GreencastError):
    """Every grid-search trial failed."""


class IncompleteReportError(GreencastError):
    """A report is missing required model predictions or cells."""


class StageError(GreencastError):
    """Wraps an error from a pipeline stage with the stage name attached."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
