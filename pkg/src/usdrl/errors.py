"""Exception types shared across the package."""


class UsdrlError(Exception):
    """Base class for all package errors."""


class ConfigError(UsdrlError, ValueError):
    """Invalid configuration value or combination."""


class ShapeError(UsdrlError, ValueError):
    """Tensor shape incompatible with an operation's contract."""


class BatchSizeError(UsdrlError, ValueError):
    """Batch too small for an operation that needs batch statistics."""


class SkeletonParseError(UsdrlError, ValueError):
    """Malformed skeleton text file.

    Carries the 1-based line number where parsing failed.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SkeletonFormatError(UsdrlError, ValueError):
    """Structurally valid file that violates the expected skeleton layout."""


class TrainingDivergedError(UsdrlError, RuntimeError):
    """Non-finite loss encountered; carries diagnostics of the offending batch."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics
