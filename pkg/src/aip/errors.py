"""Exception hierarchy shared across the package."""


class AipError(Exception):
    """Base class for all domain errors raised by this package."""


class SceneParseError(AipError):
    """Scene or sidecar file could not be parsed (message carries line/column)."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", col {column}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column


class SceneValidationError(AipError):
    """Parsed scene violates a structural invariant."""


class TrajectoryError(AipError):
    """Trajectory generation, validation, or file I/O failure."""


class ManifestError(AipError):
    """Manifest parse or digest-verification failure."""


class MatrixError(AipError):
    """Scenario matrix expansion or config-file failure."""


class EvalError(AipError):
    """Metric evaluation precondition failure (empty mask, bad labels, ...)."""


class ProtocolError(AipError):
    """Capture-service protocol violation."""
