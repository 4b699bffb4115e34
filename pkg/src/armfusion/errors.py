"""Exception hierarchy shared by the armfusion modules."""


class ArmFusionError(Exception):
    """Base class for all errors raised by this package."""


class InvalidRotationError(ArmFusionError, ValueError):
    """A matrix or quaternion does not represent a proper rotation."""


class ConfigurationError(ArmFusionError, ValueError):
    """Inconsistent or out-of-range configuration values."""


class CalibrationError(ArmFusionError):
    """Base class for failures of the static calibration window."""


class InsufficientDataError(CalibrationError):
    """Calibration window shorter than the required duration."""


class NotStillError(CalibrationError):
    """Gyroscope activity in the calibration window exceeds the stillness gate."""

    def __init__(self, message, gyro_std=None):
        super().__init__(message)
        self.gyro_std = gyro_std


class InvalidGravityError(ArmFusionError, ValueError):
    """Acceleration too small to define a gravity direction."""


class StreamError(ArmFusionError):
    """Samples arrive out of order or with malformed timestamps."""


class RangeError(ArmFusionError, ValueError):
    """Requested window lies outside the span of a trace."""


class ShapeError(ArmFusionError, ValueError):
    """Traces that must be aligned have different lengths."""


class CsvFormatError(ArmFusionError, ValueError):
    """A CSV file has the wrong header or a row that cannot be parsed."""

    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(where + message)
        self.path = path
        self.line = line
