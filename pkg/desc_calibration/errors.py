"""
Exception hierarchy for the calibration toolkit.

Every error raised on purpose by this package derives from CalibrationError so
callers (the CLI in particular) can map failures onto exit codes.
"""

from __future__ import annotations


class CalibrationError(Exception):
    """Base class for all toolkit errors."""

    pass


class ConfigError(CalibrationError):
    """Raised when a run configuration is invalid.

    This can happen when:
    - A config file or `--set` override names an unknown key
    - A value is out of its allowed range (counts <= 0, bad epsilon, ...)
    - An unknown calibration method or ablation variant is requested
    """

    pass


class DataError(CalibrationError):
    """Raised when input data does not satisfy its contract.

    This can happen when:
    - A CSV misses `label`, `p_uncalib` or any `f_` column
    - Labels are not in {0, 1} or scores are not numeric
    - A dataset does not match the schema stored in a checkpoint
    - A split would be empty, or a distortion references an unknown field/value
    """

    pass


class NumericError(CalibrationError):
    """Raised when a computation produces non-finite values.

    Training aborts with this error (and a diagnostic) as soon as the loss is
    NaN or infinite; the gradient checker raises it for NaN-producing forwards.
    """

    pass


class CheckpointError(CalibrationError):
    """Raised when a checkpoint cannot be read back.

    This can happen when:
    - The file is not a toolkit checkpoint or has an unsupported version
    - The stored kind does not match the requested calibrator
    - A stored tensor's value count disagrees with its shape
    """

    pass


class NotFittedError(CalibrationError):
    """Raised when a calibrator is applied before it was fitted."""

    pass
