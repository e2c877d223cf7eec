"""DESC multi-field calibration toolkit

Post-hoc calibration of CTR-style predictions with field-aware shape and value
correction, the classic baselines it is compared against (histogram binning,
isotonic regression, Platt and temperature scaling, smoothed isotonic
regression, scaling-binning), field-level calibration metrics and a synthetic
data generator with known ground truth.
"""

__version__ = "0.1.0"

from .baselines import Calibrator, make_baseline
from .calibrators import fit_calibrator, load_calibrator, save_calibrator
from .config import DescConfig, Method, RunConfig, Variant
from .data import Dataset, FieldSchema, load_csv, split
from .desc import DescModel, train
from .errors import CalibrationError, CheckpointError, ConfigError, DataError, NotFittedError, NumericError
from .metrics import MetricsReport, evaluate

__all__ = [
    "CalibrationError",
    "Calibrator",
    "CheckpointError",
    "ConfigError",
    "DataError",
    "Dataset",
    "DescConfig",
    "DescModel",
    "FieldSchema",
    "Method",
    "MetricsReport",
    "NotFittedError",
    "NumericError",
    "RunConfig",
    "Variant",
    "evaluate",
    "fit_calibrator",
    "load_calibrator",
    "load_csv",
    "make_baseline",
    "save_calibrator",
    "split",
    "train",
]
