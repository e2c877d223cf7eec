"""
Method registry: fit any calibrator by name and move it through checkpoints.
"""

from __future__ import annotations

import logging
from pathlib import Path

from .baselines import (
    Calibrator,
    HistogramCalibrator,
    IdentityCalibrator,
    IsotonicCalibrator,
    PlattCalibrator,
    ScalingBinningCalibrator,
    make_baseline,
)
from .config import Method, RunConfig
from .data.dataset import Dataset
from .desc import DescModel
from .errors import CheckpointError, NotFittedError
from .io import checkpoint

logger = logging.getLogger(__name__)

LOADERS = {
    "desc": DescModel.from_dict,
    "histogram": HistogramCalibrator.from_dict,
    "isotonic": IsotonicCalibrator.from_dict,
    "sir": lambda d: IsotonicCalibrator.from_dict(d, smooth=True),
    "platt": PlattCalibrator.from_dict,
    "temperature": lambda d: PlattCalibrator.from_dict(d, temperature=True),
    "scalebin": ScalingBinningCalibrator.from_dict,
    "identity": IdentityCalibrator.from_dict,
}


def fit_calibrator(method: Method | str, calibration: Dataset, config: RunConfig) -> Calibrator:
    """Fit the named method on a calibration dataset."""
    method = Method(method)
    if method is Method.DESC:
        return DescModel.build(calibration, config.desc).fit(calibration)
    return make_baseline(method, config.baselines).fit(calibration)


def save_calibrator(path: str | Path, calibrator: Calibrator) -> Path:
    if not calibrator.fitted:
        raise NotFittedError(f"Refusing to checkpoint an unfitted {type(calibrator).__name__}")
    return checkpoint.save(path, calibrator.kind, calibrator.to_dict())


def load_calibrator(path: str | Path) -> Calibrator:
    """
    Load any calibrator checkpoint.

    Raises:
        CheckpointError: If the container or its payload is invalid
    """
    kind, payload = checkpoint.load(path)
    try:
        return LOADERS[kind](payload)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"{path}: invalid {kind} payload: {e}") from e
