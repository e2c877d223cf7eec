"""
Reference calibrators compared against DESC.
"""

from __future__ import annotations

from ..config import BaselineConfig, Method
from ..errors import ConfigError
from .base import Calibrator, IdentityCalibrator
from .histogram import BinTable, HistogramCalibrator, fit_histogram
from .isotonic import IsotonicCalibrator, IsotonicFit, fit_isotonic, fit_sir, pava
from .platt import PlattCalibrator, PlattParams, ScalingBinningCalibrator, fit_platt, fit_temperature


def make_baseline(method: Method | str, config: BaselineConfig | None = None) -> Calibrator:
    """Unfitted baseline calibrator for a method name."""
    config = config or BaselineConfig()
    try:
        method = Method(method)
    except ValueError as e:
        raise ConfigError(f"Unknown method '{method}'") from e
    if method is Method.HB:
        return HistogramCalibrator(config.histogram_bins, config.histogram_mode)
    if method is Method.IR:
        return IsotonicCalibrator()
    if method is Method.SIR:
        return IsotonicCalibrator(smooth=True)
    if method is Method.PLATT:
        return PlattCalibrator()
    if method is Method.TEMP:
        return PlattCalibrator(temperature=True)
    if method is Method.SCALEBIN:
        return ScalingBinningCalibrator(config.scalebin_bins, config.histogram_mode)
    if method is Method.IDENTITY:
        return IdentityCalibrator()
    raise ConfigError(f"'{method.value}' is not a baseline method")


__all__ = [
    "BinTable",
    "Calibrator",
    "HistogramCalibrator",
    "IdentityCalibrator",
    "IsotonicCalibrator",
    "IsotonicFit",
    "PlattCalibrator",
    "PlattParams",
    "ScalingBinningCalibrator",
    "fit_histogram",
    "fit_isotonic",
    "fit_platt",
    "fit_sir",
    "fit_temperature",
    "make_baseline",
    "pava",
]
