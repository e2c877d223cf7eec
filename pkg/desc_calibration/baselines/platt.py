"""
Logit-space parametric calibration: Platt scaling, temperature scaling and the
scaling-binning hybrid.

Platt fits p = sigmoid(a * logit(p_uncalib) + b) by minimizing the mean
log-loss; temperature scaling is the binary special case with b = 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.optimize
from scipy.special import expit, logit

from ..data.binning import BinMode
from ..data.dataset import Dataset
from ..errors import DataError, NumericError
from .base import Calibrator
from .histogram import HistogramCalibrator

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8
MAX_ITERATIONS = 200


@dataclass(frozen=True)
class PlattParams:
    """Slope and intercept on the logit of the uncalibrated score."""

    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise NumericError(f"Platt parameters must be finite, got ({self.a}, {self.b})")

    def evaluate(self, p: np.ndarray) -> np.ndarray:
        return expit(self.a * logit(p) + self.b)


def _logistic_objective(z: np.ndarray, y: np.ndarray, with_intercept: bool):
    """Mean log-loss, gradient and Hessian in (a, b) or (a,)."""
    features = np.stack([z, np.ones_like(z)], axis=1) if with_intercept else z[:, None]
    n = len(y)

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        s = features @ theta
        # log(1 + e^s) - y s, computed stably
        loss = np.mean(np.logaddexp(0.0, s) - y * s)
        return float(loss), features.T @ (expit(s) - y) / n

    def hessian(theta: np.ndarray) -> np.ndarray:
        q = expit(features @ theta)
        return (features * (q * (1.0 - q))[:, None]).T @ features / n

    return objective, hessian


def _fit_logistic(dataset: Dataset, with_intercept: bool) -> PlattParams:
    if len(dataset) == 0 or dataset.labels.min() == dataset.labels.max():
        raise DataError("Platt and temperature scaling need both positive and negative labels")
    z = logit(dataset.p_uncalib)
    y = dataset.labels.astype(np.float64)
    objective, hessian = _logistic_objective(z, y, with_intercept)
    x0 = np.array([1.0, 0.0]) if with_intercept else np.array([1.0])
    result = scipy.optimize.minimize(
        objective,
        x0,
        jac=True,
        hess=hessian,
        method="trust-exact",
        options={"gtol": GRADIENT_TOLERANCE, "maxiter": MAX_ITERATIONS},
    )
    if not np.all(np.isfinite(result.x)):
        raise NumericError(f"Logistic fit diverged: {result.message}")
    if not result.success:
        logger.warning("Logistic fit stopped early: %s", result.message)
    return PlattParams(float(result.x[0]), float(result.x[1]) if with_intercept else 0.0)


def fit_platt(dataset: Dataset) -> PlattParams:
    """
    Fit slope and intercept.

    Raises:
        DataError: If only one class is present
    """
    return _fit_logistic(dataset, with_intercept=True)


def fit_temperature(dataset: Dataset) -> PlattParams:
    """Fit the slope only (intercept fixed at 0)."""
    return _fit_logistic(dataset, with_intercept=False)


class PlattCalibrator(Calibrator):
    """Platt scaling, or temperature scaling when `temperature=True`."""

    def __init__(self, temperature: bool = False, params: PlattParams | None = None):
        self.temperature = temperature
        self.params = params

    @property
    def kind(self) -> str:
        return "temperature" if self.temperature else "platt"

    @property
    def fitted(self) -> bool:
        return self.params is not None

    def fit(self, dataset: Dataset) -> PlattCalibrator:
        self.params = fit_temperature(dataset) if self.temperature else fit_platt(dataset)
        logger.info("Fitted %s: a=%.6f b=%.6f", self.kind, self.params.a, self.params.b)
        return self

    def _apply(self, p_uncalib: np.ndarray) -> np.ndarray:
        return self.params.evaluate(p_uncalib)

    def to_dict(self) -> dict[str, Any]:
        return {"a": self.params.a, "b": self.params.b}

    @staticmethod
    def from_dict(d: dict[str, Any], temperature: bool = False) -> PlattCalibrator:
        return PlattCalibrator(temperature, PlattParams(d["a"], d["b"]))


class ScalingBinningCalibrator(Calibrator):
    """Platt scaling followed by histogram binning of the scaled scores."""

    kind = "scalebin"

    def __init__(self, k: int = 100, mode: BinMode | str = BinMode.QUANTILE):
        self.scaler = PlattCalibrator()
        self.binner = HistogramCalibrator(k, mode)

    @property
    def fitted(self) -> bool:
        return self.scaler.fitted and self.binner.fitted

    def fit(self, dataset: Dataset) -> ScalingBinningCalibrator:
        self.scaler.fit(dataset)
        self.binner.fit(dataset.with_scores(self.scaler.apply(dataset.p_uncalib)))
        return self

    def _apply(self, p_uncalib: np.ndarray) -> np.ndarray:
        return self.binner.apply(self.scaler.apply(p_uncalib))

    def to_dict(self) -> dict[str, Any]:
        return {"platt": self.scaler.to_dict(), "histogram": self.binner.to_dict()}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> ScalingBinningCalibrator:
        calibrator = ScalingBinningCalibrator(d["histogram"]["k"], d["histogram"]["mode"])
        calibrator.scaler = PlattCalibrator.from_dict(d["platt"])
        calibrator.binner = HistogramCalibrator.from_dict(d["histogram"])
        return calibrator
