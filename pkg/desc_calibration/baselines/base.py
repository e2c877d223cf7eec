"""
Common interface of every calibrator.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, ClassVar

import numpy as np

from ..data.dataset import Dataset, clamp_probability
from ..errors import NotFittedError


class Calibrator(ABC):
    """A post-hoc map from uncalibrated scores (and possibly fields) to calibrated scores."""

    kind: ClassVar[str]

    @abstractmethod
    def fit(self, dataset: Dataset) -> Calibrator:
        """Fit on a calibration dataset and return self."""

    @abstractmethod
    def to_dict(self) -> dict[str, Any]:
        """Checkpoint payload."""

    @property
    @abstractmethod
    def fitted(self) -> bool: ...

    def predict(self, dataset: Dataset) -> np.ndarray:
        """Calibrated scores for every sample of a dataset."""
        return self.apply(dataset.p_uncalib)

    def apply(self, p_uncalib: np.ndarray) -> np.ndarray:
        """Calibrated scores for raw scores, clamped to [1e-6, 1 - 1e-6]."""
        if not self.fitted:
            raise NotFittedError(f"{type(self).__name__} must be fitted before use")
        return clamp_probability(self._apply(clamp_probability(p_uncalib)))

    def _apply(self, p_uncalib: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class IdentityCalibrator(Calibrator):
    """Leaves scores unchanged (the "No Calib." row)."""

    kind = "identity"

    def fit(self, dataset: Dataset) -> IdentityCalibrator:
        return self

    @property
    def fitted(self) -> bool:
        return True

    def _apply(self, p_uncalib: np.ndarray) -> np.ndarray:
        return p_uncalib

    def to_dict(self) -> dict[str, Any]:
        return {}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> IdentityCalibrator:
        return IdentityCalibrator()
