"""
Isotonic regression by pool-adjacent-violators, evaluated as a step function
(IR) or by linear interpolation between block centroids (SIR).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..data.dataset import Dataset
from ..errors import DataError
from .base import Calibrator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IsotonicFit:
    """Breakpoints with strictly increasing x and non-decreasing y."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    interpolate: bool = False

    def __post_init__(self):
        if len(self.x) != len(self.y) or not self.x:
            raise ValueError("An isotonic fit needs matching, non-empty breakpoint lists")
        if any(b <= a for a, b in zip(self.x, self.x[1:])):
            raise ValueError("Breakpoint x values must be strictly increasing")
        if any(b < a for a, b in zip(self.y, self.y[1:])):
            raise ValueError("Breakpoint y values must be non-decreasing")

    def evaluate(self, p: np.ndarray) -> np.ndarray:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        p = np.asarray(p, dtype=np.float64)
        if self.interpolate:
            # np.interp extrapolates flat beyond both ends
            return np.interp(p, x, y)
        # value of the last breakpoint at or below p; the first value below the range
        return y[np.maximum(np.searchsorted(x, p, side="right") - 1, 0)]


def pava(y: np.ndarray, w: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Weighted pool-adjacent-violators.

    Args:
        y: Targets in sort order
        w: Positive weights (default 1)

    Returns:
        (fitted values per input, block id per input)
    """
    y = np.asarray(y, dtype=np.float64)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=np.float64)
    means: list[float] = []
    weights: list[float] = []
    sizes: list[int] = []
    for value, weight in zip(y, w):
        means.append(float(value))
        weights.append(float(weight))
        sizes.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            total = weights[-2] + weights[-1]
            merged = (means[-2] * weights[-2] + means[-1] * weights[-1]) / total
            size = sizes[-2] + sizes[-1]
            del means[-1], weights[-1], sizes[-1]
            means[-1], weights[-1], sizes[-1] = merged, total, size
    blocks = np.repeat(np.arange(len(sizes)), sizes)
    return np.asarray(means)[blocks], blocks


def _pooled(dataset: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Unique scores with their label means, counts, PAVA values and block ids."""
    if len(dataset) == 0:
        raise DataError("Cannot fit isotonic regression on an empty dataset")
    scores, inverse, counts = np.unique(dataset.p_uncalib, return_inverse=True, return_counts=True)
    means = np.bincount(inverse, weights=dataset.labels.astype(np.float64)) / counts
    fitted, blocks = pava(means, counts)
    return scores, counts, fitted, blocks


def fit_isotonic(dataset: Dataset) -> IsotonicFit:
    """Step-function isotonic fit; tied scores are averaged before pooling."""
    scores, _, fitted, _ = _pooled(dataset)
    return IsotonicFit(tuple(float(s) for s in scores), tuple(float(v) for v in fitted))


def fit_sir(dataset: Dataset) -> IsotonicFit:
    """Smoothed isotonic fit: block centroids joined by straight lines."""
    scores, counts, fitted, blocks = _pooled(dataset)
    weight = np.bincount(blocks, weights=counts)
    centroids = np.bincount(blocks, weights=scores * counts) / weight
    values = np.bincount(blocks, weights=fitted * counts) / weight
    return IsotonicFit(tuple(float(c) for c in centroids), tuple(float(v) for v in values), interpolate=True)


class IsotonicCalibrator(Calibrator):
    """Isotonic regression (IR); `smooth=True` gives smoothed isotonic regression (SIR)."""

    def __init__(self, smooth: bool = False, fit: IsotonicFit | None = None):
        self.smooth = smooth
        self.isotonic = fit

    @property
    def kind(self) -> str:
        return "sir" if self.smooth else "isotonic"

    @property
    def fitted(self) -> bool:
        return self.isotonic is not None

    def fit(self, dataset: Dataset) -> IsotonicCalibrator:
        self.isotonic = fit_sir(dataset) if self.smooth else fit_isotonic(dataset)
        logger.info("Fitted %s with %d breakpoints", self.kind, len(self.isotonic.x))
        return self

    def _apply(self, p_uncalib: np.ndarray) -> np.ndarray:
        return self.isotonic.evaluate(p_uncalib)

    def to_dict(self) -> dict[str, Any]:
        return {"x": list(self.isotonic.x), "y": list(self.isotonic.y)}

    @staticmethod
    def from_dict(d: dict[str, Any], smooth: bool = False) -> IsotonicCalibrator:
        return IsotonicCalibrator(smooth, IsotonicFit(tuple(d["x"]), tuple(d["y"]), interpolate=smooth))
