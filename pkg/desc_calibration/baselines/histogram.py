"""
Histogram binning: the calibrated value of a bin is its empirical positive rate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..data.binning import BinMode, equal_width_edges, quantile_edges
from ..data.dataset import Dataset
from ..errors import ConfigError, DataError
from .base import Calibrator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BinTable:
    """Sorted bin edges and one calibrated value per bin."""

    edges: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.edges) + 1:
            raise ValueError(f"{len(self.edges)} edges need {len(self.edges) + 1} values, got {len(self.values)}")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("Bin edges must be strictly increasing")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ValueError("Bin values must lie in [0, 1]")

    def bin_of(self, p: np.ndarray) -> np.ndarray:
        return np.searchsorted(np.asarray(self.edges, dtype=np.float64), p, side="right")

    def lookup(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)[self.bin_of(p)]


def _fill_empty(means: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Empty bins take the value of the nearest non-empty bin (the lower one on ties)."""
    filled = np.flatnonzero(counts > 0)
    out = means.copy()
    for j in np.flatnonzero(counts == 0):
        distance = np.abs(filled - j)
        out[j] = means[filled[np.argmin(distance)]]
    return out


def fit_histogram(dataset: Dataset, k: int = 100, mode: BinMode | str = BinMode.QUANTILE) -> BinTable:
    """
    Fit histogram binning.

    Args:
        dataset: Calibration data
        k: Number of bins (quantile bins collapse on repeated scores)
        mode: quantile (equal frequency) or equal_width

    Raises:
        ConfigError: If k < 1
        DataError: If the dataset is empty
    """
    if k < 1:
        raise ConfigError(f"Histogram binning needs k >= 1, got {k}")
    if len(dataset) == 0:
        raise DataError("Cannot fit histogram binning on an empty dataset")
    mode = BinMode(mode)
    edges = equal_width_edges(k) if mode is BinMode.EQUAL_WIDTH else quantile_edges(dataset.p_uncalib, k)
    ids = np.searchsorted(np.asarray(edges, dtype=np.float64), dataset.p_uncalib, side="right")
    counts = np.bincount(ids, minlength=len(edges) + 1)
    positives = np.bincount(ids, weights=dataset.labels.astype(np.float64), minlength=len(edges) + 1)
    means = np.divide(positives, counts, out=np.zeros_like(positives), where=counts > 0)
    empty = int((counts == 0).sum())
    if empty:
        logger.debug("Histogram binning filled %d empty bins from neighbours", empty)
    return BinTable(tuple(edges), tuple(float(v) for v in _fill_empty(means, counts)))


class HistogramCalibrator(Calibrator):
    """Histogram binning calibrator."""

    kind = "histogram"

    def __init__(self, k: int = 100, mode: BinMode | str = BinMode.QUANTILE, table: BinTable | None = None):
        self.k = k
        self.mode = BinMode(mode)
        self.table = table

    @property
    def fitted(self) -> bool:
        return self.table is not None

    def fit(self, dataset: Dataset) -> HistogramCalibrator:
        self.table = fit_histogram(dataset, self.k, self.mode)
        logger.info("Fitted histogram binning with %d bins", len(self.table.values))
        return self

    def _apply(self, p_uncalib: np.ndarray) -> np.ndarray:
        return self.table.lookup(p_uncalib)

    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "mode": self.mode.value, "edges": list(self.table.edges), "values": list(self.table.values)}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> HistogramCalibrator:
        return HistogramCalibrator(d["k"], d["mode"], BinTable(tuple(d["edges"]), tuple(d["values"])))
