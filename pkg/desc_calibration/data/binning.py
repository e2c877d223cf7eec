"""
pCTR bucketing and reusable binning helpers.

Buckets feed the bucket embedding of the DESC model; the equal-frequency and
equal-width helpers are shared by the metrics and the baseline calibrators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from ..errors import ConfigError
from .dataset import Dataset

logger = logging.getLogger(__name__)


class BinMode(str, Enum):
    """How bin edges are placed."""

    QUANTILE = "quantile"
    EQUAL_WIDTH = "equal_width"


@dataclass(frozen=True)
class BucketSpec:
    """Strictly increasing edges splitting (0, 1) into len(edges) + 1 buckets."""

    edges: tuple[float, ...]
    mode: BinMode = BinMode.QUANTILE

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError(f"Bucket edges must be strictly increasing: {edges}")
        if edges and (edges[0] <= 0.0 or edges[-1] >= 1.0):
            raise ValueError(f"Bucket edges must lie inside (0, 1): {edges}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "mode", BinMode(self.mode))

    @property
    def bucket_count(self) -> int:
        return len(self.edges) + 1

    def to_dict(self) -> dict[str, Any]:
        return {"edges": list(self.edges), "mode": self.mode.value}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> BucketSpec:
        return BucketSpec(edges=tuple(d["edges"]), mode=BinMode(d["mode"]))


def quantile_edges(values: np.ndarray, k: int) -> tuple[float, ...]:
    """Edges at the i/k empirical quantiles, keeping only edges that separate the data."""
    values = np.asarray(values, dtype=np.float64)
    candidates = np.unique(np.quantile(values, np.arange(1, k) / k))
    low, high = values.min(), values.max()
    return tuple(float(e) for e in candidates if low < e <= high)


def equal_width_edges(k: int) -> tuple[float, ...]:
    return tuple(i / k for i in range(1, k))


def fit_buckets(dataset: Dataset | np.ndarray, k: int = 100, mode: BinMode | str = BinMode.QUANTILE) -> BucketSpec:
    """
    Fit pCTR buckets on the uncalibrated scores.

    Args:
        dataset: Dataset (or raw score array) to fit on
        k: Requested bucket count
        mode: quantile (duplicate edges dropped) or equal_width

    Returns:
        BucketSpec with at most k buckets

    Raises:
        ConfigError: If k < 2
        ValueError: If the dataset is empty
    """
    if k < 2:
        raise ConfigError(f"Bucket count must be >= 2, got {k}")
    mode = BinMode(mode)
    scores = dataset.p_uncalib if isinstance(dataset, Dataset) else np.asarray(dataset, dtype=np.float64)
    if len(scores) == 0:
        raise ValueError("Cannot fit buckets on an empty dataset")
    if mode is BinMode.EQUAL_WIDTH:
        return BucketSpec(equal_width_edges(k), mode)
    spec = BucketSpec(quantile_edges(scores, k), mode)
    if spec.bucket_count < k:
        logger.warning("Quantile buckets collapsed from %d to %d on degenerate scores", k, spec.bucket_count)
    return spec


def bucket_of(spec: BucketSpec, p: float) -> int:
    """Index of the half-open bucket [edge_{i-1}, edge_i) containing p."""
    return int(np.searchsorted(spec.edges, p, side="right"))


def bucket_indices(spec: BucketSpec, p: np.ndarray) -> np.ndarray:
    """Vectorized bucket_of."""
    return np.searchsorted(np.asarray(spec.edges, dtype=np.float64), np.asarray(p, dtype=np.float64), side="right").astype(np.int64)


def stable_order(scores: np.ndarray) -> np.ndarray:
    """Sort order by score, ties broken by original index."""
    return np.argsort(np.asarray(scores), kind="stable")


def equal_frequency_ids(n: int, m: int) -> np.ndarray:
    """Bin id for each sorted position: m bins whose sizes differ by at most one."""
    if m < 1:
        raise ValueError(f"Bin count must be >= 1, got {m}")
    return (np.arange(n, dtype=np.int64) * m) // max(n, 1)


def equal_width_ids(scores: np.ndarray, m: int) -> np.ndarray:
    """Bin id of each score for m equal-width bins over [0, 1]."""
    if m < 1:
        raise ValueError(f"Bin count must be >= 1, got {m}")
    return np.minimum((np.asarray(scores, dtype=np.float64) * m).astype(np.int64), m - 1)


def bin_ids(scores: np.ndarray, m: int, mode: BinMode | str = BinMode.QUANTILE) -> np.ndarray:
    """
    Assign every score to one of m bins.

    quantile mode sorts by score (stable) and cuts the sort order into m
    equal-frequency bins; equal_width mode uses fixed intervals of (0, 1).
    """
    mode = BinMode(mode)
    scores = np.asarray(scores, dtype=np.float64)
    if mode is BinMode.EQUAL_WIDTH:
        return equal_width_ids(scores, m)
    ids = np.empty(len(scores), dtype=np.int64)
    ids[stable_order(scores)] = equal_frequency_ids(len(scores), m)
    return ids
