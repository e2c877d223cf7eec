"""
Field-level calibration errors.

For a field i the dataset is partitioned into value subsets D^z. F-RCE weighs
each subset's residual mass by its positive rate; F-ECE measures binned
calibration error inside every subset. The multi-field variants average over
the evaluated fields.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..data.binning import BinMode
from ..data.dataset import Dataset
from ..errors import DataError
from .scores import binned_residual_mass, within_group_bins

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FieldScore:
    """A field metric together with the number of value subsets left out of it."""

    value: float
    skipped: int = 0


def _field_column(dataset: Dataset, field: int | str) -> np.ndarray:
    position = dataset.schema.field_index(field) if isinstance(field, str) else int(field)
    if not 0 <= position < dataset.n_fields:
        raise ValueError(f"Field position {position} out of range for {dataset.n_fields} fields")
    return dataset.field_values[:, position]


def _calibrated(dataset: Dataset, p_calib: np.ndarray) -> np.ndarray:
    p_calib = np.asarray(p_calib, dtype=np.float64)
    if p_calib.shape != (len(dataset),):
        raise ValueError(f"Expected {len(dataset)} calibrated scores, got shape {p_calib.shape}")
    return p_calib


def f_rce_score(dataset: Dataset, p_calib: np.ndarray, field: int | str) -> FieldScore:
    """
    Field relative calibration error with the count of skipped subsets.

    Raises:
        DataError: If every value subset lacks positive labels
    """
    p_calib = _calibrated(dataset, p_calib)
    values = _field_column(dataset, field)
    labels = dataset.labels.astype(np.float64)
    residual = np.bincount(values, weights=labels - p_calib)
    positives = np.bincount(values, weights=labels)
    counts = np.bincount(values)
    present = counts > 0
    usable = present & (positives > 0)
    skipped = int((present & ~usable).sum())
    if not usable.any():
        raise DataError(f"F-RCE undefined for field {field!r}: no value subset has a positive label")
    if skipped:
        logger.debug("F-RCE for field %r skipped %d zero-positive subsets", field, skipped)
    mean_label = positives[usable] / counts[usable]
    return FieldScore(float(np.sum(np.abs(residual[usable]) / mean_label) / len(dataset)), skipped)


def f_rce(dataset: Dataset, p_calib: np.ndarray, field: int | str) -> float:
    """Field relative calibration error of one field."""
    return f_rce_score(dataset, p_calib, field).value


def f_ece(dataset: Dataset, p_calib: np.ndarray, field: int | str, m: int = 3, mode: BinMode | str = BinMode.QUANTILE) -> float:
    """
    Field expected calibration error with m bins per value subset.

    Every subset is sorted by p_uncalib (ties by original index) and cut into m
    equal-frequency bins (or fixed-width bins in equal_width mode).
    """
    if m < 1:
        raise ValueError(f"Bin count must be >= 1, got {m}")
    p_calib = _calibrated(dataset, p_calib)
    if len(dataset) == 0:
        return 0.0
    values = _field_column(dataset, field)
    bins = within_group_bins(values, dataset.p_uncalib, m, mode)
    return binned_residual_mass(dataset.labels, p_calib, values, bins, m) / len(dataset)


def mf_metrics(
    dataset: Dataset,
    p_calib: np.ndarray,
    fields: Sequence[int | str] | None = None,
    m: int = 3,
    mode: BinMode | str = BinMode.QUANTILE,
) -> tuple[float, float]:
    """(MF-RCE, MF-ECE@m): means of the per-field metrics over the given fields (default all)."""
    fields = list(range(dataset.n_fields)) if fields is None else list(fields)
    if not fields:
        raise ValueError("mf_metrics needs at least one field")
    rce = [f_rce(dataset, p_calib, f) for f in fields]
    ece = [f_ece(dataset, p_calib, f, m, mode) for f in fields]
    return float(np.mean(rce)), float(np.mean(ece))
