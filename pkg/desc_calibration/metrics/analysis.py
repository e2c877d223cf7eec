"""
Per-field-value diagnostics: miscalibration complexity, error ratios and the
per-value comparison table behind the sample-size and complexity analyses.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence

import numpy as np
import pandas as pd

from ..data.binning import BinMode, equal_frequency_ids, stable_order
from ..data.dataset import Dataset
from .scores import ece

logger = logging.getLogger(__name__)


def complexity_from_pcoc(pcocs: Sequence[float]) -> float:
    """Mean absolute PCOC change between adjacent bins."""
    pcocs = np.asarray(pcocs, dtype=np.float64)
    if len(pcocs) < 2:
        raise ValueError("Miscalibration complexity needs at least two bins")
    return float(np.abs(np.diff(pcocs)).sum() / (len(pcocs) - 1))


def binned_pcoc(labels: np.ndarray, p_calib: np.ndarray, p_uncalib: np.ndarray, q: int) -> np.ndarray | None:
    """
    PCOC of q equal-frequency bins ordered by p_uncalib.

    Returns None when there are fewer than q samples or a bin has no positive label.
    """
    n = len(labels)
    if n < q:
        return None
    order = stable_order(p_uncalib)
    bins = equal_frequency_ids(n, q)
    predicted = np.bincount(bins, weights=np.asarray(p_calib, dtype=np.float64)[order], minlength=q)
    clicks = np.bincount(bins, weights=np.asarray(labels, dtype=np.float64)[order], minlength=q)
    if (clicks <= 0).any():
        return None
    return predicted / clicks


def miscalibration_complexity(dataset: Dataset, p_calib: np.ndarray, field: int | str, value: int | str, q: int = 3) -> float | None:
    """
    Miscalibration complexity of one field value.

    Args:
        dataset: Evaluation data
        p_calib: Scores whose binned PCOC is measured (pass p_uncalib for the raw model)
        field: Field position or name
        value: Vocabulary index or token
        q: Number of equal-frequency bins (> 1)

    Returns:
        The complexity, or None when the subset is skipped (fewer than q samples
        or a bin without positives)
    """
    if q < 2:
        raise ValueError(f"Complexity needs q > 1, got {q}")
    position = dataset.schema.field_index(field) if isinstance(field, str) else int(field)
    index = dataset.schema.lookup(position).get(value) if isinstance(value, str) else int(value)
    if index is None:
        return None
    mask = dataset.field_values[:, position] == index
    pcocs = binned_pcoc(dataset.labels[mask], np.asarray(p_calib)[mask], dataset.p_uncalib[mask], q)
    return None if pcocs is None else complexity_from_pcoc(pcocs)


def eer(ece_desc: float, ece_other: float) -> float:
    """Error ratio of DESC's ECE to a competitor's ECE on the same field value."""
    if ece_other <= 0.0:
        raise ValueError("EER is undefined when the competitor ECE is zero")
    return float(ece_desc / ece_other)


def per_value_table(
    dataset: Dataset,
    p_calib_by_method: Mapping[str, np.ndarray],
    field: int | str,
    q: int = 3,
    m: int = 10,
    reference: str = "desc",
    mode: BinMode | str = BinMode.QUANTILE,
) -> pd.DataFrame:
    """
    One row per value of a field: sample count, uncalibrated complexity, each
    method's ECE@m on the subset and its EER against the reference method.

    EER cells are empty when the competitor's ECE is zero; complexity cells are
    empty for skipped subsets.
    """
    position = dataset.schema.field_index(field) if isinstance(field, str) else int(field)
    name = dataset.schema.field_names[position]
    vocabulary = dataset.schema.vocabularies[position]
    column = dataset.field_values[:, position]
    methods = list(p_calib_by_method)
    rows = []
    for index in np.unique(column):
        mask = column == index
        labels = dataset.labels[mask]
        p_uncalib = dataset.p_uncalib[mask]
        pcocs = binned_pcoc(labels, p_uncalib, p_uncalib, q)
        row: dict[str, object] = {
            "field": name,
            "value": vocabulary[index],
            "count": int(mask.sum()),
            "log10_count": float(np.log10(mask.sum())),
            "complexity": None if pcocs is None else complexity_from_pcoc(pcocs),
        }
        errors = {method: ece(labels, np.asarray(p)[mask], p_uncalib, m, mode) for method, p in p_calib_by_method.items()}
        for method in methods:
            row[f"ece_{method}"] = errors[method]
        if reference in errors:
            for method in methods:
                if method != reference:
                    row[f"eer_{method}"] = eer(errors[reference], errors[method]) if errors[method] > 0 else None
        rows.append(row)
    logger.debug("Built per-value table for field %s with %d values", name, len(rows))
    return pd.DataFrame(rows)
