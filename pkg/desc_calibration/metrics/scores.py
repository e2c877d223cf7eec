"""
Dataset-level calibration and ranking scores.
"""

from __future__ import annotations

import numpy as np
import pandas as pd
from scipy.special import xlogy
from scipy.stats import rankdata

from ..data.binning import BinMode, bin_ids
from ..errors import DataError

LOG_LOSS_CLIP = 1e-15


def _check_lengths(*arrays: np.ndarray) -> None:
    lengths = {len(a) for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"Length mismatch: {sorted(lengths)}")


def pcoc(labels: np.ndarray, p_calib: np.ndarray) -> float:
    """Predicted Click Over Click: sum of predictions over sum of labels."""
    labels = np.asarray(labels, dtype=np.float64)
    p_calib = np.asarray(p_calib, dtype=np.float64)
    _check_lengths(labels, p_calib)
    positives = labels.sum()
    if positives <= 0:
        raise DataError("PCOC is undefined without positive labels")
    return float(p_calib.sum() / positives)


def binned_residual_mass(labels: np.ndarray, p_calib: np.ndarray, groups: np.ndarray, bins: np.ndarray, m: int) -> float:
    """Sum over (group, bin) cells of |sum(y) - sum(p)|."""
    cells = groups.astype(np.int64) * m + bins
    residual = np.bincount(cells, weights=np.asarray(labels, dtype=np.float64) - p_calib)
    return float(np.abs(residual).sum())


def within_group_bins(groups: np.ndarray, p_uncalib: np.ndarray, m: int, mode: BinMode | str = BinMode.QUANTILE) -> np.ndarray:
    """
    Bin id of every sample inside its own group.

    quantile mode sorts each group by p_uncalib (ties by original index) and cuts
    it into m equal-frequency bins; equal_width mode uses fixed score intervals.
    """
    mode = BinMode(mode)
    if mode is BinMode.EQUAL_WIDTH:
        return bin_ids(p_uncalib, m, mode)
    n = len(groups)
    order = np.lexsort((np.arange(n), p_uncalib, groups))
    sorted_groups = groups[order]
    counts = np.bincount(sorted_groups)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    position = np.arange(n) - starts[sorted_groups]
    ids = np.empty(n, dtype=np.int64)
    ids[order] = (position * m) // counts[sorted_groups]
    return ids


def ece(labels: np.ndarray, p_calib: np.ndarray, p_uncalib: np.ndarray, m: int = 10, mode: BinMode | str = BinMode.QUANTILE) -> float:
    """Expected calibration error with m bins over the whole dataset, ordered by p_uncalib."""
    labels = np.asarray(labels, dtype=np.float64)
    p_calib = np.asarray(p_calib, dtype=np.float64)
    p_uncalib = np.asarray(p_uncalib, dtype=np.float64)
    _check_lengths(labels, p_calib, p_uncalib)
    if m < 1:
        raise ValueError(f"Bin count must be >= 1, got {m}")
    if len(labels) == 0:
        return 0.0
    groups = np.zeros(len(labels), dtype=np.int64)
    bins = within_group_bins(groups, p_uncalib, m, mode)
    return binned_residual_mass(labels, p_calib, groups, bins, m) / len(labels)


def auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """Mann-Whitney AUC with average ranks for tied scores."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    _check_lengths(labels, scores)
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs both positive and negative labels")
    ranks = rankdata(scores, method="average")
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def log_loss(labels: np.ndarray, p: np.ndarray) -> float:
    """Mean negative log-likelihood."""
    labels = np.asarray(labels, dtype=np.float64)
    p = np.clip(np.asarray(p, dtype=np.float64), LOG_LOSS_CLIP, 1.0 - LOG_LOSS_CLIP)
    _check_lengths(labels, p)
    return float(-np.mean(xlogy(labels, p) + xlogy(1.0 - labels, 1.0 - p)))


def reliability_table(labels: np.ndarray, p_calib: np.ndarray, p_uncalib: np.ndarray, m: int = 10, mode: BinMode | str = BinMode.QUANTILE) -> pd.DataFrame:
    """Per-bin count, accuracy (mean label) and confidence (mean p_calib) for reliability diagrams."""
    labels = np.asarray(labels, dtype=np.float64)
    p_calib = np.asarray(p_calib, dtype=np.float64)
    p_uncalib = np.asarray(p_uncalib, dtype=np.float64)
    _check_lengths(labels, p_calib, p_uncalib)
    bins = within_group_bins(np.zeros(len(labels), dtype=np.int64), p_uncalib, m, mode)
    frame = pd.DataFrame({"bin": bins, "label": labels, "p_calib": p_calib, "p_uncalib": p_uncalib})
    table = frame.groupby("bin", sort=True).agg(
        count=("label", "size"),
        accuracy=("label", "mean"),
        confidence=("p_calib", "mean"),
        mean_p_uncalib=("p_uncalib", "mean"),
    )
    return table.reset_index()


def order_violations(p_uncalib: np.ndarray, p_calib: np.ndarray) -> float:
    """
    Fraction of adjacent pairs, sorted by p_uncalib, whose calibrated order is reversed.

    Only pairs with strictly increasing p_uncalib count; 0.0 when there are none.
    """
    p_uncalib = np.asarray(p_uncalib, dtype=np.float64)
    p_calib = np.asarray(p_calib, dtype=np.float64)
    _check_lengths(p_uncalib, p_calib)
    order = np.argsort(p_uncalib, kind="stable")
    rising = np.diff(p_uncalib[order]) > 0
    if not rising.any():
        return 0.0
    reversed_ = np.diff(p_calib[order]) < 0
    return float((rising & reversed_).sum() / rising.sum())
