"""
Datasets, CSV ingestion, splitting and score binning.
"""

from __future__ import annotations

from .binning import BinMode, BucketSpec, bin_ids, bucket_indices, bucket_of, equal_frequency_ids, fit_buckets, stable_order
from .dataset import (
    EPSILON,
    OOV_INDEX,
    Dataset,
    FieldSchema,
    Role,
    Sample,
    clamp_probability,
    dataset_to_csv,
    load_csv,
    split,
    split_indices,
    subsample,
    to_frame,
)

__all__ = [
    "EPSILON",
    "OOV_INDEX",
    "BinMode",
    "BucketSpec",
    "Dataset",
    "FieldSchema",
    "Role",
    "Sample",
    "bin_ids",
    "bucket_indices",
    "bucket_of",
    "clamp_probability",
    "dataset_to_csv",
    "equal_frequency_ids",
    "fit_buckets",
    "load_csv",
    "split",
    "split_indices",
    "stable_order",
    "subsample",
    "to_frame",
]
