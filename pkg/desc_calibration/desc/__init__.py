"""
The DESC calibrator, its training loop and its ablation variants.
"""

from __future__ import annotations

from .ablation import ROW_LABELS, ablate, ablation_table, parse_variant
from .gradcheck import check_gradients, micro_problem
from .model import DescModel, ForwardResult, Inputs, family_for
from .training import EpochRecord, TrainResult, holdout_split, negative_log_likelihood, train

__all__ = [
    "ROW_LABELS",
    "DescModel",
    "EpochRecord",
    "ForwardResult",
    "Inputs",
    "TrainResult",
    "ablate",
    "ablation_table",
    "check_gradients",
    "family_for",
    "holdout_split",
    "micro_problem",
    "negative_log_likelihood",
    "parse_variant",
    "train",
]
