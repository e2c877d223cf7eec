"""
Calibration and ranking metrics.
"""

from __future__ import annotations

from .analysis import binned_pcoc, complexity_from_pcoc, eer, miscalibration_complexity, per_value_table
from .field import FieldScore, f_ece, f_rce, f_rce_score, mf_metrics
from .report import FieldReport, MetricsReport, ValueReport, evaluate
from .scores import auc, ece, log_loss, order_violations, pcoc, reliability_table

__all__ = [
    "FieldReport",
    "FieldScore",
    "MetricsReport",
    "ValueReport",
    "auc",
    "binned_pcoc",
    "complexity_from_pcoc",
    "ece",
    "eer",
    "evaluate",
    "f_ece",
    "f_rce",
    "f_rce_score",
    "log_loss",
    "mf_metrics",
    "miscalibration_complexity",
    "order_violations",
    "pcoc",
    "per_value_table",
    "reliability_table",
]
