"""
The full evaluation report of one set of calibrated scores.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..data.binning import BinMode
from ..data.dataset import Dataset
from ..errors import DataError
from .analysis import binned_pcoc, complexity_from_pcoc
from .field import f_ece, f_rce_score
from .scores import auc, ece, log_loss, order_violations, pcoc

logger = logging.getLogger(__name__)


@dataclass
class FieldReport:
    """Metrics of one field."""

    f_rce: float | None
    f_rce_skipped: int
    f_ece: dict[int, float]


@dataclass
class ValueReport:
    """PCOC and miscalibration complexity of one field value."""

    field: str
    value: str
    count: int
    pcoc: float | None
    complexity: float | None


@dataclass
class MetricsReport:
    """Every metric for one dataset and one set of calibrated scores."""

    m_values: list[int]
    bin_mode: str
    complexity_bins: int
    sample_count: int
    fields: dict[str, FieldReport]
    mf_rce: float | None
    mf_ece: dict[int, float]
    ece: dict[int, float]
    pcoc: float | None
    auc: float | None
    log_loss: float
    order_violation_rate: float
    values: list[ValueReport] = field(default_factory=list)

    @property
    def skipped_subsets(self) -> dict[str, int]:
        """Zero-positive value subsets left out of F-RCE, per field."""
        return {name: report.f_rce_skipped for name, report in self.fields.items()}

    @property
    def skipped_complexity(self) -> int:
        return sum(1 for row in self.values if row.complexity is None)

    def to_dict(self) -> dict[str, Any]:
        """JSON form with stable keys (M-keyed entries become `@M`)."""

        def at(d: dict[int, float]) -> dict[str, float]:
            return {f"@{m}": v for m, v in d.items()}

        return {
            "m_values": list(self.m_values),
            "bin_mode": self.bin_mode,
            "complexity_bins": self.complexity_bins,
            "sample_count": self.sample_count,
            "auc": self.auc,
            "log_loss": self.log_loss,
            "pcoc": self.pcoc,
            "ece": at(self.ece),
            "mf_rce": self.mf_rce,
            "mf_ece": at(self.mf_ece),
            "order_violation_rate": self.order_violation_rate,
            "fields": {
                name: {"f_rce": r.f_rce, "f_rce_skipped": r.f_rce_skipped, "f_ece": at(r.f_ece)} for name, r in self.fields.items()
            },
            "skipped": {"f_rce": self.skipped_subsets, "complexity": self.skipped_complexity},
            "values": [asdict(row) for row in self.values],
        }

    def summary(self) -> dict[str, float | None]:
        """Headline numbers (one comparison-table row)."""
        row: dict[str, float | None] = {"auc": self.auc, "log_loss": self.log_loss, "pcoc": self.pcoc, "mf_rce": self.mf_rce}
        for m in self.m_values:
            row[f"mf_ece@{m}"] = self.mf_ece[m]
        for m in self.m_values:
            row[f"ece@{m}"] = self.ece[m]
        return row


def _optional(compute, *args) -> float | None:
    try:
        return compute(*args)
    except DataError as e:
        logger.warning("%s", e)
        return None


def _value_reports(dataset: Dataset, p_calib: np.ndarray, position: int, q: int) -> list[ValueReport]:
    name = dataset.schema.field_names[position]
    vocabulary = dataset.schema.vocabularies[position]
    column = dataset.field_values[:, position]
    rows = []
    for index in np.unique(column):
        mask = column == index
        labels = dataset.labels[mask]
        positives = labels.sum()
        pcocs = binned_pcoc(labels, p_calib[mask], dataset.p_uncalib[mask], q)
        rows.append(
            ValueReport(
                field=name,
                value=vocabulary[index],
                count=int(mask.sum()),
                pcoc=float(p_calib[mask].sum() / positives) if positives > 0 else None,
                complexity=None if pcocs is None else complexity_from_pcoc(pcocs),
            )
        )
    return rows


def evaluate(
    dataset: Dataset,
    p_calib: np.ndarray,
    fields: Sequence[str] | None = None,
    m_values: Sequence[int] = (3, 10),
    mode: BinMode | str = BinMode.QUANTILE,
    complexity_bins: int = 3,
) -> MetricsReport:
    """
    Compute the full report.

    Args:
        dataset: Evaluation data (labels, p_uncalib, fields)
        p_calib: Calibrated scores aligned with the dataset
        fields: Field names to evaluate (default every field)
        m_values: Bin counts for ECE and F-ECE
        mode: Binning mode of the ECE family
        complexity_bins: Bins of the per-value complexity table

    Raises:
        DataError: If a requested field is not in the dataset
        ValueError: If p_calib is not aligned with the dataset
    """
    p_calib = np.asarray(p_calib, dtype=np.float64)
    if p_calib.shape != (len(dataset),):
        raise ValueError(f"Expected {len(dataset)} calibrated scores, got shape {p_calib.shape}")
    if len(dataset) == 0:
        raise DataError("Cannot evaluate an empty dataset")
    mode = BinMode(mode)
    names = list(dataset.schema.field_names) if fields is None else [dataset.schema.field_names[dataset.schema.field_index(f)] for f in fields]
    m_values = [int(m) for m in m_values]

    field_reports: dict[str, FieldReport] = {}
    values: list[ValueReport] = []
    for name in names:
        position = dataset.schema.field_index(name)
        try:
            score = f_rce_score(dataset, p_calib, position)
            rce, skipped = score.value, score.skipped
        except DataError as e:
            logger.warning("%s", e)
            rce, skipped = None, int(len(np.unique(dataset.field_values[:, position])))
        field_reports[name] = FieldReport(rce, skipped, {m: f_ece(dataset, p_calib, position, m, mode) for m in m_values})
        values.extend(_value_reports(dataset, p_calib, position, complexity_bins))

    rces = [r.f_rce for r in field_reports.values()]
    report = MetricsReport(
        m_values=m_values,
        bin_mode=mode.value,
        complexity_bins=complexity_bins,
        sample_count=len(dataset),
        fields=field_reports,
        mf_rce=None if any(r is None for r in rces) else float(np.mean(rces)),
        mf_ece={m: float(np.mean([r.f_ece[m] for r in field_reports.values()])) for m in m_values},
        ece={m: ece(dataset.labels, p_calib, dataset.p_uncalib, m, mode) for m in m_values},
        pcoc=_optional(pcoc, dataset.labels, p_calib),
        auc=_optional(auc, dataset.labels, p_calib),
        log_loss=log_loss(dataset.labels, p_calib),
        order_violation_rate=order_violations(dataset.p_uncalib, p_calib),
        values=values,
    )
    logger.info("Evaluated %d samples: MF-ECE %s, log-loss %.6f", len(dataset), {f"@{m}": round(v, 6) for m, v in report.mf_ece.items()}, report.log_loss)
    return report
