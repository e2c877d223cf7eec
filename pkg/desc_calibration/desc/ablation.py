"""
Ablation study: the full model against variants with one component removed.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import pandas as pd

from ..config import DescConfig, MetricsConfig, Variant
from ..data.dataset import Dataset
from ..errors import ConfigError
from ..metrics.report import MetricsReport, evaluate
from .model import DescModel

logger = logging.getLogger(__name__)

ROW_LABELS = {
    Variant.FULL: "DESC",
    Variant.NO_SHAPE: "w/o Shape Calibrator",
    Variant.NO_VALUE: "w/o Value Calibrator",
    Variant.MEAN_POOL: "w/o Multi-Field Shape Ensemble",
    Variant.NO_BUCKET: "w/o pCTR Bucket Feature",
    Variant.NO_AUGMENTATION: "w/o Embedding Augment",
}


def parse_variant(name: Variant | str) -> Variant:
    try:
        return Variant(name)
    except ValueError as e:
        raise ConfigError(f"Unknown variant '{name}'; expected one of {[v.value for v in Variant]}") from e


def ablate(
    variant: Variant | str,
    calibration: Dataset,
    test: Dataset,
    config: DescConfig,
    metrics: MetricsConfig | None = None,
    fields: Sequence[str] | None = None,
    scored: Dataset | None = None,
) -> MetricsReport:
    """
    Train one architecture variant on the calibration split and evaluate it on the test split.

    `test` is the model input; metrics group by the field values of `scored`
    (the same rows, default `test`).

    Raises:
        ConfigError: If the variant is unknown
    """
    variant = parse_variant(variant)
    metrics = metrics or MetricsConfig()
    model = DescModel.build(calibration, config, variant).fit(calibration)
    return evaluate(test if scored is None else scored, model.predict(test), fields, metrics.ece_bins, metrics.bin_mode, metrics.complexity_bins)


def ablation_table(
    calibration: Dataset,
    test: Dataset,
    config: DescConfig,
    metrics: MetricsConfig | None = None,
    variants: Sequence[Variant | str] | None = None,
    fields: Sequence[str] | None = None,
    scored: Dataset | None = None,
) -> tuple[pd.DataFrame, dict[str, MetricsReport]]:
    """
    Run every variant under the same seed; the full model is always included and marked as reference.

    Returns:
        (one row per variant, report per variant name)
    """
    chosen = [parse_variant(v) for v in (variants or list(Variant))]
    if Variant.FULL not in chosen:
        chosen.insert(0, Variant.FULL)
    rows, reports = [], {}
    for variant in chosen:
        logger.info("Ablation: %s", ROW_LABELS[variant])
        report = ablate(variant, calibration, test, config, metrics, fields, scored)
        reports[variant.value] = report
        rows.append({"variant": variant.value, "row": ROW_LABELS[variant], "reference": variant is Variant.FULL, **report.summary()})
    return pd.DataFrame(rows), reports
