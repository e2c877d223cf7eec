"""
Synthetic CTR data with known true probabilities.

Field values are drawn uniformly, every value carries a fixed logit effect and
labels are Bernoulli draws from the true probability. The uncalibrated score is
the true probability distorted per field value in odds space:

    odds' = value_bias * odds(p*) ** shape_exponent

value_bias moves the average of a value (value miscalibration) while
shape_exponent bends the score curve inside it (shape miscalibration).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import expit, logit

from .config import DistortionConfig, GenConfig
from .data.dataset import EPSILON, Dataset, FieldSchema, clamp_probability
from .errors import DataError
from .metrics.report import MetricsReport, evaluate

logger = logging.getLogger(__name__)

TRUE_PROBABILITY_COLUMN = "p_true"


@dataclass(frozen=True)
class Distortion:
    """Odds-space distortion of one field value; (1, 1) is the identity."""

    value_bias: float = 1.0
    shape_exponent: float = 1.0

    def __post_init__(self):
        if self.value_bias <= 0 or self.shape_exponent <= 0:
            raise DataError(f"Distortion parameters must be positive, got ({self.value_bias}, {self.shape_exponent})")

    @property
    def is_identity(self) -> bool:
        return self.value_bias == 1.0 and self.shape_exponent == 1.0

    def apply(self, p: np.ndarray | float) -> np.ndarray:
        """Distort probabilities: odds' = value_bias * odds ** shape_exponent."""
        return expit(np.log(self.value_bias) + self.shape_exponent * logit(p))


@dataclass
class DistortionSpec:
    """Map from (field name, value token) to its distortion; unlisted values are undistorted."""

    assignment: dict[tuple[str, str], Distortion] = field(default_factory=dict)

    @staticmethod
    def identity() -> DistortionSpec:
        return DistortionSpec()

    @staticmethod
    def round_robin(schema: FieldSchema, fields: list[str], value_biases: list[float], shape_exponents: list[float]) -> DistortionSpec:
        """
        Give every value of each listed field one (bias, exponent) pair, cycling
        through the Cartesian product of the two lists in vocabulary order.
        """
        combos = list(itertools.product(value_biases, shape_exponents))
        if not combos:
            return DistortionSpec()
        assignment = {}
        for name in fields:
            position = schema.field_index(name)
            canonical = schema.field_names[position]
            for j, token in enumerate(schema.vocabularies[position][1:]):
                bias, exponent = combos[j % len(combos)]
                assignment[(canonical, token)] = Distortion(bias, exponent)
        return DistortionSpec(assignment)

    @staticmethod
    def from_config(schema: FieldSchema, config: DistortionConfig) -> DistortionSpec:
        """
        Build the assignment from a DistortionConfig.

        Raises:
            DataError: If a field or value is not in the schema
        """
        spec = DistortionSpec.round_robin(schema, list(config.fields), list(config.value_biases), list(config.shape_exponents))
        for override in config.overrides:
            try:
                key = (str(override["field"]), str(override["value"]))
            except KeyError as e:
                raise DataError(f"Distortion override needs 'field' and 'value': {override}") from e
            spec.assignment[key] = Distortion(float(override.get("value_bias", 1.0)), float(override.get("shape_exponent", 1.0)))
        spec.validate(schema)
        return spec

    def validate(self, schema: FieldSchema) -> None:
        for name, token in self.assignment:
            if name not in schema.field_names:
                raise DataError(f"Distortion references unknown field '{name}'")
            position = schema.field_names.index(name)
            if token not in schema.vocabularies[position][1:]:
                raise DataError(f"Distortion references unknown value '{token}' of field '{name}'")

    def to_dict(self) -> list[dict[str, Any]]:
        return [
            {"field": name, "value": token, "value_bias": d.value_bias, "shape_exponent": d.shape_exponent}
            for (name, token), d in sorted(self.assignment.items())
        ]


def schema_for(config: GenConfig) -> FieldSchema:
    """Schema of generated data: fields `field<i>` with tokens `v0`, `v1`, ..."""
    config.validate()
    return FieldSchema.from_tokens(
        [f"field{i}" for i in range(config.n_fields)],
        [[f"v{j}" for j in range(c)] for c in config.cardinalities],
    )


@dataclass
class Generated:
    """A generated dataset with its ground truth."""

    dataset: Dataset
    true_probs: np.ndarray
    effects: list[np.ndarray]
    distortion: DistortionSpec
    config: GenConfig

    def metadata(self) -> dict[str, Any]:
        """Sidecar document: seed, config, per-value effects and distortions."""
        schema = self.dataset.schema
        return {
            "seed": self.config.seed,
            "config": {
                "n_fields": self.config.n_fields,
                "cardinalities": list(self.config.cardinalities),
                "base_logit": self.config.base_logit,
                "field_effect_scale": self.config.field_effect_scale,
                "sample_count": self.config.sample_count,
                "seed": self.config.seed,
            },
            "effects": {name: {token: float(e) for token, e in zip(schema.vocabularies[i][1:], self.effects[i])} for i, name in enumerate(schema.field_names)},
            "distortions": self.distortion.to_dict(),
            "true_probs_column": TRUE_PROBABILITY_COLUMN,
        }


def generate(config: GenConfig, distortion: DistortionSpec | None = None) -> Generated:
    """
    Draw a dataset.

    The random stream is consumed in a fixed order (effects, field values,
    labels), so identical inputs give bit-identical outputs.

    Raises:
        DataError: If the distortion references a field or value outside the schema
    """
    schema = schema_for(config)
    distortion = distortion or DistortionSpec.identity()
    distortion.validate(schema)

    rng = np.random.default_rng(config.seed)
    effects = [rng.normal(0.0, config.field_effect_scale, size=c) for c in config.cardinalities]
    columns = [rng.integers(0, c, size=config.sample_count) for c in config.cardinalities]
    z = config.base_logit + sum(effects[i][columns[i]] for i in range(config.n_fields))
    true_probs = clamp_probability(expit(z))
    labels = (rng.random(config.sample_count) < true_probs).astype(np.int8)

    p_uncalib = true_probs.copy()
    for (name, token), d in sorted(distortion.assignment.items()):
        if d.is_identity:
            continue
        position = schema.field_names.index(name)
        index = schema.vocabularies[position].index(token) - 1
        mask = columns[position] == index
        p_uncalib[mask] = d.apply(p_uncalib[mask])
    p_uncalib = clamp_probability(p_uncalib, EPSILON)

    field_values = np.stack([c + 1 for c in columns], axis=1)
    dataset = Dataset(schema=schema, labels=labels, p_uncalib=p_uncalib, field_values=field_values)
    logger.info("Generated %d samples over %d fields (%d distorted values)", config.sample_count, config.n_fields, len(distortion.assignment))
    return Generated(dataset, true_probs, effects, distortion, config)


def oracle_report(dataset: Dataset, true_probs: np.ndarray, fields: list[str] | None = None, m_values=(3, 10), complexity_bins: int = 3) -> MetricsReport:
    """
    Metrics of the true probabilities: the noise floor no calibrator can beat.

    Raises:
        ValueError: If true_probs is not aligned with the dataset
    """
    true_probs = np.asarray(true_probs, dtype=np.float64)
    if true_probs.shape != (len(dataset),):
        raise ValueError(f"Expected {len(dataset)} true probabilities, got shape {true_probs.shape}")
    return evaluate(dataset, true_probs, fields=fields, m_values=m_values, complexity_bins=complexity_bins)
