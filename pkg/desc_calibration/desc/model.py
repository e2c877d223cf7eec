"""
The DESC calibrator.

For every field i a Single Field Shape Calibrator mixes the basis functions
with attention weights alpha_i computed from the pCTR bucket embedding, the
field embedding and its self-attention augmentation. A Global Shape Attention
Psi, produced from the value trunk's hidden layer, blends the per-field shapes
into S(x). The value head scales the blend by V(x) = exp(clip(raw, -4, 4)):

    p_calib = clip(S(x) * V(x), eps, 1 - eps)

Field embedding tables are shared by the shape and value parts, and the
allocation MLP is shared by all fields.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..baselines.base import Calibrator
from ..basis import BasisFamily, current_family, family_on_tape, register_params
from ..config import BasisPreset, DescConfig, Variant
from ..data.binning import BucketSpec, bucket_indices, fit_buckets
from ..data.dataset import Dataset, FieldSchema, clamp_probability
from ..diffcore import Node, ParamStore, Tape
from ..errors import CheckpointError, ConfigError, DataError, NumericError
from .training import TrainResult, train

logger = logging.getLogger(__name__)

BUCKET_TABLE = "embedding.bucket"
FIELD_TABLE_PREFIX = "embedding.field."
ALLOC_HIDDEN = "alloc.hidden"
ALLOC_OUT = "alloc.out"
VALUE_HIDDEN = "value.hidden"
VALUE_OUT = "value.out"
ATTENTION_OUT = "attention.out"
VALUE_LOGIT_BOUND = 4.0
PREDICT_CHUNK = 65536


@dataclass(frozen=True)
class Inputs:
    """Encoded model inputs for a batch of samples."""

    t: np.ndarray
    buckets: np.ndarray
    fields: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def take(self, indices: np.ndarray) -> Inputs:
        return Inputs(self.t[indices], self.buckets[indices], self.fields[indices])


@dataclass
class ForwardResult:
    """Calibrated scores plus the intermediates that produced them."""

    p_calib: Node
    shape: Node | None = None
    value: Node | None = None
    psi: Node | None = None
    alphas: list[Node] | None = None
    field_shapes: list[Node] | None = None


def family_for(config: DescConfig) -> BasisFamily:
    if config.basis is BasisPreset.REDUCED:
        return BasisFamily.reduced(trainable=config.trainable_basis)
    return BasisFamily.default(trainable=config.trainable_basis)


class DescModel(Calibrator):
    """DESC: basis-function shape calibration per field times a field-aware value correction."""

    kind = "desc"

    def __init__(
        self,
        config: DescConfig,
        schema: FieldSchema,
        buckets: BucketSpec,
        family: BasisFamily,
        store: ParamStore,
        variant: Variant | str = Variant.FULL,
    ):
        self.config = config
        self.schema = schema
        self.buckets = buckets
        self.family = family
        self.store = store
        self.variant = Variant(variant)
        self.trace: TrainResult | None = None
        if self.n_fields == 1 and config.use_augmentation and self.variant is not Variant.NO_AUGMENTATION:
            logger.info("Single-field schema: embedding augmentation skipped")

    # -- construction ------------------------------------------------------------

    @staticmethod
    def initialize(
        config: DescConfig,
        schema: FieldSchema,
        buckets: BucketSpec,
        family: BasisFamily | None = None,
        variant: Variant | str = Variant.FULL,
    ) -> DescModel:
        """Fresh model with parameters drawn from the config seed."""
        config.validate()
        model = DescModel(config, schema, buckets, family or family_for(config), ParamStore(), variant)
        rng = np.random.default_rng(config.seed)
        store, d = model.store, config.embedding_dim
        if model.uses_bucket:
            store.init_embedding(BUCKET_TABLE, buckets.bucket_count, d, rng)
        for name, size in zip(schema.field_names, schema.vocab_sizes):
            store.init_embedding(FIELD_TABLE_PREFIX + name, size, d, rng)
        if model.uses_shape:
            register_params(store, model.family)
            store.init_dense(ALLOC_HIDDEN, model.alloc_input_width, config.alloc_mlp_hidden, rng)
            store.init_dense(ALLOC_OUT, config.alloc_mlp_hidden, model.family.m, rng)
            # Start the shape mixture near the identity
            store[ALLOC_OUT + ".bias"][list(model.family.identity_indices())] = config.identity_prior
        store.init_dense(VALUE_HIDDEN, model.value_input_width, config.value_mlp1_hidden, rng)
        if model.variant is not Variant.NO_VALUE:
            store.init_dense(VALUE_OUT, config.value_mlp1_hidden, 1, rng)
        if model.uses_shape and model.variant is not Variant.MEAN_POOL:
            store.init_dense(ATTENTION_OUT, config.value_mlp1_hidden, model.n_fields, rng)
        return model

    @staticmethod
    def build(dataset: Dataset, config: DescConfig, variant: Variant | str = Variant.FULL) -> DescModel:
        """Fit pCTR buckets on the calibration data and initialize a model for its schema."""
        buckets = fit_buckets(dataset, config.bucket_count, config.bucket_mode)
        return DescModel.initialize(config, dataset.schema, buckets, variant=variant)

    # -- architecture ------------------------------------------------------------

    @property
    def n_fields(self) -> int:
        return self.schema.n_fields

    @property
    def uses_bucket(self) -> bool:
        return self.variant is not Variant.NO_BUCKET

    @property
    def uses_shape(self) -> bool:
        return self.variant is not Variant.NO_SHAPE

    @property
    def uses_augmentation(self) -> bool:
        return self.config.use_augmentation and self.variant is not Variant.NO_AUGMENTATION and self.n_fields >= 2

    @property
    def alloc_input_width(self) -> int:
        return self.config.embedding_dim * (int(self.uses_bucket) + 1 + int(self.uses_augmentation))

    @property
    def value_input_width(self) -> int:
        return self.config.embedding_dim * (int(self.uses_bucket) + self.n_fields)

    @property
    def fitted(self) -> bool:
        return True

    # -- forward pieces ------------------------------------------------------------

    def encode(self, dataset: Dataset) -> Inputs:
        """
        Model inputs for a dataset.

        Raises:
            DataError: If the dataset schema differs from the model's
        """
        if dataset.schema != self.schema:
            raise DataError(f"Dataset fields {list(dataset.schema.field_names)} do not match the model schema {list(self.schema.field_names)}")
        t = clamp_probability(dataset.p_uncalib)
        return Inputs(t, bucket_indices(self.buckets, t), np.asarray(dataset.field_values))

    def embeddings(self, tape: Tape, inputs: Inputs) -> tuple[Node | None, list[Node]]:
        b = tape.embed(BUCKET_TABLE, inputs.buckets) if self.uses_bucket else None
        es = [tape.embed(FIELD_TABLE_PREFIX + name, inputs.fields[:, i]) for i, name in enumerate(self.schema.field_names)]
        return b, es

    def augment_embedding(self, tape: Tape, i: int, es: list[Node]) -> Node:
        """Self-attention of field i over the other fields: softmax over the n - 1 scaled dot products."""
        if len(es) < 2:
            raise ValueError("Embedding augmentation needs at least two fields")
        others = [e for j, e in enumerate(es) if j != i]
        return tape.attend(es[i], tape.stack(others, axis=1))

    def shape_attention(self, tape: Tape, i: int, b: Node | None, es: list[Node]) -> Node:
        """Allocation weights alpha_i over the basis functions, shape (B, m)."""
        parts = ([b] if b is not None else []) + [es[i]]
        if self.uses_augmentation:
            parts.append(self.augment_embedding(tape, i, es))
        hidden = tape.dense(ALLOC_HIDDEN, tape.concat(parts), "relu")
        return tape.softmax(tape.dense(ALLOC_OUT, hidden))

    @staticmethod
    def sfsc_forward(tape: Tape, alpha: Node, basis: Node) -> Node:
        """Single field shape score S_i = sum_j alpha_j B_j(t)."""
        return tape.sum(tape.mul(alpha, basis), axis=-1)

    def value_hidden(self, tape: Tape, b: Node | None, es: list[Node]) -> Node:
        parts = ([b] if b is not None else []) + es
        return tape.dense(VALUE_HIDDEN, tape.concat(parts), "relu")

    def value_logit(self, tape: Tape, hidden: Node) -> Node:
        raw = tape.dense(VALUE_OUT, hidden)
        return tape.reshape(raw, (raw.shape[0],))

    def value_forward(self, tape: Tape, b: Node | None, es: list[Node]) -> tuple[Node, Node]:
        """(hidden layer, V(x)) with V = exp(clip(raw, -4, 4))."""
        hidden = self.value_hidden(tape, b, es)
        raw = self.value_logit(tape, hidden)
        return hidden, tape.exp(tape.clip(raw, -VALUE_LOGIT_BOUND, VALUE_LOGIT_BOUND))

    def global_shape_attention(self, tape: Tape, hidden: Node) -> Node:
        """Psi over the fields, shape (B, n); uniform for the mean-pooling variant."""
        if self.variant is Variant.MEAN_POOL:
            return tape.constant(np.full((hidden.shape[0], self.n_fields), 1.0 / self.n_fields))
        return tape.softmax(tape.dense(ATTENTION_OUT, hidden))

    def forward(self, tape: Tape, inputs: Inputs) -> ForwardResult:
        """
        Calibrated scores of a batch.

        Raises:
            NumericError: If any score is not finite
        """
        eps = self.config.loss_epsilon
        b, es = self.embeddings(tape, inputs)

        if not self.uses_shape:
            raw = self.value_logit(tape, self.value_hidden(tape, b, es))
            p = tape.clip(tape.sigmoid(raw), eps, 1.0 - eps)
            result = ForwardResult(p)
        else:
            basis = family_on_tape(tape, self.family, inputs.t)
            alphas = [self.shape_attention(tape, i, b, es) for i in range(self.n_fields)]
            shapes = [self.sfsc_forward(tape, alpha, basis) for alpha in alphas]
            if self.variant is Variant.NO_VALUE:
                hidden, value = self.value_hidden(tape, b, es), None
            else:
                hidden, value = self.value_forward(tape, b, es)
            psi = self.global_shape_attention(tape, hidden)
            shape = tape.sum(tape.mul(psi, tape.stack(shapes, axis=-1)), axis=-1)
            score = shape if value is None else tape.mul(shape, value)
            result = ForwardResult(tape.clip(score, eps, 1.0 - eps), shape, value, psi, alphas, shapes)

        if not np.isfinite(result.p_calib.value).all():
            raise NumericError("DESC forward produced non-finite scores")
        return result

    @staticmethod
    def loss(tape: Tape, result: ForwardResult, labels: np.ndarray) -> Node:
        """Mean negative log-likelihood of the batch."""
        return tape.binary_cross_entropy(result.p_calib, labels)

    # -- calibrator interface -----------------------------------------------------------

    def fit(self, dataset: Dataset) -> DescModel:
        """Train on a calibration dataset (buckets must already be fitted)."""
        self.trace = train(self, dataset)
        return self

    def predict_inputs(self, inputs: Inputs) -> np.ndarray:
        out = np.empty(len(inputs))
        for start in range(0, len(inputs), PREDICT_CHUNK):
            chunk = inputs.take(np.arange(start, min(start + PREDICT_CHUNK, len(inputs))))
            out[start : start + len(chunk)] = self.forward(Tape(self.store, record=False), chunk).p_calib.value
        return out

    def predict(self, dataset: Dataset) -> np.ndarray:
        return self.predict_inputs(self.encode(dataset))

    def apply(self, p_uncalib: np.ndarray) -> np.ndarray:
        raise ConfigError("DESC needs field values; call predict(dataset)")

    # -- checkpoint --------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "variant": self.variant.value,
            "config": self.config.to_dict(),
            "schema": self.schema.to_dict(),
            "buckets": self.buckets.to_dict(),
            "family": current_family(self.store, self.family).to_dict(),
            "params": self.store.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> DescModel:
        """
        Rebuild a model from a checkpoint payload.

        Raises:
            CheckpointError: If parameters are missing or misshapen
        """
        try:
            config = DescConfig.from_dict(d["config"])
            schema = FieldSchema.from_dict(d["schema"])
            buckets = BucketSpec.from_dict(d["buckets"])
            family = BasisFamily.from_dict(d["family"])
            variant = Variant(d["variant"])
            store = ParamStore.from_dict(d["params"])
        except (KeyError, ValueError, ConfigError, DataError) as e:
            raise CheckpointError(f"Invalid DESC checkpoint: {e}") from e
        expected = DescModel.initialize(config, schema, buckets, family, variant).store
        if set(expected) != set(store):
            raise CheckpointError(f"DESC checkpoint parameters {sorted(store)} do not match the architecture {sorted(expected)}")
        for name in expected:
            if expected[name].shape != store[name].shape:
                raise CheckpointError(f"Parameter '{name}' has shape {store[name].shape}, expected {expected[name].shape}")
        return DescModel(config, schema, buckets, family, store, variant)
