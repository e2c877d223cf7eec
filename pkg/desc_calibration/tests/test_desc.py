"""
Tests for the DESC model, its training loop and its variants.
"""

from __future__ import annotations

import json

import numpy as np
import pytest
from scipy.special import softmax

from desc_calibration.basis import BasisFamily, eval_family
from desc_calibration.calibrators import load_calibrator, save_calibrator
from desc_calibration.config import BasisPreset, DescConfig, Variant
from desc_calibration.data import BucketSpec, FieldSchema, Role
from desc_calibration.desc import (
    DescModel,
    ForwardResult,
    Inputs,
    check_gradients,
    holdout_split,
    micro_problem,
    negative_log_likelihood,
)
from desc_calibration.diffcore import Tape
from desc_calibration.errors import CheckpointError, ConfigError, DataError
from desc_calibration.io import checkpoint

from .helpers import make_dataset, random_dataset

EPS = 1e-6


def small_config(**overrides) -> DescConfig:
    values = {
        "embedding_dim": 4,
        "bucket_count": 5,
        "alloc_mlp_hidden": 8,
        "value_mlp1_hidden": 8,
        "batch_size": 32,
        "epochs": 3,
        "lr": 1e-2,
        "seed": 3,
        "basis": BasisPreset.REDUCED,
    }
    values.update(overrides)
    return DescConfig(**values)


def zero_parameters(model: DescModel) -> None:
    for name in model.store:
        model.store[name][...] = 0.0


def constant(tape: Tape, *arrays: np.ndarray) -> list:
    return [tape.constant(np.asarray(a, dtype=np.float64)) for a in arrays]


def reference_forward(model: DescModel, inputs: Inputs) -> np.ndarray:
    """Straight numpy evaluation of the full model, sample by sample."""
    store, d = model.store, model.config.embedding_dim

    def dense(name, x, relu=False):
        z = store[f"{name}.weight"] @ x + store[f"{name}.bias"]
        return np.maximum(z, 0.0) if relu else z

    out = []
    basis_rows = eval_family(model.family, inputs.t)
    for k in range(len(inputs)):
        b = store["embedding.bucket"][inputs.buckets[k]]
        es = [store[f"embedding.field.{name}"][inputs.fields[k, i]] for i, name in enumerate(model.schema.field_names)]
        shapes = []
        for i, e in enumerate(es):
            others = np.array([x for j, x in enumerate(es) if j != i])
            weights = softmax(others @ e / np.sqrt(d))
            alpha = softmax(dense("alloc.out", dense("alloc.hidden", np.concatenate([b, e, weights @ others]), relu=True)))
            shapes.append(alpha @ basis_rows[k])
        hidden = dense("value.hidden", np.concatenate([b, *es]), relu=True)
        value = np.exp(np.clip(dense("value.out", hidden)[0], -4.0, 4.0))
        psi = softmax(dense("attention.out", hidden))
        out.append(np.clip(psi @ np.array(shapes) * value, EPS, 1.0 - EPS))
    return np.array(out)


class TestEmbeddingAugmentation:
    """Tests for the self-attention augmentation of field embeddings."""

    def test_two_fields_returns_other_embedding(self):
        """Test that a single key gets all the attention."""
        model, _, _ = micro_problem()
        tape = Tape()
        es = constant(tape, [[0.3, -0.2]], [[1.5, 0.7]])

        assert np.array_equal(model.augment_embedding(tape, 0, es).value, [[1.5, 0.7]])
        assert np.array_equal(model.augment_embedding(tape, 1, es).value, [[0.3, -0.2]])

    def test_identical_embeddings(self):
        """Test that identical embeddings attend to themselves."""
        model, _, _ = micro_problem()
        tape = Tape()
        u = [[0.25, -0.5]]

        assert np.array_equal(model.augment_embedding(tape, 1, constant(tape, u, u, u)).value, u)

    def test_three_fields_by_hand(self):
        """Test softmax over the n - 1 scaled dot products."""
        model, _, _ = micro_problem()
        tape = Tape()
        es = constant(tape, [[1.0, 0.0]], [[0.0, 1.0]], [[1.0, 1.0]])

        weights = np.exp([0.0, 1.0 / np.sqrt(2.0)])
        weights /= weights.sum()
        expected = weights[0] * np.array([0.0, 1.0]) + weights[1] * np.array([1.0, 1.0])

        np.testing.assert_allclose(model.augment_embedding(tape, 0, es).value[0], expected, rtol=1e-14)

    def test_needs_two_fields(self):
        """Test that augmentation of a lone field is refused."""
        model, _, _ = micro_problem()
        tape = Tape()

        with pytest.raises(ValueError):
            model.augment_embedding(tape, 0, constant(tape, [[1.0, 0.0]]))


class TestShapeCalibrator:
    """Tests for allocation weights and single-field shapes."""

    def test_zero_parameters_give_uniform_allocation(self):
        """Test alpha = 1/m with all-zero parameters."""
        model, inputs, _ = micro_problem()
        zero_parameters(model)
        tape = Tape(model.store)
        b, es = model.embeddings(tape, inputs)

        alpha = model.shape_attention(tape, 1, b, es).value

        np.testing.assert_allclose(alpha, np.full((len(inputs), model.family.m), 1.0 / model.family.m), rtol=1e-15)

    def test_allocation_is_a_distribution(self):
        """Test that every alpha_i sums to 1."""
        model, inputs, _ = micro_problem(seed=4)
        tape = Tape(model.store)
        b, es = model.embeddings(tape, inputs)

        for i in range(model.n_fields):
            alpha = model.shape_attention(tape, i, b, es).value
            assert (alpha >= 0).all()
            np.testing.assert_allclose(alpha.sum(axis=-1), 1.0, rtol=0, atol=1e-12)

    def test_allocation_depends_on_bucket(self):
        """Test that moving a sample to another bucket changes alpha."""
        model, inputs, _ = micro_problem()
        one = inputs.take(np.array([0, 0]))
        moved = Inputs(one.t, np.array([0, model.buckets.bucket_count - 1]), one.fields)
        tape = Tape(model.store)
        b, es = model.embeddings(tape, moved)

        alpha = model.shape_attention(tape, 0, b, es).value

        assert not np.allclose(alpha[0], alpha[1])

    def test_identity_scaling_basis(self):
        """Test that all weight on sigmoid(1 * logit t) returns t."""
        family = BasisFamily.reduced()
        t = np.array([0.01, 0.3, 0.77])
        alpha = np.zeros((3, family.m))
        alpha[:, family.scaling_params.index(1.0) + 6] = 1.0
        tape = Tape()

        shape = DescModel.sfsc_forward(tape, *constant(tape, alpha, eval_family(family, t)))

        np.testing.assert_allclose(shape.value, t, rtol=1e-12)

    def test_average_of_identities(self):
        """Test that splitting weight between the identity power and scaling functions returns t."""
        family = BasisFamily.reduced()
        t = np.array([0.05, 0.5, 0.95])
        alpha = np.zeros((3, family.m))
        alpha[:, family.power_params.index(1.0)] = 0.5
        alpha[:, 6 + family.scaling_params.index(1.0)] = 0.5
        tape = Tape()

        shape = DescModel.sfsc_forward(tape, *constant(tape, alpha, eval_family(family, t)))

        np.testing.assert_allclose(shape.value, t, rtol=1e-12)

    def test_convex_combination_bounds(self):
        """Test that a random mixture at t = 0.5 lies between the extreme basis values."""
        family = BasisFamily.default()
        basis = eval_family(family, np.array([0.5]))
        alpha = np.random.default_rng(0).dirichlet(np.ones(family.m))[None, :]
        tape = Tape()

        shape = DescModel.sfsc_forward(tape, *constant(tape, alpha, basis)).value[0]

        assert basis.min() < shape < basis.max()


class TestValueCalibrator:
    """Tests for the value head and the global shape attention."""

    def test_zero_head_is_identity_scale(self):
        """Test V = 1 when the output layer is zero."""
        model, inputs, _ = micro_problem()
        model.store["value.out.weight"][...] = 0.0
        tape = Tape(model.store)
        b, es = model.embeddings(tape, inputs)

        _, value = model.value_forward(tape, b, es)

        assert np.array_equal(value.value, np.ones(len(inputs)))

    def test_large_logit_is_clamped(self):
        """Test raw = 10 -> V = e^4."""
        model, inputs, _ = micro_problem()
        model.store["value.out.weight"][...] = 0.0
        model.store["value.out.bias"][...] = 10.0
        tape = Tape(model.store)
        b, es = model.embeddings(tape, inputs)

        _, value = model.value_forward(tape, b, es)

        np.testing.assert_allclose(value.value, np.exp(4.0), rtol=1e-15)

    def test_bias_gradient_at_zero(self):
        """Test dV/d(bias) = 1 at raw = 0."""
        model, inputs, _ = micro_problem()
        model.store["value.out.weight"][...] = 0.0
        tape = Tape(model.store)
        b, es = model.embeddings(tape, inputs.take(np.array([0])))
        _, value = model.value_forward(tape, b, es)

        grads = tape.backward(tape.sum(value))

        np.testing.assert_allclose(grads["value.out.bias"], [1.0], rtol=1e-15)

    def test_zero_attention_is_uniform(self):
        """Test Psi = 1/n when the attention layer is zero."""
        model, inputs, _ = micro_problem()
        model.store["attention.out.weight"][...] = 0.0
        tape = Tape(model.store)
        b, es = model.embeddings(tape, inputs)
        hidden, _ = model.value_forward(tape, b, es)

        psi = model.global_shape_attention(tape, hidden).value

        np.testing.assert_allclose(psi, np.full((len(inputs), 3), 1.0 / 3.0), rtol=1e-15)

    def test_attention_is_a_distribution(self):
        """Test that Psi sums to 1 with random parameters."""
        model, inputs, _ = micro_problem(seed=6)
        tape = Tape(model.store)

        psi = model.forward(tape, inputs).psi.value

        np.testing.assert_allclose(psi.sum(axis=-1), 1.0, rtol=0, atol=1e-12)

    def test_single_field(self):
        """Test Psi = (1) and the augmentation fallback for one field."""
        dataset = random_dataset(40, seed=2, cardinalities=(3,))
        model = DescModel.build(dataset, small_config())

        result = model.forward(Tape(model.store), model.encode(dataset))

        assert not model.uses_augmentation
        assert model.alloc_input_width == 8
        assert np.array_equal(result.psi.value, np.ones((40, 1)))


class TestForward:
    """Tests for the full forward pass."""

    def test_identity_configuration(self):
        """Test that V = 1 and S_i = t give p_calib = t."""
        model, inputs, _ = micro_problem()
        family = model.family
        model.store["value.out.weight"][...] = 0.0
        model.store["alloc.out.weight"][...] = 0.0
        model.store["alloc.out.bias"][...] = 0.0
        model.store["alloc.out.bias"][6 + family.scaling_params.index(1.0)] = 60.0

        p = model.forward(Tape(model.store), inputs).p_calib.value

        np.testing.assert_allclose(p, np.clip(inputs.t, EPS, 1 - EPS), rtol=1e-10)

    def test_initial_shape_is_near_identity(self):
        """Test that a fresh model starts its shape mixture on the identity basis functions."""
        dataset = random_dataset(120, seed=10)
        model = DescModel.build(dataset, small_config())
        inputs = model.encode(dataset)

        shape = model.forward(Tape(model.store), inputs).shape.value

        assert model.family.identity_indices() == (1, 7)
        assert model.store["alloc.out.bias"][[1, 7]].tolist() == [8.0, 8.0]
        assert np.abs(shape - inputs.t).max() < 5e-3

    def test_product_is_clamped(self):
        """Test that S * V above 1 is clamped to 1 - eps."""
        model, inputs, _ = micro_problem()
        model.store["value.out.weight"][...] = 0.0
        model.store["value.out.bias"][...] = 10.0

        result = model.forward(Tape(model.store), inputs)

        raw = result.shape.value * result.value.value
        assert (raw > 1.0).any()
        assert np.array_equal(result.p_calib.value, np.clip(raw, EPS, 1 - EPS))
        assert result.p_calib.value.max() == 1 - EPS

    def test_matches_hand_computation(self):
        """Test a 2-field, d = 2, m = 3 model against a direct numpy evaluation."""
        schema = FieldSchema.from_tokens(["ad", "user"], [["x"], ["y", "z"]])
        config = DescConfig(embedding_dim=2, bucket_count=2, alloc_mlp_hidden=3, value_mlp1_hidden=3, seed=1)
        family = BasisFamily((1.0,), (1.0,), (2.0,))
        model = DescModel.initialize(config, schema, BucketSpec((0.5,)), family)
        rng = np.random.default_rng(12)
        for name in model.store:
            model.store[name][...] = rng.normal(scale=0.8, size=model.store[name].shape)
        inputs = Inputs(np.array([0.2, 0.5, 0.9]), np.array([0, 1, 1]), np.array([[1, 1], [1, 2], [0, 2]]))

        p = model.forward(Tape(model.store, record=False), inputs).p_calib.value

        np.testing.assert_allclose(p, reference_forward(model, inputs), rtol=1e-10)

    def test_output_bounded_for_large_parameters(self):
        """Test that p_calib stays in [eps, 1 - eps] with large parameters."""
        model, inputs, _ = micro_problem(seed=2)
        rng = np.random.default_rng(2)
        for name in model.store:
            model.store[name][...] = rng.uniform(-10.0, 10.0, size=model.store[name].shape)

        p = model.forward(Tape(model.store), inputs).p_calib.value

        assert np.isfinite(p).all()
        assert ((p >= EPS) & (p <= 1 - EPS)).all()

    def test_monotone_within_a_bucket(self):
        """Test that p_calib is non-decreasing in t when bucket and fields are fixed."""
        model, inputs, _ = micro_problem(seed=5)
        grid = np.linspace(0.01, 0.99, 200)
        fixed = Inputs(grid, np.full(200, inputs.buckets[0]), np.repeat(inputs.fields[:1], 200, axis=0))

        p = model.predict_inputs(fixed)

        assert (np.diff(p) >= 0).all()

    def test_schema_mismatch(self):
        """Test that scoring data with other fields raises DataError."""
        model, _, _ = micro_problem()

        with pytest.raises(DataError):
            model.predict(random_dataset(20))

    def test_apply_needs_fields(self):
        """Test that score-only application is refused."""
        model, _, _ = micro_problem()

        with pytest.raises(ConfigError):
            model.apply(np.array([0.5]))


class TestLoss:
    """Tests for the training objective."""

    @pytest.mark.parametrize(
        "labels, p, expected",
        [
            ([1], [0.5], np.log(2.0)),
            ([0], [0.5], np.log(2.0)),
            ([1, 0], [0.8, 0.4], (-np.log(0.8) - np.log(0.6)) / 2),
        ],
        ids=["positive", "negative", "batch"],
    )
    def test_values(self, labels, p, expected):
        """Test mean negative log-likelihood values."""
        tape = Tape()
        loss = DescModel.loss(tape, ForwardResult(tape.constant(np.array(p))), np.array(labels))

        assert float(loss.value) == pytest.approx(expected, rel=1e-12)
        assert negative_log_likelihood(np.array(p), np.array(labels)) == pytest.approx(expected, rel=1e-12)

    def test_confident_correct_prediction(self):
        """Test that y = 1 at p = 1 - eps costs almost nothing."""
        assert negative_log_likelihood(np.array([1 - EPS]), np.array([1])) < 2e-6

    def test_batch_example_value(self):
        """Test the 0.367 worked example."""
        assert negative_log_likelihood(np.array([0.8, 0.4]), np.array([1, 0])) == pytest.approx(0.367, abs=5e-4)

    def test_rejects_boundary_probability(self):
        """Test that p outside (0, 1) raises ValueError."""
        with pytest.raises(ValueError):
            negative_log_likelihood(np.array([1.0]), np.array([1]))


class TestTraining:
    """Tests for the training loop."""

    def test_zero_epochs_leave_model_unchanged(self):
        """Test that epochs = 0 only records the initial loss."""
        dataset = random_dataset(60, seed=1)
        model = DescModel.build(dataset, small_config(epochs=0))
        before = json.dumps(model.store.to_dict())

        model.fit(dataset)

        assert json.dumps(model.store.to_dict()) == before
        assert [r.epoch for r in model.trace.records] == [0]

    def test_final_loss_not_above_initial(self):
        """Test that training without a holdout does not end worse than it started on the training data."""
        dataset = random_dataset(200, seed=2)
        model = DescModel.build(dataset, small_config(epochs=4, validation_fraction=0.0))

        model.fit(dataset)

        trace = model.trace
        assert len(trace.records) == 5
        assert trace.final_loss <= trace.initial_loss
        assert negative_log_likelihood(model.predict(dataset), dataset.labels) == pytest.approx(trace.final_loss, rel=1e-12)
        assert trace.to_frame()["kept"].sum() == 1

    def test_kept_epoch_has_lowest_holdout_loss(self):
        """Test that the restored parameters are those with the lowest loss on the held-out rows."""
        dataset = random_dataset(200, seed=2)
        model = DescModel.build(dataset, small_config(epochs=4))

        model.fit(dataset)

        trace = model.trace
        holdout_losses = [r.holdout_loss for r in trace.records]
        _, held = holdout_split(200, 0.1, 3)
        assert trace.holdout_count == 20 and len(held) == 20
        assert trace.best_epoch == int(np.argmin(holdout_losses))
        assert trace.final_loss <= trace.initial_loss
        assert negative_log_likelihood(model.predict(dataset.take(held)), dataset.labels[held]) == pytest.approx(trace.final_loss, rel=1e-12)
        assert trace.to_frame()["holdout_loss"].notna().all()

    def test_no_holdout_without_restore(self):
        """Test that restore_best = False trains on every row and keeps the last epoch."""
        dataset = random_dataset(100, seed=6)
        model = DescModel.build(dataset, small_config(epochs=2, restore_best=False))

        model.fit(dataset)

        assert model.trace.holdout_count == 0
        assert model.trace.best_epoch == 2
        assert all(r.holdout_loss is None for r in model.trace.records)

    def test_holdout_split(self):
        """Test a seeded, disjoint and exhaustive split, and the cases that hold nothing out."""
        fit, held = holdout_split(50, 0.2, 7)
        again = holdout_split(50, 0.2, 7)

        assert len(held) == 10
        assert np.array_equal(np.sort(np.concatenate([fit, held])), np.arange(50))
        assert np.array_equal(fit, again[0]) and np.array_equal(held, again[1])
        assert np.all(np.diff(held) > 0)
        assert holdout_split(4, 0.1, 7)[1] is None
        assert holdout_split(50, 0.0, 7)[1] is None

    def test_learning_rate_decay(self):
        """Test that lr_decay leaves the first epoch alone and changes later ones."""
        dataset = random_dataset(100, seed=7)
        traces = []
        for decay in (1.0, 0.5):
            model = DescModel.build(dataset, small_config(epochs=2, lr_decay=decay)).fit(dataset)
            traces.append(model.trace.records)

        assert traces[0][1] == traces[1][1]
        assert traces[0][2].loss != traces[1][2].loss

    def test_training_reduces_value_miscalibration(self):
        """Test that a uniformly over-predicted dataset gets closer to its base rate."""
        rng = np.random.default_rng(3)
        p_true = rng.uniform(0.05, 0.3, size=400)
        labels = (rng.uniform(size=400) < p_true).astype(np.int64)
        dataset = make_dataset(labels, np.minimum(2.5 * p_true, 0.95), {"field0": ["a", "b"] * 200})
        model = DescModel.build(dataset, small_config(epochs=30, batch_size=64, lr=3e-2))

        model.fit(dataset)

        before = abs(dataset.p_uncalib.sum() / labels.sum() - 1.0)
        after = abs(model.predict(dataset).sum() / labels.sum() - 1.0)
        assert after < before

    def test_deterministic_checkpoints(self):
        """Test that the same seed and data give byte-identical checkpoints."""
        dataset = random_dataset(120, seed=4)

        documents = []
        for _ in range(2):
            model = DescModel.build(dataset, small_config()).fit(dataset)
            documents.append(checkpoint.dumps("desc", model.to_dict()))

        assert documents[0] == documents[1]

    def test_empty_dataset(self):
        """Test that training on no samples raises DataError."""
        dataset = random_dataset(30, seed=5)
        model = DescModel.build(dataset, small_config())

        with pytest.raises(DataError):
            model.fit(dataset.take(np.array([], dtype=np.int64)))


class TestVariants:
    """Tests for the ablation architectures."""

    def test_no_shape(self):
        """Test that the value-only model has no allocation or attention layers."""
        model, inputs, _ = micro_problem(variant=Variant.NO_SHAPE)

        result = model.forward(Tape(model.store), inputs)

        assert result.shape is None and result.psi is None
        assert not any(name.startswith(("alloc.", "attention.")) for name in model.store)

    def test_no_value(self):
        """Test that the shape-only model drops the value output head but keeps Psi."""
        model, inputs, _ = micro_problem(variant=Variant.NO_VALUE)

        result = model.forward(Tape(model.store), inputs)

        assert result.value is None
        assert "value.out.weight" not in model.store
        assert "attention.out.weight" in model.store
        assert np.array_equal(result.p_calib.value, np.clip(result.shape.value, EPS, 1 - EPS))

    def test_mean_pool(self):
        """Test that the mean-pooling ensemble fixes Psi = 1/n."""
        model, inputs, _ = micro_problem(variant=Variant.MEAN_POOL)

        psi = model.forward(Tape(model.store), inputs).psi.value

        assert np.array_equal(psi, np.full((len(inputs), 3), 1.0 / 3.0))
        assert "attention.out.weight" not in model.store

    @pytest.mark.parametrize("augmentation, width", [(True, 8), (False, 4)], ids=["augmented", "plain"])
    def test_no_bucket_input_width(self, augmentation, width):
        """Test that dropping the bucket feature narrows the allocation input to d or 2d."""
        dataset = random_dataset(50, seed=6)
        model = DescModel.build(dataset, small_config(use_augmentation=augmentation), Variant.NO_BUCKET)

        assert model.alloc_input_width == width
        assert model.store["alloc.hidden.weight"].shape == (8, width)
        assert model.store["value.hidden.weight"].shape == (8, 8)
        assert "embedding.bucket" not in model.store

    def test_no_augmentation_width(self):
        """Test the 2d allocation input without augmentation."""
        model, _, _ = micro_problem(variant=Variant.NO_AUGMENTATION)

        assert model.store["alloc.hidden.weight"].shape == (8, 8)

    @pytest.mark.parametrize("variant", list(Variant), ids=[v.value for v in Variant])
    def test_gradients(self, variant):
        """Test every variant's gradients against central differences."""
        report = check_gradients(seed=0, variant=variant)

        assert report.passed, report.to_dict()


class TestGradientCheck:
    """Tests for the full-model gradient check."""

    def test_full_model_passes(self):
        """Test that every parameter group of the full model passes at 1e-4."""
        model, _, _ = micro_problem()

        report = check_gradients(seed=0)

        assert report.passed, report.to_dict()
        assert set(report.errors) == set(model.store)

    def test_trainable_basis(self):
        """Test gradients of the basis hyperparameters."""
        report = check_gradients(seed=1, trainable_basis=True)

        assert report.passed, report.to_dict()
        assert {"basis.power", "basis.log", "basis.scaling"} <= set(report.errors)

    def test_corrupted_backward_fails(self):
        """Test that a falsified gradient is caught."""
        report = check_gradients(seed=0, corrupt="value.out.bias")

        assert not report.passed
        assert report.worst_parameter == "value.out.bias"


class TestCheckpoint:
    """Tests for DESC checkpoints."""

    def test_round_trip(self, tmp_path):
        """Test that a reloaded model predicts identically."""
        dataset = random_dataset(80, seed=7)
        model = DescModel.build(dataset, small_config(epochs=1)).fit(dataset)
        path = save_calibrator(tmp_path / "checkpoint.json", model)

        restored = load_calibrator(path)

        assert isinstance(restored, DescModel)
        assert restored.variant is Variant.FULL
        assert np.array_equal(restored.predict(dataset), model.predict(dataset))
        assert checkpoint.dumps("desc", restored.to_dict()) == checkpoint.dumps("desc", model.to_dict())

    def test_scores_other_role_with_model_schema(self, tmp_path):
        """Test that a test split indexed against the model schema can be scored."""
        dataset = random_dataset(80, seed=8)
        model = DescModel.build(dataset, small_config(epochs=0))
        test = dataset.with_role(Role.TEST)

        assert model.predict(test).shape == (80,)

    def test_trainable_family_written_from_parameters(self, tmp_path):
        """Test that a trainable basis is saved with the hyperparameters the model predicts with."""
        dataset = random_dataset(80, seed=9)
        model = DescModel.build(dataset, small_config(trainable_basis=True))
        model.store["basis.power"][...] = [0.4, 1.1, 2.5]
        model.store["basis.scaling"][...] = [0.7, 1.0, 3.0]

        family = model.to_dict()["family"]
        restored = load_calibrator(save_calibrator(tmp_path / "checkpoint.json", model))

        assert family["power_params"] == [0.4, 1.1, 2.5]
        assert family["log_params"] == [0.5, 2.0, 8.0]
        assert family["scaling_params"] == [0.7, 1.0, 3.0]
        assert restored.family.power_params == (0.4, 1.1, 2.5)
        assert np.array_equal(restored.predict(dataset), model.predict(dataset))

    def test_missing_parameter(self):
        """Test that a payload without a parameter raises CheckpointError."""
        model, _, _ = micro_problem()
        payload = model.to_dict()
        del payload["params"]["params"]["alloc.out.bias"]

        with pytest.raises(CheckpointError):
            DescModel.from_dict(payload)

    def test_wrong_shape(self):
        """Test that a misshapen parameter raises CheckpointError."""
        model, _, _ = micro_problem()
        payload = model.to_dict()
        payload["params"]["params"]["value.out.bias"] = {"shape": [2], "values": [0.0, 0.0]}

        with pytest.raises(CheckpointError):
            DescModel.from_dict(payload)

    def test_unknown_variant(self):
        """Test that an unknown variant raises CheckpointError."""
        model, _, _ = micro_problem()
        payload = model.to_dict()
        payload["variant"] = "no_everything"

        with pytest.raises(CheckpointError):
            DescModel.from_dict(payload)

