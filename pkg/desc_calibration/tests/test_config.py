"""
Tests for the run configuration and its overrides.
"""

from __future__ import annotations

import pytest

from desc_calibration.config import (
    PRESETS,
    BasisPreset,
    DescConfig,
    GenConfig,
    Method,
    MetricsConfig,
    RunConfig,
    Variant,
    benchmark_config,
    production_config,
)
from desc_calibration.errors import ConfigError


class TestRunConfig:
    """Tests for RunConfig construction and serialization."""

    def test_defaults(self):
        """Test the default method, seed and variant list."""
        config = RunConfig()

        assert config.method is Method.DESC
        assert config.seed == 42
        assert config.variants == [v.value for v in Variant]
        assert config.data.split_fractions == [0.5, 0.25, 0.25]
        assert config.metrics.ece_bins == [3, 10]

    def test_dict_round_trip(self):
        """Test that to_dict output rebuilds the same config."""
        config = benchmark_config()
        config.desc.basis = BasisPreset.REDUCED

        assert RunConfig.from_dict(config.to_dict()).to_dict() == config.to_dict()

    def test_to_dict_is_plain(self):
        """Test that enums serialize to their values."""
        d = RunConfig().to_dict()

        assert d["method"] == "desc"
        assert d["desc"]["basis"] == "default"
        assert d["desc"]["betas"] == [0.9, 0.999]

    def test_partial_update(self):
        """Test that update keeps keys it is not given."""
        config = RunConfig()

        config.update({"desc": {"epochs": 3}, "method": "platt"})

        assert config.desc.epochs == 3
        assert config.desc.embedding_dim == 16
        assert config.method is Method.PLATT

    @pytest.mark.parametrize(
        "document",
        [
            {"unknown": 1},
            {"desc": {"depth": 3}},
            {"desc": 4},
            {"method": "magic"},
            {"variants": ["full", "no_everything"]},
            {"desc": {"use_augmentation": "yes"}},
            {"desc": {"epochs": 2.5}},
            {"data": {"calibration_file": 3}},
        ],
        ids=["unknown-key", "unknown-nested", "section-not-object", "bad-method", "bad-variant", "bool-type", "int-type", "str-type"],
    )
    def test_rejects_invalid_documents(self, document):
        """Test that invalid config documents raise ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig.from_dict(document)


class TestOverrides:
    """Tests for `section.key=value` overrides."""

    @pytest.mark.parametrize(
        "assignment, path, expected",
        [
            ("desc.epochs=5", ("desc", "epochs"), 5),
            ("desc.lr=0.01", ("desc", "lr"), 0.01),
            ("desc.use_augmentation=false", ("desc", "use_augmentation"), False),
            ("gen.cardinalities=[4,3,2]", ("gen", "cardinalities"), [4, 3, 2]),
            ("data.fields=[\"field1\"]", ("data", "fields"), ["field1"]),
            ("data.data_dir=some/dir", ("data", "data_dir"), "some/dir"),
            ("seed=7", ("seed",), 7),
        ],
        ids=["int", "float", "bool", "list", "optional-list", "raw-string", "top-level"],
    )
    def test_apply(self, assignment, path, expected):
        """Test that values are parsed as JSON, falling back to plain strings."""
        config = RunConfig()

        config.apply_override(assignment)

        target = config
        for part in path:
            target = getattr(target, part)
        assert target == expected

    def test_enum_values(self):
        """Test that enum-typed keys accept their string values."""
        config = RunConfig()

        config.apply_override("method=hb")
        config.apply_override("desc.basis=reduced")

        assert config.method is Method.HB
        assert config.desc.basis is BasisPreset.REDUCED

    def test_int_accepted_for_float(self):
        """Test that an integer literal sets a float key."""
        config = RunConfig()

        config.apply_override("desc.lr=1")

        assert config.desc.lr == 1.0 and isinstance(config.desc.lr, float)

    @pytest.mark.parametrize(
        "assignment",
        ["desc.epochs", "model.epochs=3", "desc.depth=3", "desc.basis=huge", "method=boosting", "seed.value=1"],
        ids=["no-equals", "unknown-section", "unknown-key", "bad-enum", "bad-method", "not-a-section"],
    )
    def test_rejects(self, assignment):
        """Test that malformed overrides raise ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig().apply_override(assignment)


class TestValidation:
    """Tests for section validation."""

    @pytest.mark.parametrize(
        "overrides",
        [
            {"bucket_count": 1},
            {"embedding_dim": 0},
            {"batch_size": -1},
            {"epochs": -1},
            {"lr": 0.0},
            {"loss_epsilon": 0.01},
            {"lr_decay": 0.0},
            {"identity_prior": -1.0},
            {"validation_fraction": 0.5},
        ],
        ids=["buckets", "dim", "batch", "epochs", "lr", "epsilon", "decay", "prior", "holdout"],
    )
    def test_desc(self, overrides):
        """Test that out-of-range model settings raise ConfigError."""
        with pytest.raises(ConfigError):
            DescConfig(**overrides).validate()

    def test_desc_defaults_valid(self):
        """Test that the default and production settings validate."""
        DescConfig().validate()
        DescConfig.production().validate()

    @pytest.mark.parametrize(
        "config",
        [
            GenConfig(n_fields=2, cardinalities=[3]),
            GenConfig(n_fields=0, cardinalities=[]),
            GenConfig(n_fields=1, cardinalities=[0]),
            GenConfig(sample_count=0),
        ],
        ids=["count-mismatch", "no-fields", "zero-cardinality", "no-samples"],
    )
    def test_gen(self, config):
        """Test that invalid generator settings raise ConfigError."""
        with pytest.raises(ConfigError):
            config.validate()

    @pytest.mark.parametrize(
        "config",
        [
            MetricsConfig(ece_bins=[]),
            MetricsConfig(ece_bins=[0]),
            MetricsConfig(complexity_bins=1),
            MetricsConfig(competitors=["hb", "forest"]),
            MetricsConfig(sample_ratios=[0.0, 1.0]),
            MetricsConfig(sample_ratios=[1.5]),
        ],
        ids=["no-bins", "zero-bins", "complexity", "competitor", "zero-ratio", "large-ratio"],
    )
    def test_metrics(self, config):
        """Test that invalid metric settings raise ConfigError."""
        with pytest.raises(ConfigError):
            config.validate()

    def test_desc_from_dict(self):
        """Test the model section on its own."""
        config = DescConfig.from_dict({"basis": "reduced", "betas": [0.8, 0.99]})

        assert config.basis is BasisPreset.REDUCED
        assert config.betas == (0.8, 0.99)

        with pytest.raises(ConfigError):
            DescConfig.from_dict({"layers": 2})


class TestPresets:
    """Tests for the named presets."""

    def test_registry(self):
        """Test the preset names."""
        assert sorted(PRESETS) == ["benchmark", "default", "production"]

    def test_benchmark(self):
        """Test the synthetic benchmark settings."""
        config = benchmark_config()

        assert config.gen.cardinalities == [20, 10, 5]
        assert config.gen.sample_count == 300_000
        assert config.distortion.fields == ["field0"]
        assert config.distortion.value_biases == [0.5, 2.0]
        assert config.distortion.shape_exponents == [0.6, 1.6]
        assert [round(f * 300_000) for f in config.data.split_fractions] == [200_000, 50_000, 50_000]
        assert (config.desc.batch_size, config.desc.epochs, config.desc.seed) == (1024, 40, 42)

    def test_production(self):
        """Test the production model settings on benchmark data."""
        config = production_config()

        assert config.desc.embedding_dim == 128
        assert config.desc.batch_size == 16384
        assert config.desc.seed == config.seed
        assert config.gen.sample_count == 300_000

    def test_presets_are_fresh(self):
        """Test that each call returns an independent config."""
        first = PRESETS["benchmark"]()
        first.desc.epochs = 1

        assert PRESETS["benchmark"]().desc.epochs == 40
