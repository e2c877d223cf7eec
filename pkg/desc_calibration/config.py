"""
Run configuration.

Every section is a dataclass with defaults, `from_dict` and `to_dict`; a
RunConfig bundles them and accepts flat `section.key=value` overrides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any

from .errors import ConfigError


class Method(str, Enum):
    """Calibration methods selectable with --method."""

    DESC = "desc"
    HB = "hb"
    IR = "ir"
    PLATT = "platt"
    TEMP = "temp"
    SIR = "sir"
    SCALEBIN = "scalebin"
    IDENTITY = "identity"


class Variant(str, Enum):
    """DESC architecture variants (the full model plus its ablations)."""

    FULL = "full"
    NO_SHAPE = "no_shape"
    NO_VALUE = "no_value"
    MEAN_POOL = "mean_pool_ensemble"
    NO_BUCKET = "no_bucket_feature"
    NO_AUGMENTATION = "no_augmentation"


class BasisPreset(str, Enum):
    """Named basis families."""

    DEFAULT = "default"  # 16 power + 16 log + 16 scaling
    REDUCED = "reduced"  # 3 + 3 + 3


@dataclass
class DescConfig:
    """Architecture and training settings of the DESC calibrator."""

    embedding_dim: int = 16
    bucket_count: int = 100
    bucket_mode: str = "quantile"
    alloc_mlp_hidden: int = 64
    value_mlp1_hidden: int = 64
    batch_size: int = 4096
    epochs: int = 10
    lr: float = 1e-3
    # Learning rate of epoch e is lr * lr_decay ** (e - 1)
    lr_decay: float = 1.0
    betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    seed: int = 0
    use_augmentation: bool = True
    loss_epsilon: float = 1e-6
    basis: BasisPreset = BasisPreset.DEFAULT
    trainable_basis: bool = False
    # Initial allocation logit of the identity basis functions (power 1, scaling 1)
    identity_prior: float = 8.0
    # Restore the parameters of the epoch with the lowest selection loss
    restore_best: bool = True
    # Share of the calibration rows held out to select the restored epoch (0 selects on training loss)
    validation_fraction: float = 0.1

    def __post_init__(self):
        self.basis = BasisPreset(self.basis)
        self.betas = tuple(self.betas)

    def validate(self) -> None:
        counts = ("embedding_dim", "bucket_count", "alloc_mlp_hidden", "value_mlp1_hidden", "batch_size")
        for name in counts:
            if getattr(self, name) <= 0:
                raise ConfigError(f"desc.{name} must be positive, got {getattr(self, name)}")
        if self.epochs < 0:
            raise ConfigError(f"desc.epochs must be >= 0, got {self.epochs}")
        if self.bucket_count < 2:
            raise ConfigError(f"desc.bucket_count must be >= 2, got {self.bucket_count}")
        if not 0.0 < self.loss_epsilon < 1e-3:
            raise ConfigError(f"desc.loss_epsilon must be in (0, 1e-3), got {self.loss_epsilon}")
        if self.lr <= 0.0:
            raise ConfigError(f"desc.lr must be positive, got {self.lr}")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ConfigError(f"desc.lr_decay must be in (0, 1], got {self.lr_decay}")
        if self.identity_prior < 0.0:
            raise ConfigError(f"desc.identity_prior must be >= 0, got {self.identity_prior}")
        if not 0.0 <= self.validation_fraction < 0.5:
            raise ConfigError(f"desc.validation_fraction must be in [0, 0.5), got {self.validation_fraction}")

    def to_dict(self) -> dict[str, Any]:
        return _to_plain(self)

    @staticmethod
    def from_dict(d: dict[str, Any]) -> DescConfig:
        config = DescConfig()
        _update(config, d, "desc")
        config.__post_init__()
        return config

    @staticmethod
    def production() -> DescConfig:
        """Production settings reported for the method (d = 128, batch 16384)."""
        return DescConfig(embedding_dim=128, batch_size=16384)


@dataclass
class GenConfig:
    """Synthetic dataset generation settings."""

    n_fields: int = 3
    cardinalities: list[int] = field(default_factory=lambda: [20, 10, 5])
    base_logit: float = -2.0
    field_effect_scale: float = 0.5
    sample_count: int = 100_000
    seed: int = 42

    def validate(self) -> None:
        if self.n_fields < 1 or len(self.cardinalities) != self.n_fields:
            raise ConfigError(f"gen.cardinalities must list one count per field ({self.n_fields}), got {self.cardinalities}")
        if any(c < 1 for c in self.cardinalities):
            raise ConfigError(f"gen.cardinalities must be >= 1, got {self.cardinalities}")
        if self.sample_count < 1:
            raise ConfigError(f"gen.sample_count must be >= 1, got {self.sample_count}")


@dataclass
class DistortionConfig:
    """Per-value miscalibration applied by the generator.

    Every value of each listed field receives, round-robin over the Cartesian
    product of `value_biases` x `shape_exponents`, one (bias, exponent) pair.
    `overrides` entries `{"field", "value", "value_bias", "shape_exponent"}`
    replace individual assignments.
    """

    fields: list[str] = field(default_factory=lambda: ["field0"])
    value_biases: list[float] = field(default_factory=lambda: [0.5, 2.0])
    shape_exponents: list[float] = field(default_factory=lambda: [0.6, 1.6])
    overrides: list[dict[str, Any]] = field(default_factory=list)


@dataclass
class DataConfig:
    """Dataset locations and split settings."""

    data_dir: str = "data"
    calibration_file: str = "validation.csv"
    test_file: str = "test.csv"
    split_fractions: list[float] = field(default_factory=lambda: [0.5, 0.25, 0.25])
    # Fields to evaluate (None = every field of the schema)
    fields: list[str] | None = None


@dataclass
class BaselineConfig:
    """Settings of the reference calibrators."""

    histogram_bins: int = 100
    histogram_mode: str = "quantile"
    scalebin_bins: int = 100


@dataclass
class MetricsConfig:
    """Metric settings."""

    ece_bins: list[int] = field(default_factory=lambda: [3, 10])
    bin_mode: str = "quantile"
    complexity_bins: int = 3
    reliability_bins: int = 10
    # Down-sampling ratios of the calibration split used by `analyze`
    sample_ratios: list[float] = field(default_factory=lambda: [0.1, 0.25, 0.5, 1.0])
    # Competitors compared against DESC per field value by `analyze`
    competitors: list[str] = field(default_factory=lambda: ["hb", "ir", "platt", "sir"])

    def validate(self) -> None:
        if not self.ece_bins or any(m < 1 for m in self.ece_bins):
            raise ConfigError(f"metrics.ece_bins must be positive, got {self.ece_bins}")
        if self.complexity_bins < 2:
            raise ConfigError(f"metrics.complexity_bins must be > 1, got {self.complexity_bins}")
        known = {m.value for m in Method}
        unknown = [c for c in self.competitors if c not in known]
        if unknown:
            raise ConfigError(f"metrics.competitors has unknown methods {unknown}")
        if any(not 0.0 < r <= 1.0 for r in self.sample_ratios):
            raise ConfigError(f"metrics.sample_ratios must lie in (0, 1], got {self.sample_ratios}")


@dataclass
class RunConfig:
    """Everything a CLI command needs."""

    seed: int = 42
    method: Method = Method.DESC
    variants: list[str] = field(default_factory=lambda: [v.value for v in Variant])
    data: DataConfig = field(default_factory=DataConfig)
    gen: GenConfig = field(default_factory=GenConfig)
    distortion: DistortionConfig = field(default_factory=DistortionConfig)
    desc: DescConfig = field(default_factory=DescConfig)
    baselines: BaselineConfig = field(default_factory=BaselineConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)

    def __post_init__(self):
        try:
            self.method = Method(self.method)
            for variant in self.variants:
                Variant(variant)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def validate(self) -> None:
        self.desc.validate()
        self.gen.validate()
        self.metrics.validate()

    @staticmethod
    def from_dict(d: dict[str, Any]) -> RunConfig:
        """Create a config from a dictionary (unknown keys are rejected)."""
        config = RunConfig()
        config.update(d)
        return config

    def update(self, d: dict[str, Any]) -> None:
        """Overlay a (possibly partial) config dictionary."""
        _update(self, d, "")
        self.__post_init__()
        self.desc.__post_init__()

    def to_dict(self) -> dict[str, Any]:
        """Convert config to a JSON-ready dictionary."""
        return _to_plain(self)

    def apply_override(self, assignment: str) -> None:
        """Apply one `section.key=value` override (value parsed as JSON when possible)."""
        if "=" not in assignment:
            raise ConfigError(f"Override must look like key=value, got '{assignment}'")
        key, raw = assignment.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        target: Any = self
        parts = key.strip().split(".")
        for part in parts[:-1]:
            if not _is_section(target, part):
                raise ConfigError(f"Unknown config section '{part}' in override '{assignment}'")
            target = getattr(target, part)
        _update(target, {parts[-1]: value}, ".".join(parts[:-1]))
        self.__post_init__()
        self.desc.__post_init__()


def _is_section(target: Any, name: str) -> bool:
    return hasattr(target, "__dataclass_fields__") and name in target.__dataclass_fields__ and hasattr(getattr(target, name), "__dataclass_fields__")


def _update(target: Any, d: dict[str, Any], path: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"Config section '{path or '<root>'}' must be an object")
    known = {f.name for f in fields(target)}
    for key, value in d.items():
        where = f"{path}.{key}" if path else key
        if key not in known:
            raise ConfigError(f"Unknown config key '{where}'")
        current = getattr(target, key)
        if hasattr(current, "__dataclass_fields__"):
            _update(current, value, where)
        elif isinstance(current, Enum):
            try:
                setattr(target, key, type(current)(value))
            except ValueError as e:
                raise ConfigError(f"Invalid value for '{where}': {e}") from e
        elif isinstance(current, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"'{where}' expects true/false, got {value!r}")
            setattr(target, key, value)
        elif isinstance(current, int) and not isinstance(value, bool) and isinstance(value, (int, float)) and float(value).is_integer():
            setattr(target, key, int(value))
        elif isinstance(current, float) and not isinstance(value, bool) and isinstance(value, (int, float)):
            setattr(target, key, float(value))
        elif isinstance(current, tuple) and isinstance(value, list):
            setattr(target, key, tuple(value))
        elif current is None or isinstance(value, type(current)):
            setattr(target, key, value)
        else:
            raise ConfigError(f"'{where}' expects {type(current).__name__}, got {value!r}")


def _to_plain(value: Any) -> Any:
    if hasattr(value, "__dataclass_fields__"):
        return {f.name: _to_plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _to_plain(v) for k, v in value.items()}
    return value


def benchmark_config() -> RunConfig:
    """The seeded synthetic recovery benchmark: 3 fields (20/10/5 values), 200k/50k/50k samples."""
    config = RunConfig(seed=42)
    config.gen = GenConfig(n_fields=3, cardinalities=[20, 10, 5], sample_count=300_000, seed=42)
    config.distortion = DistortionConfig(fields=["field0"], value_biases=[0.5, 2.0], shape_exponents=[0.6, 1.6])
    config.data.split_fractions = [4 / 6, 1 / 6, 1 / 6]
    config.desc = DescConfig(batch_size=1024, epochs=40, lr=5e-3, lr_decay=0.93, seed=42)
    return config


def production_config() -> RunConfig:
    """Benchmark data with the production model settings."""
    config = benchmark_config()
    config.desc = DescConfig.production()
    config.desc.seed = config.seed
    return config


PRESETS = {
    "default": RunConfig,
    "benchmark": benchmark_config,
    "production": production_config,
}
