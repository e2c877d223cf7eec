"""
Dataset representation and CSV ingestion.

A dataset is stored column-wise (labels, uncalibrated scores and one vocabulary
index per field) and frozen after construction. Index 0 of every field
vocabulary is reserved for out-of-vocabulary values.
"""

from __future__ import annotations

import io
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from ..errors import ConfigError, DataError

logger = logging.getLogger(__name__)

EPSILON = 1e-6
OOV_INDEX = 0
OOV_TOKEN = "<oov>"
FIELD_PREFIX = "f_"
LABEL_COLUMN = "label"
SCORE_COLUMN = "p_uncalib"


class Role(str, Enum):
    """Role of a dataset split."""

    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


def clamp_probability(p: np.ndarray | float, epsilon: float = EPSILON) -> np.ndarray:
    """Clamp probabilities into [epsilon, 1 - epsilon]."""
    return np.clip(np.asarray(p, dtype=np.float64), epsilon, 1.0 - epsilon)


@dataclass(frozen=True)
class Sample:
    """One labeled impression."""

    label: int
    p_uncalib: float
    field_values: tuple[int, ...]


@dataclass(frozen=True)
class FieldSchema:
    """Field names and their vocabularies (token 0 is the OOV token)."""

    field_names: tuple[str, ...]
    vocabularies: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.field_names) == 0:
            raise DataError("A schema needs at least one field")
        if len(set(self.field_names)) != len(self.field_names):
            raise DataError(f"Field names must be unique: {list(self.field_names)}")
        if len(self.vocabularies) != len(self.field_names):
            raise DataError("One vocabulary per field is required")
        for name, vocab in zip(self.field_names, self.vocabularies):
            if len(vocab) < 2:
                raise DataError(f"Field '{name}' needs OOV plus at least one value, got vocab size {len(vocab)}")

    @property
    def n_fields(self) -> int:
        return len(self.field_names)

    @property
    def vocab_sizes(self) -> tuple[int, ...]:
        return tuple(len(vocab) for vocab in self.vocabularies)

    def field_index(self, name: str) -> int:
        """Position of a field, accepting names with or without the `f_` prefix."""
        if name in self.field_names:
            return self.field_names.index(name)
        if name.startswith(FIELD_PREFIX) and name[len(FIELD_PREFIX) :] in self.field_names:
            return self.field_names.index(name[len(FIELD_PREFIX) :])
        raise DataError(f"Unknown field '{name}'; known fields: {list(self.field_names)}")

    def lookup(self, field_position: int) -> dict[str, int]:
        """Token -> index map for one field (the OOV token is not mapped)."""
        return {token: i for i, token in enumerate(self.vocabularies[field_position]) if i != OOV_INDEX}

    @staticmethod
    def from_tokens(field_names: Sequence[str], tokens: Sequence[Sequence[str]]) -> FieldSchema:
        """Build a schema from the real tokens of every field (OOV is prepended)."""
        return FieldSchema(
            field_names=tuple(field_names),
            vocabularies=tuple((OOV_TOKEN, *(str(t) for t in field_tokens)) for field_tokens in tokens),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "field_names": list(self.field_names),
            "vocabularies": [list(vocab) for vocab in self.vocabularies],
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> FieldSchema:
        return FieldSchema(
            field_names=tuple(d["field_names"]),
            vocabularies=tuple(tuple(vocab) for vocab in d["vocabularies"]),
        )


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-typed, immutable table of samples."""

    schema: FieldSchema
    labels: np.ndarray
    p_uncalib: np.ndarray
    field_values: np.ndarray
    role: Role = Role.TRAIN

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        p_uncalib = np.asarray(self.p_uncalib, dtype=np.float64).reshape(-1)
        field_values = np.asarray(self.field_values, dtype=np.int64)
        if field_values.ndim != 2 or field_values.shape[1] != self.schema.n_fields:
            raise DataError(f"field_values must have shape (N, {self.schema.n_fields}), got {field_values.shape}")
        if not (len(labels) == len(p_uncalib) == len(field_values)):
            raise DataError("labels, p_uncalib and field_values must have the same length")
        if not np.isin(labels, (0, 1)).all():
            raise DataError("Labels must be 0 or 1")
        if len(p_uncalib) and not ((p_uncalib > 0.0) & (p_uncalib < 1.0)).all():
            raise DataError("p_uncalib must lie strictly inside (0, 1)")
        sizes = np.asarray(self.schema.vocab_sizes, dtype=np.int64)
        if len(field_values) and ((field_values < 0) | (field_values >= sizes)).any():
            raise DataError("A field index is outside its vocabulary")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "p_uncalib", _frozen(p_uncalib))
        object.__setattr__(self, "field_values", _frozen(field_values))
        object.__setattr__(self, "role", Role(self.role))

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i: int) -> Sample:
        return Sample(
            label=int(self.labels[i]),
            p_uncalib=float(self.p_uncalib[i]),
            field_values=tuple(int(v) for v in self.field_values[i]),
        )

    @property
    def samples(self) -> Iterator[Sample]:
        return (self[i] for i in range(len(self)))

    @property
    def n_fields(self) -> int:
        return self.schema.n_fields

    def take(self, indices: np.ndarray, role: Role | None = None) -> Dataset:
        """Sub-dataset with the given rows (in the given order)."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            schema=self.schema,
            labels=self.labels[indices],
            p_uncalib=self.p_uncalib[indices],
            field_values=self.field_values[indices],
            role=self.role if role is None else role,
        )

    def with_scores(self, p_uncalib: np.ndarray) -> Dataset:
        """Same samples with a replaced score column."""
        return Dataset(self.schema, self.labels, clamp_probability(p_uncalib), self.field_values, self.role)

    def with_role(self, role: Role) -> Dataset:
        return Dataset(self.schema, self.labels, self.p_uncalib, self.field_values, role)


def _numeric_column(frame: pd.DataFrame, column: str, path: Path) -> np.ndarray:
    values = pd.to_numeric(frame[column], errors="coerce")
    bad = values.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0]) + 2
        raise DataError(f"{path}: non-numeric {column} '{frame[column].iloc[row - 2]}' on line {row}")
    return values.to_numpy(dtype=np.float64)


def read_frame(path: str | Path) -> pd.DataFrame:
    """Read a dataset CSV as strings (no NA conversion)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"Dataset file not found: {path}")
    return pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")


def load_csv(
    path: str | Path,
    schema_hint: Sequence[str] | None = None,
    role: Role | str = Role.TRAIN,
    schema: FieldSchema | None = None,
) -> Dataset:
    """
    Load a dataset CSV.

    Args:
        path: CSV file with `label`, `p_uncalib` and one or more `f_<name>` columns
        schema_hint: Optional field names (with or without prefix) to load, in this order
        role: Split role; vocabularies are built only for the train role
        schema: Existing schema to index against (required unless role is train)

    Returns:
        The loaded Dataset

    Raises:
        DataError: If a required column is missing or a value is invalid
    """
    path = Path(path)
    role = Role(role)
    frame = read_frame(path)

    for column in (LABEL_COLUMN, SCORE_COLUMN):
        if column not in frame.columns:
            raise DataError(f"{path}: missing required column '{column}'")
    field_columns = [c for c in frame.columns if c.startswith(FIELD_PREFIX)]
    if schema_hint is not None:
        wanted = [h if h.startswith(FIELD_PREFIX) else FIELD_PREFIX + h for h in schema_hint]
        for column in wanted:
            if column not in frame.columns:
                raise DataError(f"{path}: missing field column '{column}'")
        field_columns = wanted
    elif schema is not None:
        field_columns = [FIELD_PREFIX + name for name in schema.field_names]
        for column in field_columns:
            if column not in frame.columns:
                raise DataError(f"{path}: missing field column '{column}' required by the schema")
    if not field_columns:
        raise DataError(f"{path}: no field column (prefixed '{FIELD_PREFIX}')")

    labels = _numeric_column(frame, LABEL_COLUMN, path)
    if not np.isin(labels, (0.0, 1.0)).all():
        raise DataError(f"{path}: label values must be 0 or 1")
    p_uncalib = clamp_probability(_numeric_column(frame, SCORE_COLUMN, path))

    names = [c[len(FIELD_PREFIX) :] for c in field_columns]
    if schema is None:
        if role is not Role.TRAIN:
            raise DataError(f"{path}: a {role.value} split needs the schema built from the train split")
        tokens = [pd.unique(frame[c]) for c in field_columns]
        schema = FieldSchema.from_tokens(names, tokens)
    elif list(schema.field_names) != names:
        raise DataError(f"{path}: fields {names} do not match schema fields {list(schema.field_names)}")

    columns = []
    for position, column in enumerate(field_columns):
        lookup = schema.lookup(position)
        columns.append(frame[column].map(lookup).fillna(OOV_INDEX).to_numpy(dtype=np.int64))
    field_values = np.stack(columns, axis=1) if len(frame) else np.zeros((0, len(columns)), dtype=np.int64)

    dataset = Dataset(schema=schema, labels=labels.astype(np.int8), p_uncalib=p_uncalib, field_values=field_values, role=role)
    logger.info("Loaded %d %s samples with %d fields from %s", len(dataset), role.value, schema.n_fields, path)
    return dataset


def to_frame(dataset: Dataset) -> pd.DataFrame:
    """Tabular form of a dataset, field indices mapped back to their tokens."""
    columns: dict[str, Any] = {LABEL_COLUMN: dataset.labels.astype(np.int64), SCORE_COLUMN: dataset.p_uncalib}
    for position, name in enumerate(dataset.schema.field_names):
        vocab = np.asarray(dataset.schema.vocabularies[position], dtype=object)
        columns[FIELD_PREFIX + name] = vocab[dataset.field_values[:, position]]
    return pd.DataFrame(columns)


def dataset_to_csv(dataset: Dataset) -> str:
    """Serialize a dataset to CSV text (floats keep their exact repr)."""
    buffer = io.StringIO()
    to_frame(dataset).to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def split_indices(n: int, fractions: Sequence[float], seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Seeded shuffle of range(n) cut into train/validation/test index arrays.

    Raises:
        ConfigError: If fractions are negative or do not sum to 1
        DataError: If a split would be empty
    """
    if len(fractions) != 3 or any(f < 0 for f in fractions) or not np.isclose(sum(fractions), 1.0, atol=1e-9):
        raise ConfigError(f"Split fractions must be three non-negative numbers summing to 1, got {tuple(fractions)}")
    n_train = int(round(fractions[0] * n))
    n_validation = int(round(fractions[1] * n))
    n_test = n - n_train - n_validation
    if min(n_train, n_validation, n_test) <= 0:
        raise DataError(f"Split {tuple(fractions)} of {n} samples produces an empty split ({n_train}, {n_validation}, {n_test})")

    order = np.random.default_rng(seed).permutation(n)
    return order[:n_train], order[n_train : n_train + n_validation], order[n_train + n_validation :]


def split(dataset: Dataset, fractions: Sequence[float], seed: int) -> tuple[Dataset, Dataset, Dataset]:
    """
    Deterministically shuffle and split into train/validation/test.

    Args:
        dataset: Dataset to split
        fractions: (train, validation, test) fractions summing to 1
        seed: Shuffle seed

    Returns:
        The three splits with their roles assigned

    Raises:
        ConfigError: If fractions are negative or do not sum to 1
        DataError: If a split would be empty
    """
    parts = split_indices(len(dataset), fractions, seed)
    train, validation, test = (dataset.take(indices, role) for indices, role in zip(parts, (Role.TRAIN, Role.VALIDATION, Role.TEST)))
    return train, validation, test


def subsample(dataset: Dataset, ratio: float, seed: int) -> Dataset:
    """Seeded down-sampling keeping `ratio` of the samples in their original order."""
    if not 0.0 < ratio <= 1.0:
        raise ConfigError(f"Sampling ratio must be in (0, 1], got {ratio}")
    n = len(dataset)
    keep = max(1, int(round(ratio * n)))
    if keep >= n:
        return dataset
    chosen = np.sort(np.random.default_rng(seed).choice(n, size=keep, replace=False))
    return dataset.take(chosen)
