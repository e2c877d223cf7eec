"""
Shared builders for small in-memory datasets.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from desc_calibration.data import Dataset, FieldSchema, Role


def make_dataset(
    labels: Sequence[int],
    p_uncalib: Sequence[float],
    fields: dict[str, Sequence[str]] | None = None,
    role: Role = Role.TRAIN,
) -> Dataset:
    """Dataset from plain lists; each field's vocabulary is its tokens in first-seen order."""
    if fields is None:
        fields = {"field0": ["a"] * len(labels)}
    names = list(fields)
    tokens = [list(dict.fromkeys(fields[name])) for name in names]
    schema = FieldSchema.from_tokens(names, tokens)
    columns = [[tokens[i].index(token) + 1 for token in fields[name]] for i, name in enumerate(names)]
    field_values = np.array(columns, dtype=np.int64).T.reshape(len(labels), len(names))
    return Dataset(schema=schema, labels=np.asarray(labels), p_uncalib=np.asarray(p_uncalib, dtype=np.float64), field_values=field_values, role=role)


def random_dataset(n: int, seed: int = 0, cardinalities: Sequence[int] = (4, 3), role: Role = Role.TRAIN) -> Dataset:
    """Random labels, scores in (0.01, 0.99) and uniformly drawn field values."""
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.01, 0.99, size=n)
    labels = (rng.uniform(size=n) < p).astype(np.int64)
    fields = {f"field{i}": [f"v{j}" for j in rng.integers(0, k, size=n)] for i, k in enumerate(cardinalities)}
    return make_dataset(labels, p, fields, role)
