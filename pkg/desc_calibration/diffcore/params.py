"""
Named parameter storage, initializers and the Adam optimizer.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import CheckpointError

EMBEDDING_INIT_SCALE = 0.05


@dataclass(eq=False)
class AdamState:
    """First/second moment estimates and step count of one parameter."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0


@dataclass(eq=False)
class ParamStore:
    """Named float64 parameter tensors plus their Adam state.

    Every parameter has exactly one owner name. Optional lower bounds are
    re-applied after each optimizer update (projection).
    """

    params: dict[str, np.ndarray] = field(default_factory=dict)
    adam: dict[str, AdamState] = field(default_factory=dict)
    lower_bounds: dict[str, float] = field(default_factory=dict)

    def add(self, name: str, value: np.ndarray, lower_bound: float | None = None) -> np.ndarray:
        if name in self.params:
            raise ValueError(f"Parameter '{name}' already exists")
        value = np.array(value, dtype=np.float64)
        self.params[name] = value
        self.adam[name] = AdamState(m=np.zeros_like(value), v=np.zeros_like(value))
        if lower_bound is not None:
            self.lower_bounds[name] = lower_bound
            np.maximum(value, lower_bound, out=value)
        return value

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.params[name]
        except KeyError:
            raise KeyError(f"Unknown parameter '{name}'") from None

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def __iter__(self) -> Iterator[str]:
        return iter(self.params)

    def names(self) -> list[str]:
        return list(self.params)

    def init_embedding(self, name: str, vocab_size: int, dim: int, rng: np.random.Generator) -> np.ndarray:
        """Embedding table ~ uniform(-0.05, 0.05)."""
        return self.add(name, rng.uniform(-EMBEDDING_INIT_SCALE, EMBEDDING_INIT_SCALE, size=(vocab_size, dim)))

    def init_dense(self, name: str, in_dim: int, out_dim: int, rng: np.random.Generator) -> None:
        """Dense layer: weight (out, in) ~ uniform(+-sqrt(6 / (fan_in + fan_out))), zero bias."""
        limit = np.sqrt(6.0 / (in_dim + out_dim))
        self.add(f"{name}.weight", rng.uniform(-limit, limit, size=(out_dim, in_dim)))
        self.add(f"{name}.bias", np.zeros(out_dim))

    def copy(self) -> ParamStore:
        return ParamStore(
            params={k: v.copy() for k, v in self.params.items()},
            adam={k: AdamState(s.m.copy(), s.v.copy(), s.step) for k, s in self.adam.items()},
            lower_bounds=dict(self.lower_bounds),
        )

    def load_values(self, values: Mapping[str, np.ndarray]) -> None:
        """Overwrite parameter values in place (shapes must match)."""
        for name, value in values.items():
            target = self[name]
            if target.shape != np.shape(value):
                raise ValueError(f"Shape mismatch for '{name}': {target.shape} vs {np.shape(value)}")
            target[...] = value

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": {name: encode_array(value) for name, value in self.params.items()},
            "adam": {name: {"m": encode_array(s.m), "v": encode_array(s.v), "step": s.step} for name, s in self.adam.items()},
            "lower_bounds": dict(self.lower_bounds),
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> ParamStore:
        store = ParamStore()
        for name, encoded in d["params"].items():
            store.params[name] = decode_array(encoded, name)
        for name, value in store.params.items():
            state = d.get("adam", {}).get(name)
            if state is None:
                store.adam[name] = AdamState(np.zeros_like(value), np.zeros_like(value))
            else:
                store.adam[name] = AdamState(decode_array(state["m"], name), decode_array(state["v"], name), int(state["step"]))
        store.lower_bounds = {k: float(v) for k, v in d.get("lower_bounds", {}).items()}
        return store


def encode_array(value: np.ndarray) -> dict[str, Any]:
    """Shape plus row-major values (Python floats keep an exact JSON repr)."""
    value = np.asarray(value, dtype=np.float64)
    return {"shape": list(value.shape), "values": value.reshape(-1).tolist()}


def decode_array(encoded: dict[str, Any], name: str = "") -> np.ndarray:
    shape = tuple(int(s) for s in encoded["shape"])
    values = np.asarray(encoded["values"], dtype=np.float64)
    if values.size != int(np.prod(shape, dtype=np.int64)):
        raise CheckpointError(f"Tensor '{name}' holds {values.size} values for shape {shape}")
    return values.reshape(shape)


def adam_step(
    store: ParamStore,
    grads: Mapping[str, np.ndarray],
    lr: float = 1e-3,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> None:
    """
    One bias-corrected Adam update of every parameter that has a gradient.

    Args:
        store: Parameters and optimizer state (updated in place)
        grads: Gradient per parameter name, shaped like the parameter
        lr: Learning rate
        betas: Exponential decay rates of the first and second moments
        eps: Denominator stabilizer

    Raises:
        ValueError: If a gradient is shaped unlike its parameter
    """
    beta1, beta2 = betas
    for name, grad in grads.items():
        param = store[name]
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != param.shape:
            raise ValueError(f"Gradient for '{name}' has shape {grad.shape}, parameter has {param.shape}")
        state = store.adam[name]
        state.step += 1
        state.m = beta1 * state.m + (1.0 - beta1) * grad
        state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
        m_hat = state.m / (1.0 - beta1**state.step)
        v_hat = state.v / (1.0 - beta2**state.step)
        param -= lr * m_hat / (np.sqrt(v_hat) + eps)
        if name in store.lower_bounds:
            np.maximum(param, store.lower_bounds[name], out=param)
