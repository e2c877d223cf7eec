"""
Monotone basis calibration functions.

Every basis function maps (0, 1) onto (0, 1), is non-decreasing and tends to 0
and 1 at the ends of the interval. Three families are provided:

- power:    t ** h
- log:      log(1 + v t) / log(1 + v)
- scaling:  sigmoid(a * logit(t))

A BasisFamily evaluates all of them at once, in the fixed order
[powers | logs | scalings], together with the derivatives needed for training.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import expit, logit

from .diffcore import Node, Tape

MIN_HYPERPARAMETER = 1e-3
# Keeps logit/log finite for inputs at the very ends of (0, 1)
T_FLOOR = 1e-300
T_CEILING = float(np.nextafter(1.0, 0.0))

PARAM_NAMES = ("basis.power", "basis.log", "basis.scaling")


def _clamp(t: np.ndarray | float) -> np.ndarray:
    return np.clip(np.asarray(t, dtype=np.float64), T_FLOOR, T_CEILING)


def eval_power(t: np.ndarray | float, h: np.ndarray | float) -> np.ndarray:
    return np.power(_clamp(t), h)


def eval_log(t: np.ndarray | float, v: np.ndarray | float) -> np.ndarray:
    return np.log1p(v * _clamp(t)) / np.log1p(v)


def eval_scaling(t: np.ndarray | float, a: np.ndarray | float) -> np.ndarray:
    return expit(logit(_clamp(t)) * a)


def power_derivatives(t: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(dB/dt, dB/dh) of t ** h."""
    t = _clamp(t)
    value = np.power(t, h)
    return h * np.power(t, h - 1.0), value * np.log(t)


def log_derivatives(t: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(dB/dt, dB/dv) of log(1 + v t) / log(1 + v)."""
    t = _clamp(t)
    denominator = np.log1p(v)
    numerator = np.log1p(v * t)
    d_t = v / ((1.0 + v * t) * denominator)
    d_v = (t / (1.0 + v * t)) / denominator - numerator / ((1.0 + v) * denominator**2)
    return d_t, d_v


def scaling_derivatives(t: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(dB/dt, dB/da) of sigmoid(a logit(t))."""
    t = _clamp(t)
    z = logit(t)
    value = expit(z * a)
    slope = value * (1.0 - value)
    return slope * a / (t * (1.0 - t)), slope * z


def _grid(start: float, step: float, count: int) -> tuple[float, ...]:
    return tuple(round(start + i * step, 10) for i in range(count))


@dataclass(frozen=True)
class BasisFamily:
    """Hyperparameters of the m = p + l + s basis functions."""

    power_params: tuple[float, ...]
    log_params: tuple[float, ...]
    scaling_params: tuple[float, ...]
    trainable: bool = False

    def __post_init__(self):
        for name in ("power_params", "log_params", "scaling_params"):
            values = tuple(float(x) for x in getattr(self, name))
            if any(x <= 0.0 for x in values):
                raise ValueError(f"All basis hyperparameters must be positive ({name}: {values})")
            object.__setattr__(self, name, values)
        if self.m == 0:
            raise ValueError("A basis family needs at least one function")

    @staticmethod
    def default(trainable: bool = False) -> BasisFamily:
        """16 power (h = 0.2..3.2), 16 log (v = 0.5..8.0) and 16 scaling (a = 0.25..4.0) functions."""
        return BasisFamily(
            power_params=_grid(0.2, 0.2, 16),
            log_params=_grid(0.5, 0.5, 16),
            scaling_params=_grid(0.25, 0.25, 16),
            trainable=trainable,
        )

    @staticmethod
    def reduced(trainable: bool = False) -> BasisFamily:
        """Three functions of each kind, straddling the identity."""
        return BasisFamily(
            power_params=(0.5, 1.0, 2.0),
            log_params=(0.5, 2.0, 8.0),
            scaling_params=(0.5, 1.0, 2.0),
            trainable=trainable,
        )

    @property
    def m(self) -> int:
        return len(self.power_params) + len(self.log_params) + len(self.scaling_params)

    def identity_indices(self) -> tuple[int, ...]:
        """Positions of the functions that equal the identity (power h = 1, scaling a = 1)."""
        offset = len(self.power_params) + len(self.log_params)
        powers = [i for i, h in enumerate(self.power_params) if h == 1.0]
        scalings = [offset + i for i, a in enumerate(self.scaling_params) if a == 1.0]
        return tuple(powers + scalings)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.power_params), len(self.log_params), len(self.scaling_params)

    def labels(self) -> list[str]:
        """Human-readable name of each basis function, in evaluation order."""
        return [f"power(h={h:g})" for h in self.power_params] + [f"log(v={v:g})" for v in self.log_params] + [f"scaling(a={a:g})" for a in self.scaling_params]

    def with_params(self, power: np.ndarray, log: np.ndarray, scaling: np.ndarray) -> BasisFamily:
        return BasisFamily(tuple(power), tuple(log), tuple(scaling), self.trainable)

    def to_dict(self) -> dict[str, Any]:
        return {
            "power_params": list(self.power_params),
            "log_params": list(self.log_params),
            "scaling_params": list(self.scaling_params),
            "trainable": self.trainable,
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> BasisFamily:
        return BasisFamily(
            power_params=tuple(d["power_params"]),
            log_params=tuple(d["log_params"]),
            scaling_params=tuple(d["scaling_params"]),
            trainable=bool(d.get("trainable", False)),
        )


def eval_family(family: BasisFamily, t: np.ndarray | float) -> np.ndarray:
    """
    Evaluate every basis function.

    Args:
        family: Basis hyperparameters
        t: Probability or array of probabilities, shape (B,)

    Returns:
        Values with shape (m,) for a scalar t, (B, m) otherwise
    """
    t = np.asarray(t, dtype=np.float64)
    column = t[..., None]
    return np.concatenate(
        [
            eval_power(column, np.asarray(family.power_params)),
            eval_log(column, np.asarray(family.log_params)),
            eval_scaling(column, np.asarray(family.scaling_params)),
        ],
        axis=-1,
    )


def family_derivatives(family: BasisFamily, t: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """
    Derivatives of every basis function.

    Returns:
        (d/dt, d/dhyperparameter), each shaped like `eval_family(family, t)`;
        entry j of the second array is the derivative of B_j with respect to
        its own hyperparameter.
    """
    column = np.asarray(t, dtype=np.float64)[..., None]
    parts = [
        power_derivatives(column, np.asarray(family.power_params)),
        log_derivatives(column, np.asarray(family.log_params)),
        scaling_derivatives(column, np.asarray(family.scaling_params)),
    ]
    return np.concatenate([p[0] for p in parts], axis=-1), np.concatenate([p[1] for p in parts], axis=-1)


def register_params(store, family: BasisFamily) -> None:
    """Add the family hyperparameters to a parameter store (trainable families only)."""
    if not family.trainable:
        return
    for name, values in zip(PARAM_NAMES, (family.power_params, family.log_params, family.scaling_params)):
        store.add(name, np.asarray(values, dtype=np.float64), lower_bound=MIN_HYPERPARAMETER)


def current_family(store, family: BasisFamily) -> BasisFamily:
    """The family with hyperparameters read back from the store when trainable."""
    if not family.trainable:
        return family
    return family.with_params(*(store[name] for name in PARAM_NAMES))


def family_on_tape(tape: Tape, family: BasisFamily, t: np.ndarray) -> Node:
    """
    Basis values (B, m) as a tape node.

    For a trainable family the hyperparameters are read from the tape's store
    and receive gradients; otherwise the values are a constant.
    """
    if not family.trainable:
        return tape.constant(eval_family(family, t))
    params = [tape.param(name) for name in PARAM_NAMES]
    live = family.with_params(*(p.value for p in params))
    values = eval_family(live, t)
    _, d_params = family_derivatives(live, t)
    p, l, _s = live.sizes
    slices = (slice(0, p), slice(p, p + l), slice(p + l, live.m))
    vjps = [lambda g, sl=sl: (g[..., sl] * d_params[..., sl]).reshape(-1, sl.stop - sl.start).sum(axis=0) for sl in slices]
    return tape.custom(values, params, vjps)
