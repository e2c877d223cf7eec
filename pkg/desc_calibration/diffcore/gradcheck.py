"""
Finite-difference verification of reverse-mode gradients.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError
from .params import ParamStore
from .tape import Node, Tape

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
# Gradients smaller than this are compared in absolute terms (finite-difference roundoff)
ERROR_FLOOR = 1e-6

Forward = Callable[[Tape], Node]


@dataclass
class GradCheckReport:
    """Per-parameter maximum relative error between tape and central differences."""

    errors: dict[str, float] = field(default_factory=dict)
    checked: dict[str, int] = field(default_factory=dict)
    tolerance: float = 1e-4

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def worst_parameter(self) -> str | None:
        return max(self.errors, key=self.errors.get) if self.errors else None

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_relative_error": self.max_error,
            "worst_parameter": self.worst_parameter,
            "errors": dict(sorted(self.errors.items())),
            "checked_coordinates": dict(sorted(self.checked.items())),
        }


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(ERROR_FLOOR, abs(analytic) + abs(numeric))


def _evaluate(forward: Forward, store: ParamStore) -> float:
    value = float(forward(Tape(store, record=False)).value)
    if not np.isfinite(value):
        raise NumericError(f"Forward produced a non-finite loss ({value})")
    return value


def grad_check(
    forward: Forward,
    store: ParamStore,
    tolerance: float = 1e-4,
    coordinates_per_param: int = 20,
    seed: int = 0,
    step: float = FD_STEP,
) -> GradCheckReport:
    """
    Compare tape gradients against central finite differences.

    Args:
        forward: Builds the scalar loss on the given tape from parameters in `store`
        store: Parameters to perturb (restored afterwards)
        tolerance: Pass threshold on the maximum relative error
        coordinates_per_param: Coordinates sampled per parameter (all when fewer)
        seed: Seed of the coordinate sampler
        step: Finite-difference step

    Returns:
        GradCheckReport with the maximum relative error per parameter

    Raises:
        NumericError: If the forward pass yields a non-finite loss
    """
    tape = Tape(store)
    loss = forward(tape)
    if not np.isfinite(loss.value).all():
        raise NumericError(f"Forward produced a non-finite loss ({float(loss.value)})")
    analytic = tape.backward(loss)

    rng = np.random.default_rng(seed)
    report = GradCheckReport(tolerance=tolerance)
    for name in sorted(analytic):
        param = store[name]
        flat = param.reshape(-1)
        count = min(coordinates_per_param, flat.size)
        coordinates = np.sort(rng.choice(flat.size, size=count, replace=False))
        worst = 0.0
        for c in coordinates:
            original = flat[c]
            try:
                flat[c] = original + step
                plus = _evaluate(forward, store)
                flat[c] = original - step
                minus = _evaluate(forward, store)
            finally:
                flat[c] = original
            numeric = (plus - minus) / (2.0 * step)
            worst = max(worst, relative_error(float(analytic[name].reshape(-1)[c]), numeric))
        report.errors[name] = worst
        report.checked[name] = count
        logger.debug("grad check %s: max relative error %.3e over %d coordinates", name, worst, count)
    return report
