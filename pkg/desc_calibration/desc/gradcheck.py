"""
Gradient check of the full DESC loss on a small seeded problem.
"""

from __future__ import annotations

import numpy as np

from ..config import BasisPreset, DescConfig, GenConfig, Variant
from ..diffcore import GradCheckReport, Tape, grad_check
from ..synthgen import DistortionSpec, generate, schema_for
from .model import DescModel, Inputs

MICRO_SAMPLES = 64


def micro_problem(seed: int = 0, variant: Variant | str = Variant.FULL, trainable_basis: bool = False) -> tuple[DescModel, Inputs, np.ndarray]:
    """A 64-sample, 3-field batch with a d=4 model over the reduced (m=9) basis family."""
    gen = GenConfig(n_fields=3, cardinalities=[4, 3, 3], sample_count=MICRO_SAMPLES, seed=seed)
    distortion = DistortionSpec.round_robin(schema_for(gen), ["field0"], [0.5, 2.0], [0.6, 1.6])
    dataset = generate(gen, distortion).dataset
    config = DescConfig(
        embedding_dim=4,
        bucket_count=4,
        alloc_mlp_hidden=8,
        value_mlp1_hidden=8,
        batch_size=MICRO_SAMPLES,
        seed=seed,
        basis=BasisPreset.REDUCED,
        trainable_basis=trainable_basis,
        identity_prior=0.0,
    )
    model = DescModel.build(dataset, config, variant)
    return model, model.encode(dataset), dataset.labels.astype(np.float64)


def check_gradients(
    seed: int = 0,
    tolerance: float = 1e-4,
    variant: Variant | str = Variant.FULL,
    trainable_basis: bool = False,
    corrupt: str | None = None,
) -> GradCheckReport:
    """
    Compare reverse-mode and finite-difference gradients of the DESC loss.

    Args:
        seed: Seed of the micro problem
        tolerance: Pass threshold on the maximum relative error
        variant: Architecture variant to check
        trainable_basis: Also check the basis hyperparameters
        corrupt: Parameter whose backward pass is deliberately falsified (negative control)
    """
    model, inputs, labels = micro_problem(seed, variant, trainable_basis)

    def forward(tape: Tape):
        loss = model.loss(tape, model.forward(tape, inputs), labels)
        if corrupt is not None and tape.record:
            param = tape.param(corrupt)
            bogus = tape.custom(np.zeros(()), [param], [lambda g: np.full(param.shape, float(g))])
            loss = tape.add(loss, bogus)
        return loss

    return grad_check(forward, model.store, tolerance=tolerance, seed=seed)
