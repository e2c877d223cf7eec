"""
Minibatch training of a DESC model with Adam.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from ..config import DescConfig
from ..data.dataset import Dataset
from ..diffcore import Tape, adam_step
from ..errors import DataError, NumericError

if TYPE_CHECKING:
    from .model import DescModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochRecord:
    """Losses after an epoch (epoch 0 is the initialization)."""

    epoch: int
    loss: float
    mean_batch_loss: float | None = None
    holdout_loss: float | None = None

    @property
    def selection_loss(self) -> float:
        """Held-out loss when rows were held out, else the training loss."""
        return self.loss if self.holdout_loss is None else self.holdout_loss


@dataclass
class TrainResult:
    """Per-epoch loss trace and the epoch whose parameters were kept."""

    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    holdout_count: int = 0

    @property
    def initial_loss(self) -> float:
        return self.records[0].selection_loss

    @property
    def final_loss(self) -> float:
        """Selection loss of the parameters the model ends with."""
        return self.records[self.best_epoch].selection_loss

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "epoch": [r.epoch for r in self.records],
                "loss": [r.loss for r in self.records],
                "mean_batch_loss": [r.mean_batch_loss for r in self.records],
                "holdout_loss": [r.holdout_loss for r in self.records],
                "kept": [r.epoch == self.best_epoch for r in self.records],
            }
        )


def negative_log_likelihood(p_calib: np.ndarray, labels: np.ndarray) -> float:
    """
    Mean binary log-loss.

    Raises:
        ValueError: If a probability lies outside (0, 1)
    """
    p = np.asarray(p_calib, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if ((p <= 0.0) | (p >= 1.0)).any():
        raise ValueError("Probabilities must lie strictly inside (0, 1)")
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def holdout_split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray | None]:
    """
    Seeded (fit rows, held-out rows) split of n rows, both sorted.

    No rows are held out when the fraction rounds to zero rows or would leave
    nothing to fit on.
    """
    count = int(round(fraction * n))
    if count == 0 or count >= n:
        return np.arange(n), None
    order = np.random.default_rng([seed, 2]).permutation(n)
    return np.sort(order[count:]), np.sort(order[:count])


def train(model: DescModel, dataset: Dataset, config: DescConfig | None = None) -> TrainResult:
    """
    Train in place with Adam over seeded shuffled epochs.

    With `restore_best` a seeded `validation_fraction` of the rows is held out
    of the gradient steps and the parameters of the epoch with the lowest
    held-out loss are kept (the training loss decides when nothing is held
    out), so the final selection loss never exceeds the initial one.

    Raises:
        DataError: If the dataset is empty
        NumericError: If a minibatch loss is not finite
    """
    config = config or model.config
    if len(dataset) == 0:
        raise DataError("Cannot train on an empty dataset")
    encoded = model.encode(dataset)
    fraction = config.validation_fraction if config.restore_best else 0.0
    fit_rows, holdout_rows = holdout_split(len(dataset), fraction, config.seed)
    inputs = encoded.take(fit_rows)
    labels = dataset.labels.astype(np.float64)[fit_rows]
    holdout = None if holdout_rows is None else (encoded.take(holdout_rows), dataset.labels.astype(np.float64)[holdout_rows])
    rng = np.random.default_rng([config.seed, 1])

    def evaluate(epoch: int, mean_batch_loss: float | None) -> EpochRecord:
        loss = negative_log_likelihood(model.predict_inputs(inputs), labels)
        held = None if holdout is None else negative_log_likelihood(model.predict_inputs(holdout[0]), holdout[1])
        if not np.isfinite(loss) or (held is not None and not np.isfinite(held)):
            raise NumericError(f"Non-finite loss after epoch {epoch}")
        return EpochRecord(epoch, loss, mean_batch_loss, held)

    result = TrainResult([evaluate(0, None)], holdout_count=0 if holdout_rows is None else len(holdout_rows))
    best_loss = result.initial_loss
    best_store = model.store.copy() if config.restore_best and config.epochs > 0 else None
    logger.info(
        "Training %s DESC on %d samples (%d held out) for %d epochs (initial loss %.6f)",
        model.variant.value,
        len(fit_rows),
        result.holdout_count,
        config.epochs,
        best_loss,
    )

    for epoch in range(1, config.epochs + 1):
        lr = config.lr * config.lr_decay ** (epoch - 1)
        order = rng.permutation(len(fit_rows))
        batch_losses = []
        for k, start in enumerate(range(0, len(fit_rows), config.batch_size)):
            batch = order[start : start + config.batch_size]
            tape = Tape(model.store)
            loss = model.loss(tape, model.forward(tape, inputs.take(batch)), labels[batch])
            value = float(loss.value)
            if not np.isfinite(value):
                raise NumericError(f"Non-finite loss at epoch {epoch}, batch {k}")
            adam_step(model.store, tape.backward(loss), lr, config.betas, config.adam_eps)
            batch_losses.append(value)
            logger.debug("epoch %d batch %d loss %.6f", epoch, k, value)

        record = evaluate(epoch, float(np.mean(batch_losses)))
        result.records.append(record)
        logger.info("epoch %d/%d loss %.6f selection loss %.6f (lr %.2e)", epoch, config.epochs, record.loss, record.selection_loss, lr)
        if record.selection_loss < best_loss:
            best_loss, result.best_epoch = record.selection_loss, epoch
            if config.restore_best:
                best_store = model.store.copy()

    if not config.restore_best:
        result.best_epoch = config.epochs
    elif result.best_epoch != config.epochs:
        logger.info("Restoring parameters of epoch %d (selection loss %.6f)", result.best_epoch, best_loss)
        model.store = best_store
    return result
