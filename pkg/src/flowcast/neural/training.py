"""Mini-batch training loop with validation-based early stopping."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingDivergedError
from ..metrics import mse_global
from ..windows import WindowedDataset
from .adam import AdamParams, adam_init, adam_step
from .arch import ArchSpec
from .network import (
    ModelParams,
    forward,
    init_params,
    loss_and_grads,
    stack_inputs,
    stack_targets,
    two_step_loss,
)

STOP_MAX_EPOCHS = "max-epochs"
STOP_EARLY = "early-stop"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 5
    patience: int = 10
    adam: AdamParams = field(default_factory=AdamParams)
    early_stopping: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ValueError("epochs, batch_size and patience must be >= 1")


@dataclass
class TrainReport:
    """Per-epoch losses and how the run ended."""

    train_loss: list[float]
    val_loss: list[float]
    stopping_epoch: int
    stopping_reason: str
    best_epoch: int
    wall_time: float


def _validation_loss(arch, model, val_ds, batch_size) -> float:
    losses = []
    for start in range(0, val_ds.count, batch_size):
        idx = range(start, min(start + batch_size, val_ds.count))
        x = stack_inputs(arch, val_ds, idx)
        y = stack_targets(val_ds, idx)
        pred, _, _ = forward(arch, model, x, training=False)
        losses.append(two_step_loss(pred, y))
    return mse_global(losses)


def train(
    arch: ArchSpec,
    train_ds: WindowedDataset,
    val_ds: WindowedDataset,
    cfg: TrainConfig,
) -> tuple[ModelParams, TrainReport]:
    """Train the forecaster; returns the best-validation-epoch parameters.

    Batches of cfg.batch_size are drawn in seeded-shuffled order each epoch
    (trailing short batch included); validation loss is computed at the end
    of every epoch in inference mode.  With early stopping on, training
    stops once validation loss has not improved for cfg.patience
    consecutive epochs.
    """
    if train_ds.count == 0 or val_ds.count == 0:
        raise ValueError("training and validation window sets must be non-empty")
    started = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    model = init_params(arch, seed=int(rng.integers(0, 2**63 - 1)))
    opt_state = adam_init(model.params)
    step = 0
    best_val = math.inf
    best_epoch = 0
    best_model = model.copy()
    since_improved = 0
    train_losses: list[float] = []
    val_losses: list[float] = []
    reason = STOP_MAX_EPOCHS
    epoch = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(train_ds.count)
        batch_losses = []
        for start in range(0, train_ds.count, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x = stack_inputs(arch, train_ds, idx)
            y = stack_targets(train_ds, idx)
            loss, grads, new_state = loss_and_grads(arch, model, x, y)
            if not math.isfinite(loss):
                raise TrainingDivergedError(epoch)
            model.state = new_state
            step += 1
            model.params, opt_state = adam_step(
                model.params, grads, opt_state, step, cfg.adam
            )
            batch_losses.append(loss)
        train_losses.append(mse_global(batch_losses))
        val = _validation_loss(arch, model, val_ds, cfg.batch_size)
        if not math.isfinite(val):
            raise TrainingDivergedError(epoch)
        val_losses.append(val)
        if val < best_val:
            best_val = val
            best_epoch = epoch
            best_model = model.copy()
            since_improved = 0
        else:
            since_improved += 1
        if cfg.early_stopping and since_improved >= cfg.patience:
            reason = STOP_EARLY
            break
    report = TrainReport(
        train_loss=train_losses,
        val_loss=val_losses,
        stopping_epoch=epoch,
        stopping_reason=reason,
        best_epoch=best_epoch,
        wall_time=time.perf_counter() - started,
    )
    return best_model, report


def write_report_csv(path, report: TrainReport) -> None:
    """Write per-epoch losses as `epoch,train_loss,val_loss` rows."""
    with open(path, "w", newline="") as f:
        f.write("epoch,train_loss,val_loss\n")
        for i, (tr, va) in enumerate(zip(report.train_loss, report.val_loss), 1):
            f.write(f"{i},{tr:.17g},{va:.17g}\n")
