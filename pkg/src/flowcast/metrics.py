"""Error measures shared by the decomposition and the forecasters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedRelativeError


def rrmse(pred: np.ndarray, truth: np.ndarray) -> float:
    """Relative root mean square error ||pred - truth|| / ||truth||.

    Norms are Euclidean over all elements, so this works on single
    snapshots, snapshot pairs, or whole matrices alike.
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise UndefinedRelativeError("relative error against a zero-norm reference")
    return float(np.linalg.norm(pred - truth) / denom)


def mse_local(pred_batch: np.ndarray, truth_batch: np.ndarray, m: int) -> float:
    """Squared-error loss of one batch: ||pred - truth||^2 / m."""
    if m < 1:
        raise ValueError(f"batch size must be >= 1, got {m}")
    pred_batch = np.asarray(pred_batch, dtype=np.float64)
    truth_batch = np.asarray(truth_batch, dtype=np.float64)
    if pred_batch.shape != truth_batch.shape:
        raise ValueError(
            f"shape mismatch: {pred_batch.shape} vs {truth_batch.shape}"
        )
    diff = pred_batch - truth_batch
    return float(np.dot(diff.ravel(), diff.ravel()) / m)


def mse_global(local_losses) -> float:
    """Arithmetic mean of per-prediction local losses."""
    values = np.asarray(local_losses, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot average an empty loss sequence")
    return float(values.mean())


@dataclass(frozen=True, eq=False)
class ErrorSeries:
    """Per-index error values (e.g. RRMSE per test window) plus their mean."""

    indices: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size != len(self.indices):
            raise ValueError("indices and values must be 1-D and equally long")
        if not np.isfinite(values).all() or (values < 0).any():
            raise ValueError("error values must be finite and >= 0")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def mean(self) -> float:
        return float(self.values.mean())


def write_error_csv(path, series: ErrorSeries) -> None:
    """Write rows `t,rrmse` plus a trailing aggregate row."""
    with open(path, "w", newline="") as f:
        f.write("t,rrmse\n")
        for t, value in zip(series.indices, series.values):
            f.write(f"{t},{value:.17g}\n")
        f.write(f"mean,{series.mean:.17g}\n")
