"""Estimator-style front ends for the two forecaster architectures."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..fields import ScalingParams
from ..windows import WindowedDataset
from .adam import AdamParams
from .arch import CNN_KIND, RNN_KIND, cnn_arch, rnn_arch
from .network import predict_two_ahead, predict_windows
from .training import TrainConfig, train


class _Forecaster(BaseEstimator):
    """Shared fit/predict machinery; subclasses fix the architecture kind."""

    _kind: str

    def __init__(
        self,
        epochs: int = 70,
        batch_size: int = 5,
        patience: int = 10,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        adam_epsilon: float = 1e-8,
        early_stopping: bool = True,
        seed: int = 0,
    ):
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_epsilon = adam_epsilon
        self.early_stopping = early_stopping
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            patience=self.patience,
            adam=AdamParams(
                alpha=self.learning_rate,
                beta1=self.beta1,
                beta2=self.beta2,
                epsilon=self.adam_epsilon,
            ),
            early_stopping=self.early_stopping,
            seed=self.seed,
        )

    def fit(self, train_ds: WindowedDataset, val_ds: WindowedDataset):
        """Train on rolling windows; both datasets must be non-empty."""
        grid = train_ds.source.grid
        make_arch = rnn_arch if self._kind == RNN_KIND else cnn_arch
        self.arch_ = make_arch(grid, q=train_ds.q)
        self.model_, self.report_ = train(
            self.arch_, train_ds, val_ds, self._train_config()
        )
        return self

    def predict(
        self,
        window: np.ndarray,
        scaling: ScalingParams | None = None,
        baseline: np.ndarray | None = None,
    ) -> np.ndarray:
        """Two snapshots ahead of one (J, q) window; returns (2, J)."""
        self._check_fitted()
        return predict_two_ahead(self.arch_, self.model_, window, scaling, baseline)

    def predict_dataset(self, ds: WindowedDataset, indices=None) -> np.ndarray:
        """Raw model outputs for many windows, shape (W, 2J)."""
        self._check_fitted()
        return predict_windows(self.arch_, self.model_, ds, indices)

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError(f"{type(self).__name__} must be fitted before use")


class RnnForecaster(_Forecaster):
    """Recurrent forecaster: consumes unscaled snapshot vectors."""

    _kind = RNN_KIND

    def __init__(
        self,
        epochs: int = 140,
        batch_size: int = 5,
        patience: int = 10,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        adam_epsilon: float = 1e-8,
        early_stopping: bool = True,
        seed: int = 0,
    ):
        super().__init__(
            epochs=epochs,
            batch_size=batch_size,
            patience=patience,
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            adam_epsilon=adam_epsilon,
            early_stopping=early_stopping,
            seed=seed,
        )


class CnnForecaster(_Forecaster):
    """Convolutional forecaster: consumes [0, 1]-scaled snapshot stacks."""

    _kind = CNN_KIND
