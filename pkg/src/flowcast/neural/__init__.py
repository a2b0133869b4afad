"""Forecaster architectures, kernels, optimization and training."""

from .adam import AdamParams, AdamState, adam_init, adam_step
from .arch import (
    ArchSpec,
    BatchNorm,
    CNN_KIND,
    Conv3d,
    Dense,
    Flatten,
    Lstm,
    MaxPool3d,
    RNN_KIND,
    cnn_arch,
    param_count,
    rnn_arch,
    shape_trace,
)
from .checkpoint import read_checkpoint, write_checkpoint
from .forecaster import CnnForecaster, RnnForecaster
from .network import (
    ModelParams,
    forward,
    init_params,
    loss_and_grads,
    predict_two_ahead,
    predict_windows,
    stack_inputs,
    stack_targets,
    two_step_loss,
)
from .training import TrainConfig, TrainReport, train, write_report_csv

__all__ = [
    "AdamParams",
    "AdamState",
    "ArchSpec",
    "BatchNorm",
    "CNN_KIND",
    "CnnForecaster",
    "Conv3d",
    "Dense",
    "Flatten",
    "Lstm",
    "MaxPool3d",
    "ModelParams",
    "RNN_KIND",
    "RnnForecaster",
    "TrainConfig",
    "TrainReport",
    "adam_init",
    "adam_step",
    "cnn_arch",
    "forward",
    "init_params",
    "loss_and_grads",
    "param_count",
    "predict_two_ahead",
    "predict_windows",
    "read_checkpoint",
    "rnn_arch",
    "shape_trace",
    "stack_inputs",
    "stack_targets",
    "train",
    "two_step_loss",
    "write_checkpoint",
    "write_report_csv",
]
