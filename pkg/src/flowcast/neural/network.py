"""Whole-network forward/backward passes over the architecture specs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ValidationError
from ..fields import ScalingParams, scale_array, unscale_array
from ..windows import WindowedDataset
from . import layers as L
from .arch import (
    ArchSpec,
    BatchNorm,
    CNN_KIND,
    Conv3d,
    Dense,
    Flatten,
    Lstm,
    MaxPool3d,
    shape_trace,
)

# Trainable tensor names per layer type, in declaration (checkpoint) order.
TENSOR_ORDER = {
    Lstm: ("w", "u", "b"),
    Dense: ("w", "b"),
    Conv3d: ("k", "b"),
    BatchNorm: ("gamma", "beta"),
    MaxPool3d: (),
    Flatten: (),
}
STATE_ORDER = {BatchNorm: ("mean", "var")}


@dataclass
class ModelParams:
    """Per-layer trainable tensors plus batchnorm running statistics."""

    params: list[dict[str, np.ndarray]]
    state: list[dict[str, np.ndarray]]

    @property
    def parameter_count(self) -> int:
        return sum(t.size for layer in self.params for t in layer.values())

    def copy(self) -> "ModelParams":
        return ModelParams(
            params=[{k: v.copy() for k, v in layer.items()} for layer in self.params],
            state=[{k: v.copy() for k, v in layer.items()} for layer in self.state],
        )

    def check_finite(self) -> None:
        for layer in self.params:
            for name, tensor in layer.items():
                if not np.isfinite(tensor).all():
                    raise ValidationError(f"tensor '{name}' contains non-finite values")


def _glorot(rng: np.random.Generator, shape, fan_in, fan_out) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(arch: ArchSpec, seed: int) -> ModelParams:
    """Seeded fan-scaled uniform weights, zero biases, identity batchnorm."""
    rng = np.random.default_rng(seed)
    shapes = [s for _, s in shape_trace(arch)]
    params: list[dict[str, np.ndarray]] = []
    state: list[dict[str, np.ndarray]] = []
    for idx, layer in enumerate(arch.layers):
        in_shape = shapes[idx]
        if isinstance(layer, Lstm):
            n_in, units = in_shape[-1], layer.units
            params.append(
                {
                    "w": _glorot(rng, (n_in, 4 * units), n_in, 4 * units),
                    "u": _glorot(rng, (units, 4 * units), units, 4 * units),
                    "b": np.zeros(4 * units),
                }
            )
            state.append({})
        elif isinstance(layer, Dense):
            n_in, units = in_shape[-1], layer.units
            params.append(
                {
                    "w": _glorot(rng, (n_in, units), n_in, units),
                    "b": np.zeros(units),
                }
            )
            state.append({})
        elif isinstance(layer, Conv3d):
            cin = in_shape[-1]
            kd, kh, kw = layer.kernel
            receptive = kd * kh * kw
            params.append(
                {
                    "k": _glorot(
                        rng,
                        (kd, kh, kw, cin, layer.filters),
                        receptive * cin,
                        receptive * layer.filters,
                    ),
                    "b": np.zeros(layer.filters),
                }
            )
            state.append({})
        elif isinstance(layer, BatchNorm):
            ch = in_shape[-1]
            params.append({"gamma": np.ones(ch), "beta": np.zeros(ch)})
            state.append({"mean": np.zeros(ch), "var": np.ones(ch)})
        else:
            params.append({})
            state.append({})
    return ModelParams(params=params, state=state)


def forward(
    arch: ArchSpec,
    model: ModelParams,
    x: np.ndarray,
    training: bool = False,
):
    """Run the network; returns (output, caches, new_state).

    x is (B, q, J) for the recurrent model and (B, q, ny, nx, 1) for the
    convolutional one.  new_state carries updated batchnorm running
    statistics when training, otherwise the existing ones.
    """
    if x.shape[1:] != arch.input_shape:
        raise ValueError(
            f"input shape {x.shape[1:]} does not match {arch.input_shape}"
        )
    out = x
    caches = []
    new_state = [dict(s) for s in model.state]
    for idx, layer in enumerate(arch.layers):
        p = model.params[idx]
        if isinstance(layer, Lstm):
            out, cache = L.lstm_forward(out, p["w"], p["u"], p["b"])
        elif isinstance(layer, Dense):
            out, cache = L.dense_forward(out, p["w"], p["b"], layer.activation)
        elif isinstance(layer, Conv3d):
            out, cache = L.conv3d_forward(out, p["k"], p["b"], layer.activation)
        elif isinstance(layer, MaxPool3d):
            out, cache = L.maxpool3d_forward(out, layer.window)
        elif isinstance(layer, BatchNorm):
            s = model.state[idx]
            out, cache, (mean, var) = L.batchnorm_forward(
                out, p["gamma"], p["beta"], s["mean"], s["var"], training
            )
            new_state[idx] = {"mean": mean, "var": var}
        elif isinstance(layer, Flatten):
            cache = out.shape
            out = out.reshape(out.shape[0], -1)
        else:
            raise TypeError(f"unknown layer spec {layer!r}")
        caches.append(cache)
    if not np.isfinite(out).all():
        raise FloatingPointError("non-finite activations in the forward pass")
    return out, caches, new_state


def two_step_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean over the two horizons of the per-batch squared-error loss."""
    batch = pred.shape[0]
    diff = (pred - target).ravel()
    return float(diff @ diff / (2 * batch))


def loss_and_grads(arch: ArchSpec, model: ModelParams, x, target):
    """Training-mode forward plus full backward pass of the two-step loss.

    Returns (loss, grads, new_state) with grads mirroring model.params.
    """
    pred, caches, new_state = forward(arch, model, x, training=True)
    loss = two_step_loss(pred, target)
    grad = (pred - target) / x.shape[0]
    grads: list[dict[str, np.ndarray]] = [{} for _ in arch.layers]
    for idx in reversed(range(len(arch.layers))):
        layer = arch.layers[idx]
        p = model.params[idx]
        cache = caches[idx]
        if isinstance(layer, Lstm):
            grad, g = L.lstm_backward(cache, p["w"], p["u"], grad)
            grads[idx] = g
        elif isinstance(layer, Dense):
            grad, g = L.dense_backward(cache, p["w"], grad)
            grads[idx] = g
        elif isinstance(layer, Conv3d):
            grad, g = L.conv3d_backward(cache, p["k"], grad)
            grads[idx] = g
        elif isinstance(layer, MaxPool3d):
            grad = L.maxpool3d_backward(cache, grad)
        elif isinstance(layer, BatchNorm):
            grad, g = L.batchnorm_backward(cache, grad)
            grads[idx] = g
        elif isinstance(layer, Flatten):
            grad = grad.reshape(cache)
    return loss, grads, new_state


def stack_inputs(arch: ArchSpec, ds: WindowedDataset, indices) -> np.ndarray:
    """Assemble input windows into the model's batch layout."""
    batch = np.stack([ds.input_window(i).T for i in indices])  # (B, q, J)
    if arch.kind == CNN_KIND:
        grid = ds.source.grid
        return batch.reshape(len(batch), ds.q, grid.ny, grid.nx, 1)
    return batch


def stack_targets(ds: WindowedDataset, indices) -> np.ndarray:
    """Targets as (B, horizon*J) rows, horizon-major."""
    return np.stack([ds.target_window(i).T.ravel() for i in indices])


def predict_windows(
    arch: ArchSpec, model: ModelParams, ds: WindowedDataset, indices=None
) -> np.ndarray:
    """Inference-mode predictions for the given windows, shape (W, 2J)."""
    if indices is None:
        indices = range(ds.count)
    x = stack_inputs(arch, ds, indices)
    pred, _, _ = forward(arch, model, x, training=False)
    return pred


def predict_two_ahead(
    arch: ArchSpec,
    model: ModelParams,
    window: np.ndarray,
    scaling: ScalingParams | None = None,
    baseline: np.ndarray | None = None,
) -> np.ndarray:
    """Forecast the two snapshots following one (J, q) input window.

    When scaling is given the window is mapped into the training range and
    the outputs are mapped back; the convolutional model requires it.  When
    a (J, 2) baseline is given it is added to the outputs.  Returns (2, J).
    """
    window = np.asarray(window, dtype=np.float64)
    j = arch.grid.j
    if window.shape != (j, arch.q):
        raise ValueError(f"window must have shape ({j}, {arch.q}), got {window.shape}")
    if arch.kind == CNN_KIND and scaling is None:
        raise ConfigError(
            "the convolutional forecaster is trained on scaled data; "
            "scaling parameters are required to predict"
        )
    if scaling is not None:
        window = scale_array(window, scaling)
    x = window.T[None]
    if arch.kind == CNN_KIND:
        x = x.reshape(1, arch.q, arch.grid.ny, arch.grid.nx, 1)
    pred, _, _ = forward(arch, model, x, training=False)
    out = pred.reshape(2, j)
    if scaling is not None:
        out = unscale_array(out, scaling)
    if baseline is not None:
        baseline = np.asarray(baseline, dtype=np.float64)
        if baseline.shape != (j, 2):
            raise ValueError(
                f"baseline must have shape ({j}, 2), got {baseline.shape}"
            )
        out = out + baseline.T
    return out
