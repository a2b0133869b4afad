"""Forecaster architecture descriptors, shape tracing and parameter counts.

Two fixed architectures forecast the next two snapshots from the previous
q: a recurrent one (LSTM over flattened snapshots into a fully connected
stack with a linear head, fed unscaled data) and a convolutional one
(three Conv3D/MaxPool3D/BatchNorm blocks, a 1x1x1 convolution, then two
fully connected layers with a sigmoid head, fed [0, 1]-scaled data).
Both emit one head of size 2*J covering the two horizons.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..fields import Grid2D

RNN_KIND = "rnn"
CNN_KIND = "cnn"


@dataclass(frozen=True)
class Lstm:
    units: int


@dataclass(frozen=True)
class Dense:
    units: int
    activation: str  # relu | linear | sigmoid


@dataclass(frozen=True)
class Conv3d:
    filters: int
    kernel: tuple[int, int, int]  # stride 1, no padding
    activation: str = "relu"


@dataclass(frozen=True)
class MaxPool3d:
    window: tuple[int, int, int]  # stride = window, valid


@dataclass(frozen=True)
class BatchNorm:
    pass


@dataclass(frozen=True)
class Flatten:
    pass


LayerSpec = Lstm | Dense | Conv3d | MaxPool3d | BatchNorm | Flatten


@dataclass(frozen=True)
class ArchSpec:
    """One forecaster: kind, input window geometry and the layer chain."""

    kind: str
    grid: Grid2D
    q: int
    layers: tuple[LayerSpec, ...]

    @property
    def output_dim(self) -> int:
        return 2 * self.grid.j

    @property
    def input_shape(self) -> tuple[int, ...]:
        if self.kind == RNN_KIND:
            return (self.q, self.grid.j)
        return (self.q, self.grid.ny, self.grid.nx, 1)


def rnn_arch(grid: Grid2D, q: int = 10) -> ArchSpec:
    """LSTM(400) -> FC(200, relu) -> FC(80, relu) -> FC(2J, linear)."""
    return ArchSpec(
        kind=RNN_KIND,
        grid=grid,
        q=q,
        layers=(
            Lstm(400),
            Dense(200, "relu"),
            Dense(80, "relu"),
            Dense(2 * grid.j, "linear"),
        ),
    )


def cnn_arch(grid: Grid2D, q: int = 10) -> ArchSpec:
    """Three conv/pool/norm blocks, a 1x1x1 conv, then the dense head.

    Raises ValueError when the grid or window is too small to survive the
    three convolution/pooling stages (needs roughly 15x15 cells and q >= 4).
    """
    arch = ArchSpec(
        kind=CNN_KIND,
        grid=grid,
        q=q,
        layers=(
            Conv3d(5, (2, 2, 2)),
            MaxPool3d((1, 2, 2)),
            BatchNorm(),
            Conv3d(10, (2, 2, 2)),
            MaxPool3d((1, 2, 2)),
            BatchNorm(),
            Conv3d(20, (2, 2, 2)),
            MaxPool3d((1, 2, 2)),
            BatchNorm(),
            Conv3d(2, (1, 1, 1)),
            Flatten(),
            Dense(80, "relu"),
            Dense(2 * grid.j, "sigmoid"),
        ),
    )
    shape_trace(arch)  # reject geometries the layer chain cannot support
    return arch


def shape_trace(arch: ArchSpec) -> list[tuple[str, tuple[int, ...]]]:
    """Per-layer output shapes (without the batch axis), input included."""
    shape = arch.input_shape
    trace = [("input", shape)]
    for layer in arch.layers:
        if isinstance(layer, Lstm):
            shape = (layer.units,)
            name = "lstm"
        elif isinstance(layer, Dense):
            shape = (layer.units,)
            name = "dense"
        elif isinstance(layer, Conv3d):
            d, h, w, _ = shape
            kd, kh, kw = layer.kernel
            shape = (d - kd + 1, h - kh + 1, w - kw + 1, layer.filters)
            name = "conv3d"
        elif isinstance(layer, MaxPool3d):
            d, h, w, c = shape
            wd, wh, ww = layer.window
            shape = (d // wd, h // wh, w // ww, c)
            name = "maxpool3d"
        elif isinstance(layer, BatchNorm):
            name = "batchnorm"
        elif isinstance(layer, Flatten):
            size = 1
            for s in shape:
                size *= s
            shape = (size,)
            name = "flatten"
        else:
            raise TypeError(f"unknown layer spec {layer!r}")
        if any(s < 1 for s in shape):
            raise ValueError(
                f"input {arch.input_shape} is too small: {name} output "
                f"shape collapses to {shape}"
            )
        trace.append((name, shape))
    return trace


def param_count(arch: ArchSpec) -> int:
    """Total trainable scalars.

    Conventions: LSTM 4*(in+hidden+1)*hidden; Dense in*out + out;
    Conv3D prod(kernel)*cin*cout + cout; BatchNorm 2 per channel
    (running statistics are state, not trainable).
    """
    total = 0
    shape = arch.input_shape
    for layer in arch.layers:
        if isinstance(layer, Lstm):
            n_in = shape[-1]
            total += 4 * (n_in + layer.units + 1) * layer.units
            shape = (layer.units,)
        elif isinstance(layer, Dense):
            total += shape[-1] * layer.units + layer.units
            shape = (layer.units,)
        elif isinstance(layer, Conv3d):
            d, h, w, cin = shape
            kd, kh, kw = layer.kernel
            total += kd * kh * kw * cin * layer.filters + layer.filters
            shape = (d - kd + 1, h - kh + 1, w - kw + 1, layer.filters)
        elif isinstance(layer, MaxPool3d):
            d, h, w, c = shape
            wd, wh, ww = layer.window
            shape = (d // wd, h // wh, w // ww, c)
        elif isinstance(layer, BatchNorm):
            total += 2 * shape[-1]
        elif isinstance(layer, Flatten):
            size = 1
            for s in shape:
                size *= s
            shape = (size,)
    return total
