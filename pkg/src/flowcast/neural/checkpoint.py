"""Binary forecaster checkpoints (byte-exact round trip).

Layout: magic "MPJN", u32 version, u32 kind (0 recurrent, 1 convolutional),
u32 q, u32 nx, u32 ny, then for each layer its trainable tensors followed
by its state tensors, as raw little-endian float64 in declaration order.
Shapes are implied by the architecture, which is fixed per kind.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import CorruptFileError, DataFormatError
from ..fields import Grid2D
from .arch import ArchSpec, CNN_KIND, RNN_KIND, cnn_arch, rnn_arch
from .network import ModelParams, STATE_ORDER, TENSOR_ORDER, init_params

CHECKPOINT_MAGIC = b"MPJN"
CHECKPOINT_VERSION = 1

_HEADER = struct.Struct("<4sIIIII")
_KIND_CODE = {RNN_KIND: 0, CNN_KIND: 1}
_KIND_NAME = {v: k for k, v in _KIND_CODE.items()}


def _tensor_sequence(arch: ArchSpec, model: ModelParams):
    for idx, layer in enumerate(arch.layers):
        for key in TENSOR_ORDER[type(layer)]:
            yield model.params[idx][key]
        for key in STATE_ORDER.get(type(layer), ()):
            yield model.state[idx][key]


def write_checkpoint(path, arch: ArchSpec, model: ModelParams) -> None:
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        _KIND_CODE[arch.kind],
        arch.q,
        arch.grid.nx,
        arch.grid.ny,
    )
    with open(path, "wb") as f:
        f.write(header)
        for tensor in _tensor_sequence(arch, model):
            f.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def read_checkpoint(path) -> tuple[ArchSpec, ModelParams]:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise CorruptFileError(f"{path}: file shorter than header")
    magic, version, kind_code, q, nx, ny = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    if kind_code not in _KIND_NAME:
        raise DataFormatError(f"{path}: unknown model kind {kind_code}")
    grid = Grid2D(nx, ny)
    arch = rnn_arch(grid, q) if _KIND_NAME[kind_code] == RNN_KIND else cnn_arch(grid, q)
    # Template gives the tensor shapes; contents are overwritten below.
    model = init_params(arch, seed=0)
    offset = _HEADER.size
    for tensor in _tensor_sequence(arch, model):
        nbytes = tensor.size * 8
        if offset + nbytes > len(raw):
            raise CorruptFileError(f"{path}: payload truncated at byte {offset}")
        tensor[...] = np.frombuffer(
            raw, dtype="<f8", count=tensor.size, offset=offset
        ).reshape(tensor.shape)
        offset += nbytes
    if offset != len(raw):
        raise CorruptFileError(
            f"{path}: {len(raw) - offset} trailing bytes after the last tensor"
        )
    return arch, model
