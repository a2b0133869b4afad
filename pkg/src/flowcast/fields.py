"""Snapshot matrices of 2-D flow fields and the arithmetic on them.

A snapshot sequence is stored as a J x K matrix whose column k is the field
at sample k, flattened row-major with the streamwise (x) index fastest, so
row index j corresponds to grid cell (iy, ix) = divmod(j, nx).  All data is
float64 and immutable after construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import (
    CorruptFileError,
    DataFormatError,
    DegenerateScalingError,
    ValidationError,
)

SNAPSHOT_MAGIC = b"MPJF"
SNAPSHOT_VERSION = 1

_HEADER = struct.Struct("<4sIIIId")


@dataclass(frozen=True)
class Grid2D:
    """Uniform 2-D grid: nx cells streamwise, ny cells along the normal."""

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {self.nx}x{self.ny}")

    @property
    def j(self) -> int:
        """Number of grid points per snapshot."""
        return self.nx * self.ny


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """K time-equidistant snapshots of a scalar field on a 2-D grid."""

    grid: Grid2D
    dt: float
    data: np.ndarray  # (J, K) float64, read-only

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError(f"snapshot data must be 2-D, got shape {data.shape}")
        if data.shape[0] != self.grid.j:
            raise ValidationError(
                f"row count {data.shape[0]} does not match grid size {self.grid.j}"
            )
        if data.shape[1] < 1:
            raise ValidationError("need at least one snapshot")
        if not (self.dt > 0):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not np.isfinite(data).all():
            raise ValidationError("snapshot data contains non-finite values")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def k(self) -> int:
        """Number of snapshots."""
        return self.data.shape[1]

    def snapshot(self, k: int) -> np.ndarray:
        """Snapshot k as a read-only (ny, nx) view."""
        return self.data[:, k].reshape(self.grid.ny, self.grid.nx)

    def fields(self) -> np.ndarray:
        """All snapshots as a read-only (K, ny, nx) view."""
        return self.data.T.reshape(self.k, self.grid.ny, self.grid.nx)

    def with_data(self, data: np.ndarray) -> "SnapshotMatrix":
        """New matrix on the same grid and sampling interval."""
        return SnapshotMatrix(self.grid, self.dt, data)


def snapshots_from_fields(
    grid: Grid2D, dt: float, fields: np.ndarray
) -> SnapshotMatrix:
    """Build a SnapshotMatrix from a (K, ny, nx) stack of 2-D fields."""
    fields = np.asarray(fields, dtype=np.float64)
    if fields.ndim != 3 or fields.shape[1:] != (grid.ny, grid.nx):
        raise ValidationError(
            f"expected fields of shape (K, {grid.ny}, {grid.nx}), got {fields.shape}"
        )
    return SnapshotMatrix(grid, dt, fields.reshape(fields.shape[0], grid.j).T)


@dataclass(frozen=True)
class ScalingParams:
    """Global min/max of a fitting range, for [0, 1] min-max scaling."""

    min: float
    max: float


def _check_compatible(a: SnapshotMatrix, b: SnapshotMatrix, op: str) -> None:
    if a.grid != b.grid or a.k != b.k or a.dt != b.dt:
        raise ValueError(
            f"{op}: operands disagree "
            f"(grid {a.grid.nx}x{a.grid.ny} vs {b.grid.nx}x{b.grid.ny}, "
            f"K {a.k} vs {b.k}, dt {a.dt} vs {b.dt})"
        )


def downsample_columns(v: SnapshotMatrix, step: int) -> SnapshotMatrix:
    """Keep every step-th index along the normal axis (indices 0, step, ...).

    nx, K and dt are unchanged; ny becomes ceil(ny / step).
    """
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    if step > v.grid.ny:
        raise ValueError(f"step {step} exceeds normal-axis size {v.grid.ny}")
    if step == 1:
        return v
    kept = v.data.reshape(v.grid.ny, v.grid.nx, v.k)[::step]
    grid = Grid2D(v.grid.nx, kept.shape[0])
    return SnapshotMatrix(grid, v.dt, kept.reshape(grid.j, v.k))


def subtract_baseline(multi: SnapshotMatrix, single: SnapshotMatrix) -> SnapshotMatrix:
    """Elementwise multi - single (e.g. multiphase minus single-phase run)."""
    _check_compatible(multi, single, "subtract_baseline")
    return multi.with_data(multi.data - single.data)


def add_baseline(pred: SnapshotMatrix, single: SnapshotMatrix) -> SnapshotMatrix:
    """Elementwise pred + single; exact inverse of subtract_baseline."""
    _check_compatible(pred, single, "add_baseline")
    return pred.with_data(pred.data + single.data)


def fit_minmax(v: SnapshotMatrix) -> ScalingParams:
    """Global min/max of v.

    Callers fitting a forecaster must pass the training portion only and
    reuse the result on validation/test data.
    """
    lo = float(v.data.min())
    hi = float(v.data.max())
    if hi <= lo:
        raise DegenerateScalingError(
            f"cannot fit min-max scaling on constant data (value {lo})"
        )
    return ScalingParams(lo, hi)


def apply_minmax(v: SnapshotMatrix, p: ScalingParams) -> SnapshotMatrix:
    """Map x -> (x - min) / (max - min).  Out-of-range values map linearly."""
    if not (p.max > p.min):
        raise ValueError(f"scaling requires max > min, got [{p.min}, {p.max}]")
    return v.with_data((v.data - p.min) / (p.max - p.min))


def invert_minmax(v: SnapshotMatrix, p: ScalingParams) -> SnapshotMatrix:
    """Exact inverse of apply_minmax; no clamping."""
    if not (p.max > p.min):
        raise ValueError(f"scaling requires max > min, got [{p.min}, {p.max}]")
    return v.with_data(v.data * (p.max - p.min) + p.min)


def scale_array(x: np.ndarray, p: ScalingParams) -> np.ndarray:
    """apply_minmax on a bare array (model-side plumbing)."""
    return (x - p.min) / (p.max - p.min)


def unscale_array(x: np.ndarray, p: ScalingParams) -> np.ndarray:
    """invert_minmax on a bare array (model-side plumbing)."""
    return x * (p.max - p.min) + p.min


def write_snapshots(path, v: SnapshotMatrix) -> None:
    """Write the binary snapshot format (little-endian, bit-exact)."""
    header = _HEADER.pack(
        SNAPSHOT_MAGIC, SNAPSHOT_VERSION, v.grid.nx, v.grid.ny, v.k, v.dt
    )
    payload = np.ascontiguousarray(v.data.T, dtype="<f8")
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload.tobytes())


def read_snapshots(path) -> SnapshotMatrix:
    """Read the binary snapshot format written by write_snapshots."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise CorruptFileError(f"{path}: file shorter than header")
    magic, version, nx, ny, k, dt = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    expected = nx * ny * k * 8
    body = raw[_HEADER.size:]
    if len(body) != expected:
        raise CorruptFileError(
            f"{path}: payload is {len(body)} bytes, header declares {expected}"
        )
    data = np.frombuffer(body, dtype="<f8").reshape(k, nx * ny).T
    if not np.isfinite(data).all():
        raise ValidationError(f"{path}: payload contains non-finite values")
    return SnapshotMatrix(Grid2D(nx, ny), dt, data)


def export_csv(path, v: SnapshotMatrix) -> None:
    """Write snapshots as CSV rows `t,i,j,value` (t = sample index)."""
    nx, ny = v.grid.nx, v.grid.ny
    with open(path, "w", newline="") as f:
        f.write("t,i,j,value\n")
        for k in range(v.k):
            col = v.data[:, k]
            for j in range(ny):
                base = j * nx
                for i in range(nx):
                    f.write(f"{k},{i},{j},{col[base + i]:.17g}\n")


class MinMaxFieldScaler(BaseEstimator, TransformerMixin):
    """Min-max scaler over whole snapshot matrices.

    fit() records the global min/max of the matrix it is given (the training
    portion); transform()/inverse_transform() then map any compatible matrix
    into and out of the [0, 1] training range.
    """

    def fit(self, v: SnapshotMatrix, y=None):
        self.params_ = fit_minmax(v)
        return self

    def transform(self, v: SnapshotMatrix) -> SnapshotMatrix:
        self._check_fitted()
        return apply_minmax(v, self.params_)

    def inverse_transform(self, v: SnapshotMatrix) -> SnapshotMatrix:
        self._check_fitted()
        return invert_minmax(v, self.params_)

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("MinMaxFieldScaler must be fitted before use")
