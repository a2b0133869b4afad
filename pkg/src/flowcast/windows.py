"""Temporal splitting and rolling-window extraction for the forecasters.

Splits are consecutive, order-preserving blocks; windows are built per
split after splitting, so no window ever straddles a split boundary and
training targets can never leak out of the training block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import SnapshotMatrix


@dataclass(frozen=True)
class SplitSpec:
    """Sample counts of the three consecutive splits."""

    k_training: int
    k_validation: int
    k_test: int

    def __post_init__(self):
        for name in ("k_training", "k_validation", "k_test"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.k_training + self.k_validation + self.k_test


def split(
    v: SnapshotMatrix, spec: SplitSpec
) -> tuple[SnapshotMatrix, SnapshotMatrix, SnapshotMatrix]:
    """Partition columns into (train, val, test) blocks, in order."""
    if spec.total != v.k:
        raise ValueError(
            f"split sizes sum to {spec.total} but the matrix has K={v.k}"
        )
    a, b = spec.k_training, spec.k_training + spec.k_validation
    return (
        v.with_data(v.data[:, :a]),
        v.with_data(v.data[:, a:b]),
        v.with_data(v.data[:, b:]),
    )


def window_count(k_sub: int, q: int, horizon: int = 2) -> int:
    """Number of rolling windows with offset 1 in k_sub samples."""
    return max(0, k_sub - q - horizon + 1)


@dataclass(frozen=True, eq=False)
class WindowedDataset:
    """Rolling windows of q input snapshots plus `horizon` target snapshots.

    Window i covers source columns [i, i+q) with targets
    {i+q, ..., i+q+horizon-1}.  Accessors return read-only views into the
    source matrix, not copies.
    """

    source: SnapshotMatrix
    q: int
    horizon: int = 2
    source_range: str = ""

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"window length must be >= 1, got {self.q}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    @property
    def count(self) -> int:
        return window_count(self.source.k, self.q, self.horizon)

    def __len__(self) -> int:
        return self.count

    def input_window(self, i: int) -> np.ndarray:
        """(J, q) view of the inputs of window i."""
        self._check_index(i)
        return self.source.data[:, i : i + self.q]

    def target_window(self, i: int) -> np.ndarray:
        """(J, horizon) view of the targets of window i."""
        self._check_index(i)
        return self.source.data[:, i + self.q : i + self.q + self.horizon]

    def target_indices(self, i: int) -> tuple[int, ...]:
        """Source column indices of the targets of window i."""
        self._check_index(i)
        return tuple(range(i + self.q, i + self.q + self.horizon))

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.count:
            raise IndexError(f"window {i} out of range [0, {self.count})")


def rolling_windows(
    v: SnapshotMatrix, q: int, horizon: int = 2, source_range: str = ""
) -> WindowedDataset:
    """Windows with offset 1; empty (count 0) when K < q + horizon."""
    return WindowedDataset(source=v, q=q, horizon=horizon, source_range=source_range)
