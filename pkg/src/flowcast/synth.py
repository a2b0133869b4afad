"""Synthetic flows with known modal content.

Fields are built directly from a modal expansion, so decomposition and
forecasting can be checked against exact ground truth.  Oscillatory modes
are emitted together with their complex conjugates, keeping the field real;
the returned ground truth lists both members of each pair, with spatial
patterns unit-RMS normalized and amplitudes rescaled to match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fields import Grid2D, SnapshotMatrix
from .hodmd import DmdMode, evaluate_expansion
from .linalg import rms_normalize


def _cell_centers(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    x = (np.arange(grid.nx) + 0.5) / grid.nx
    y = (np.arange(grid.ny) + 0.5) / grid.ny
    return np.meshgrid(x, y)  # shapes (ny, nx)


@dataclass(frozen=True)
class Sinusoid:
    """Real separable pattern cos(2 pi kx x + px) * cos(2 pi ky y + py).

    With kx = ky = 0 and zero phases this is the constant pattern.  Standing
    in time: a conjugate pair built on it shares one real spatial direction,
    which is exactly the regime where delay embedding is required.
    """

    kx: float = 0.0
    ky: float = 0.0
    phase_x: float = 0.0
    phase_y: float = 0.0

    def evaluate(self, grid: Grid2D) -> np.ndarray:
        x, y = _cell_centers(grid)
        return np.cos(2 * np.pi * self.kx * x + self.phase_x) * np.cos(
            2 * np.pi * self.ky * y + self.phase_y
        )


@dataclass(frozen=True)
class TravelingWave:
    """Complex pattern exp(i (2 pi (kx x + ky y) + phase)).

    Gives constant-in-time snapshot RMS for neutral modes (a traveling wave
    rather than a standing one).
    """

    kx: float = 1.0
    ky: float = 0.0
    phase: float = 0.0

    def evaluate(self, grid: Grid2D) -> np.ndarray:
        x, y = _cell_centers(grid)
        return np.exp(1j * (2 * np.pi * (self.kx * x + self.ky * y) + self.phase))


@dataclass(frozen=True)
class GaussianSinusoid:
    """Sinusoid under a Gaussian envelope centred at (x0, y0)."""

    kx: float = 1.0
    ky: float = 1.0
    x0: float = 0.5
    y0: float = 0.5
    sigma: float = 0.2
    phase_x: float = 0.0
    phase_y: float = 0.0

    def evaluate(self, grid: Grid2D) -> np.ndarray:
        x, y = _cell_centers(grid)
        envelope = np.exp(
            -((x - self.x0) ** 2 + (y - self.y0) ** 2) / (2 * self.sigma**2)
        )
        return (
            envelope
            * np.cos(2 * np.pi * self.kx * x + self.phase_x)
            * np.cos(2 * np.pi * self.ky * y + self.phase_y)
        )


SpatialPattern = Sinusoid | TravelingWave | GaussianSinusoid


@dataclass(frozen=True)
class ModeSpec:
    """One physical mode of the synthetic expansion.

    A nonzero frequency yields a conjugate pair (+omega and -omega), each
    carrying this amplitude.
    """

    amplitude: float
    growth_rate: float
    frequency: float
    pattern: SpatialPattern

    def __post_init__(self):
        values = (self.amplitude, self.growth_rate, self.frequency)
        if not all(math.isfinite(v) for v in values):
            raise ValidationError(f"mode parameters must be finite, got {values}")
        if self.amplitude < 0:
            raise ValidationError(f"amplitude must be >= 0, got {self.amplitude}")


@dataclass(frozen=True)
class SynthConfig:
    grid: Grid2D
    k: int
    dt: float
    modes: tuple[ModeSpec, ...]
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"need k >= 1 samples, got {self.k}")
        if not (self.dt > 0) or not math.isfinite(self.dt):
            raise ValidationError(f"dt must be positive and finite, got {self.dt}")
        if self.noise_std < 0 or not math.isfinite(self.noise_std):
            raise ValidationError(f"noise_std must be >= 0, got {self.noise_std}")


def ground_truth_modes(cfg: SynthConfig) -> tuple[DmdMode, ...]:
    """Expand the configured modes into unit-RMS DmdModes (with conjugates)."""
    modes: list[DmdMode] = []
    for spec in cfg.modes:
        pattern = spec.pattern.evaluate(cfg.grid).reshape(cfg.grid.j)
        normalized, scale = rms_normalize(pattern.astype(np.complex128))
        amplitude = spec.amplitude * scale
        if spec.frequency == 0.0:
            modes.append(
                DmdMode(normalized, amplitude, spec.growth_rate, 0.0, 0.0)
            )
        else:
            for omega, u in (
                (spec.frequency, normalized),
                (-spec.frequency, normalized.conj()),
            ):
                modes.append(DmdMode(u, amplitude, spec.growth_rate, omega, 0.0))
    return tuple(modes)


def generate_flow(cfg: SynthConfig) -> tuple[SnapshotMatrix, tuple[DmdMode, ...]]:
    """Evaluate the expansion at t_k = k dt and add seeded Gaussian noise."""
    truth = ground_truth_modes(cfg)
    times = cfg.dt * np.arange(cfg.k)
    data = evaluate_expansion(truth, times).real
    if cfg.noise_std > 0:
        rng = np.random.default_rng(cfg.seed)
        data = data + cfg.noise_std * rng.standard_normal(data.shape)
    return SnapshotMatrix(cfg.grid, cfg.dt, data), truth


def persistence_baseline(v: SnapshotMatrix, q: int) -> SnapshotMatrix:
    """Naive forecaster: repeat the last seen snapshot for both horizons.

    For each rolling-window position i (inputs [i, i+q), targets i+q and
    i+q+1) the prediction for both targets is snapshot i+q-1.  Output
    columns are ordered (window 0 h1, window 0 h2, window 1 h1, ...).
    """
    if q < 1:
        raise ValueError(f"window length must be >= 1, got {q}")
    if v.k < q + 2:
        raise ValueError(f"need K >= q + 2, got K={v.k} with q={q}")
    n_windows = v.k - q - 1
    last_seen = v.data[:, q - 1 : q - 1 + n_windows]
    preds = np.repeat(last_seen, 2, axis=1)
    return SnapshotMatrix(v.grid, v.dt, preds)
