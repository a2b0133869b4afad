"""Delay-embedded dynamic mode decomposition and reduced-order models.

The decomposition expands a snapshot sequence as a sum of complex spatial
modes, each with a non-negative amplitude, a phase, a growth rate and an
angular frequency:

    v_k  ~=  Re[ sum_m  a_m e^{i phi_m} u_m e^{(delta_m + i omega_m) t_k} ]

Modes are unit-RMS normalized.  Delay embedding (window d) makes the fit
well-posed when the number of temporal modes exceeds the spatial rank of
the data, which is where plain one-step DMD breaks down.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import CorruptFileError, DataFormatError, EmptySpectrumError
from .fields import Grid2D, SnapshotMatrix
from .linalg import eig_dense, lstsq, rms_normalize, truncated_svd

ROM_MAGIC = b"MPJR"
ROM_VERSION = 1

# Published per-case parameter choices, keyed by geometry and phase content.
PRESETS: dict[str, dict[str, float | int]] = {
    "simple-singlephase": {"d": 100, "eps": 7e-3, "eps1": 7e-3},
    "simple-multiphase": {"d": 60, "eps": 7e-3, "eps1": 7e-3},
    "modified-singlephase": {"d": 60, "eps": 2e-3, "eps1": 2e-3},
    "modified-multiphase-nost": {"d": 100, "eps": 8e-3, "eps1": 8e-3},
    "modified-multiphase-st": {"d": 100, "eps": 5e-3, "eps1": 5e-3},
}


@dataclass(frozen=True)
class HodmdConfig:
    """Tunables of the decomposition: delay window and the two tolerances."""

    d: int
    eps1: float
    eps: float
    dt: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"delay window must be >= 1, got {self.d}")
        if not (0 < self.eps1 < 1):
            raise ValueError(f"eps1 must lie in (0, 1), got {self.eps1}")
        if not (0 < self.eps < 1):
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if not (self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True, eq=False)
class DmdMode:
    """One term of the modal expansion."""

    spatial: np.ndarray  # complex, length J, unit RMS
    amplitude: float
    growth_rate: float
    frequency: float
    phase: float

    def __post_init__(self):
        spatial = np.ascontiguousarray(self.spatial, dtype=np.complex128)
        rms = np.linalg.norm(spatial) / np.sqrt(spatial.size)
        if abs(rms - 1.0) > 1e-10:
            raise ValueError(f"spatial mode must have unit RMS, got {rms}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        spatial.flags.writeable = False
        object.__setattr__(self, "spatial", spatial)


@dataclass(frozen=True, eq=False)
class HodmdResult:
    """Retained modes plus the two complexity measures of the fit."""

    modes: tuple[DmdMode, ...]
    spatial_complexity: int
    t0: float

    @property
    def spectral_complexity(self) -> int:
        return len(self.modes)


@dataclass(frozen=True, eq=False)
class Rom:
    """A reduced-order model: retained modes bound to a grid and time step."""

    result: HodmdResult
    dt: float
    grid: Grid2D


def evaluate_expansion(
    modes: tuple[DmdMode, ...] | list[DmdMode], times: np.ndarray
) -> np.ndarray:
    """Complex modal expansion evaluated at the given times; shape (J, T)."""
    times = np.asarray(times, dtype=np.float64)
    u = np.column_stack([m.spatial for m in modes])  # (J, M)
    coeff = np.array(
        [m.amplitude * np.exp(1j * m.phase) for m in modes], dtype=np.complex128
    )
    rates = np.array(
        [m.growth_rate + 1j * m.frequency for m in modes], dtype=np.complex128
    )
    e = np.exp(np.outer(rates, times))  # (M, T)
    return u @ (coeff[:, None] * e)


def hodmd_decompose(v: SnapshotMatrix, cfg: HodmdConfig) -> HodmdResult:
    """Decompose a snapshot matrix into amplitude-filtered DMD modes.

    Pipeline: dimension-reducing SVD (tolerance eps1), d-fold delay stacking
    of the reduced snapshots, a second eps1-truncated SVD, a least-squares
    one-step operator, its eigendecomposition, lifting of the eigenvectors
    back to the full space with unit-RMS normalization, a least-squares
    amplitude fit over all K snapshots, and finally amplitude filtering at
    relative tolerance eps.
    """
    k = v.k
    d = cfg.d
    if k <= d + 1:
        raise ValueError(f"need K >= d + 2 snapshots, got K={k} with d={d}")
    if not v.data.any():
        raise EmptySpectrumError("cannot decompose an all-zero snapshot matrix")

    # Stage 1: spatial dimension reduction.
    svd1 = truncated_svd(v.data, cfg.eps1)
    n_spatial = svd1.rank
    reduced = svd1.s[:, None] * svd1.vt  # (N, K)

    # Stage 2: delay embedding of the reduced snapshots.
    n_cols = k - d + 1
    stacked = np.vstack([reduced[:, i : i + n_cols] for i in range(d)])

    # Stage 3: second reduction and the one-step propagation operator.
    svd2 = truncated_svd(stacked, cfg.eps1)
    reduced2 = svd2.s[:, None] * svd2.vt  # (r, K-d+1)
    op = lstsq(reduced2[:, :-1].T, reduced2[:, 1:].T).T

    # Stage 4: eigenvalues -> continuous-time growth rates and frequencies.
    pairs = eig_dense(op)
    mu = pairs.values
    keep = np.abs(mu) > 0  # a zero eigenvalue carries no dynamics
    mu = mu[keep]
    if mu.size == 0:
        raise EmptySpectrumError("operator spectrum is empty")
    deltas = np.log(np.abs(mu)) / cfg.dt
    omegas = np.angle(mu) / cfg.dt

    # Stage 5: lift eigenvectors to the full space and normalize.
    delayed = svd2.u @ pairs.vectors[:, keep]  # (d*N, M0)
    lifted = svd1.u @ delayed[:n_spatial, :]  # (J, M0)
    spatial = np.empty_like(lifted)
    for m in range(lifted.shape[1]):
        spatial[:, m], _ = rms_normalize(lifted[:, m])

    # Stage 6: complex amplitude fit over all K snapshots, in the reduced
    # coordinates (the modes lie in the span of svd1.u, so this is exact).
    reduced_modes = svd1.u.conj().T @ spatial  # (N, M0)
    times = cfg.dt * np.arange(k)  # time origin fixed at the first snapshot
    e = np.exp(np.outer(deltas + 1j * omegas, times))  # (M0, K)
    design = (reduced_modes[None, :, :] * e.T[:, None, :]).reshape(
        k * n_spatial, -1
    )
    rhs = reduced.T.reshape(-1).astype(np.complex128)
    coeff = lstsq(design, rhs)
    amplitudes = np.abs(coeff)
    phases = np.angle(coeff)

    # Stage 7: amplitude filtering and ordering.
    a_max = amplitudes.max()
    if a_max == 0:
        raise EmptySpectrumError("all fitted amplitudes are zero")
    retained = np.nonzero(amplitudes / a_max >= cfg.eps)[0]
    order = retained[
        np.lexsort(
            (
                np.sign(omegas[retained]),
                np.abs(omegas[retained]),
                -amplitudes[retained],
            )
        )
    ]
    modes = tuple(
        DmdMode(
            spatial=spatial[:, m],
            amplitude=float(amplitudes[m]),
            growth_rate=float(deltas[m]),
            frequency=float(omegas[m]),
            phase=float(phases[m]),
        )
        for m in order
    )
    return HodmdResult(modes=modes, spatial_complexity=n_spatial, t0=0.0)


def rom_reconstruct(rom: Rom, t_indices) -> SnapshotMatrix:
    """Evaluate the retained expansion at sample indices; real part only."""
    if not rom.result.modes:
        raise ValueError("cannot reconstruct from an empty mode list")
    t_indices = np.asarray(t_indices, dtype=np.int64)
    times = rom.result.t0 + rom.dt * t_indices
    return SnapshotMatrix(
        rom.grid, rom.dt, evaluate_expansion(rom.result.modes, times).real
    )


def reconstruct_complex(rom: Rom, t_indices) -> np.ndarray:
    """Like rom_reconstruct but keeps the (J, T) complex expansion."""
    if not rom.result.modes:
        raise ValueError("cannot reconstruct from an empty mode list")
    t_indices = np.asarray(t_indices, dtype=np.int64)
    return evaluate_expansion(rom.result.modes, rom.result.t0 + rom.dt * t_indices)


def strouhal(omega: float, h: float, u: float) -> float:
    """Dimensionless frequency omega * h / (2 pi u)."""
    if u == 0:
        raise ValueError("characteristic velocity must be nonzero")
    return omega * h / (2.0 * np.pi * u)


def modes_to_rows(
    modes, h: float = 1.0, u: float = 1.0
) -> list[tuple[int, float, float, float, float, float, float]]:
    """Mode-table rows (m, amp_norm, amplitude, delta, omega, strouhal,
    phase), sorted by descending amplitude (ties: ascending |omega|, then
    sign)."""
    if not modes:
        raise ValueError("mode table of an empty mode list")
    amps = np.array([m.amplitude for m in modes])
    omegas = np.array([m.frequency for m in modes])
    order = np.lexsort((np.sign(omegas), np.abs(omegas), -amps))
    a_max = amps[order[0]]
    return [
        (
            rank + 1,
            modes[i].amplitude / a_max,
            modes[i].amplitude,
            modes[i].growth_rate,
            modes[i].frequency,
            strouhal(modes[i].frequency, h, u),
            modes[i].phase,
        )
        for rank, i in enumerate(order)
    ]


def mode_table(
    result: HodmdResult, h: float = 1.0, u: float = 1.0
) -> list[tuple[int, float, float, float, float, float, float]]:
    """Rows of modes_to_rows for a decomposition result; the first row has
    normalized amplitude exactly 1."""
    if not result.modes:
        raise ValueError("mode table of an empty result")
    return modes_to_rows(result.modes, h, u)


MODE_CSV_HEADER = "m,amp_norm,amplitude,delta,omega,strouhal,phase"


def write_mode_csv(path, rows) -> None:
    """Write mode-table rows with 17 significant digits per float."""
    with open(path, "w", newline="") as f:
        f.write(MODE_CSV_HEADER + "\n")
        for row in rows:
            m, *floats = row
            f.write(str(m) + "," + ",".join(f"{x:.17g}" for x in floats) + "\n")


_ROM_HEADER = struct.Struct("<4sIIIIIdd")


def write_rom(path, rom: Rom) -> None:
    """Write the binary ROM checkpoint (little-endian, bit-exact)."""
    res = rom.result
    header = _ROM_HEADER.pack(
        ROM_MAGIC,
        ROM_VERSION,
        rom.grid.nx,
        rom.grid.ny,
        res.spatial_complexity,
        res.spectral_complexity,
        rom.dt,
        res.t0,
    )
    with open(path, "wb") as f:
        f.write(header)
        for mode in res.modes:
            f.write(
                struct.pack(
                    "<dddd",
                    mode.amplitude,
                    mode.phase,
                    mode.growth_rate,
                    mode.frequency,
                )
            )
            f.write(np.ascontiguousarray(mode.spatial, dtype="<c16").tobytes())


def read_rom(path) -> Rom:
    """Read a ROM checkpoint written by write_rom."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _ROM_HEADER.size:
        raise CorruptFileError(f"{path}: file shorter than header")
    magic, version, nx, ny, n, m, dt, t0 = _ROM_HEADER.unpack_from(raw)
    if magic != ROM_MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    if version != ROM_VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    grid = Grid2D(nx, ny)
    per_mode = 4 * 8 + grid.j * 16
    body = raw[_ROM_HEADER.size:]
    if len(body) != m * per_mode:
        raise CorruptFileError(
            f"{path}: payload is {len(body)} bytes, header declares {m * per_mode}"
        )
    modes = []
    offset = 0
    for _ in range(m):
        amplitude, phase, delta, omega = struct.unpack_from("<dddd", body, offset)
        offset += 32
        spatial = np.frombuffer(body, dtype="<c16", count=grid.j, offset=offset)
        offset += grid.j * 16
        modes.append(
            DmdMode(
                spatial=spatial,
                amplitude=amplitude,
                growth_rate=delta,
                frequency=omega,
                phase=phase,
            )
        )
    result = HodmdResult(modes=tuple(modes), spatial_complexity=n, t0=t0)
    return Rom(result=result, dt=dt, grid=grid)


class Hodmd(BaseEstimator):
    """Estimator-style front end for the decomposition.

    Parameters mirror HodmdConfig; the sampling interval is taken from the
    snapshot matrix passed to fit().  After fitting, `result_` holds the
    retained modes and `rom_` the reduced-order model.
    """

    def __init__(self, d: int = 10, eps: float = 1e-3, eps1: float = 1e-3):
        self.d = d
        self.eps = eps
        self.eps1 = eps1

    def fit(self, v: SnapshotMatrix, y=None):
        cfg = HodmdConfig(d=self.d, eps1=self.eps1, eps=self.eps, dt=v.dt)
        self.result_ = hodmd_decompose(v, cfg)
        self.rom_ = Rom(result=self.result_, dt=v.dt, grid=v.grid)
        return self

    def reconstruct(self, t_indices) -> SnapshotMatrix:
        self._check_fitted()
        return rom_reconstruct(self.rom_, t_indices)

    def mode_table(self, h: float = 1.0, u: float = 1.0):
        self._check_fitted()
        return mode_table(self.result_, h, u)

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("Hodmd must be fitted before use")
