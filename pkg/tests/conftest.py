"""Shared fixtures: small deterministic flows used across the suite."""

import numpy as np
import pytest

import flowcast as fc


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_matrix(rng):
    grid = fc.Grid2D(4, 3)
    return fc.SnapshotMatrix(grid, 0.5, rng.standard_normal((grid.j, 6)))


def five_mode_config(grid=None, k=200, dt=0.1, noise_std=0.0, seed=0):
    """Steady mode plus two standing conjugate pairs (five modes total).

    Standing patterns share one spatial direction per pair, so the spatial
    rank (3) is below the mode count (5): the delay-embedding regime.
    """
    grid = grid or fc.Grid2D(40, 40)
    modes = (
        fc.ModeSpec(1.0, 0.0, 0.0, fc.Sinusoid(0, 0)),
        fc.ModeSpec(0.6, 0.0, 2 * np.pi / 1.3, fc.Sinusoid(1, 2)),
        fc.ModeSpec(0.25, -0.05, 2 * np.pi / 0.7, fc.Sinusoid(2, 1, 0.4, 0.9)),
    )
    return fc.SynthConfig(
        grid=grid, k=k, dt=dt, modes=modes, noise_std=noise_std, seed=seed
    )


@pytest.fixture(scope="session")
def five_mode_flow():
    cfg = five_mode_config()
    v, truth = fc.generate_flow(cfg)
    return cfg, v, truth
