"""Synthetic flow generation against closed-form pointwise oracles."""

import numpy as np
import pytest

import flowcast as fc
from flowcast.errors import ValidationError
from flowcast.hodmd import evaluate_expansion

from conftest import five_mode_config


class TestPatterns:
    def test_constant_pattern(self):
        grid = fc.Grid2D(4, 3)
        assert np.array_equal(fc.Sinusoid(0, 0).evaluate(grid), np.ones((3, 4)))

    def test_sinusoid_matches_pointwise_formula(self):
        grid = fc.Grid2D(5, 4)
        pattern = fc.Sinusoid(2, 1, 0.3, -0.2).evaluate(grid)
        for iy in range(4):
            for ix in range(5):
                x = (ix + 0.5) / 5
                y = (iy + 0.5) / 4
                expected = np.cos(2 * np.pi * 2 * x + 0.3) * np.cos(
                    2 * np.pi * 1 * y - 0.2
                )
                assert pattern[iy, ix] == pytest.approx(expected, abs=1e-15)

    def test_traveling_wave_has_unit_modulus(self):
        grid = fc.Grid2D(6, 6)
        pattern = fc.TravelingWave(2, 3, 0.7).evaluate(grid)
        assert np.allclose(np.abs(pattern), 1.0)

    def test_gaussian_envelope_peaks_at_center(self):
        grid = fc.Grid2D(21, 21)
        pattern = fc.GaussianSinusoid(0, 0, x0=0.5, y0=0.5, sigma=0.1).evaluate(grid)
        assert pattern.max() == pattern[10, 10]


class TestGenerateFlow:
    def test_stationary_constant_mode(self):
        grid = fc.Grid2D(3, 3)
        cfg = fc.SynthConfig(
            grid, k=5, dt=1.0, modes=(fc.ModeSpec(1.0, 0.0, 0.0, fc.Sinusoid(0, 0)),)
        )
        v, truth = fc.generate_flow(cfg)
        assert len(truth) == 1
        assert np.array_equal(v.data, np.ones((9, 5)))

    def test_conjugate_pair_oscillates_with_period_ten(self):
        dt = 0.2
        omega = 2 * np.pi / (10 * dt)
        grid = fc.Grid2D(4, 4)
        spec = fc.ModeSpec(0.7, 0.0, omega, fc.Sinusoid(1, 1, 0.2, 0.5))
        cfg = fc.SynthConfig(grid, k=40, dt=dt, modes=(spec,))
        v, truth = fc.generate_flow(cfg)
        assert len(truth) == 2  # the pair is emitted explicitly
        # closed-form pointwise oracle: 2 a' u(x) cos(omega t)
        pattern = spec.pattern.evaluate(grid).reshape(-1)
        rho = np.sqrt((pattern**2).mean())
        for k in (0, 3, 17):
            t = k * dt
            expected = 2 * (0.7 * rho) * (pattern / rho) * np.cos(omega * t)
            assert np.allclose(v.data[:, k], expected, rtol=0, atol=1e-12)
        # period of ten samples
        assert np.allclose(v.data[:, 0:30], v.data[:, 10:40], rtol=0, atol=1e-9)

    def test_decay_envelope_matches_exponential(self):
        # traveling pattern keeps the spatial RMS constant, isolating decay
        delta = -0.1
        grid = fc.Grid2D(8, 8)
        spec = fc.ModeSpec(0.9, delta, 2 * np.pi / 3.7, fc.TravelingWave(1, 2))
        cfg = fc.SynthConfig(grid, k=60, dt=0.25, modes=(spec,))
        v, _ = fc.generate_flow(cfg)
        rms = np.sqrt((v.data**2).mean(axis=0))
        expected = rms[0] * np.exp(delta * 0.25 * np.arange(60))
        assert np.allclose(rms, expected, rtol=1e-10, atol=0)

    def test_realness_of_expansion(self, five_mode_flow):
        cfg, v, truth = five_mode_flow
        times = cfg.dt * np.arange(cfg.k)
        complex_field = evaluate_expansion(truth, times)
        rms = np.sqrt((complex_field.real**2).mean())
        assert np.abs(complex_field.imag).max() <= 1e-12 * rms

    def test_energy_constant_for_neutral_traveling_modes(self):
        grid = fc.Grid2D(10, 10)
        cfg = fc.SynthConfig(
            grid,
            k=50,
            dt=0.1,
            modes=(
                fc.ModeSpec(1.0, 0.0, 2.1, fc.TravelingWave(1, 0)),
                fc.ModeSpec(0.4, 0.0, 5.3, fc.TravelingWave(2, 1)),
            ),
        )
        v, _ = fc.generate_flow(cfg)
        rms = np.sqrt((v.data**2).mean(axis=0))
        assert np.abs(rms / rms[0] - 1.0).max() <= 1e-10

    def test_ground_truth_is_unit_rms_with_rescaled_amplitude(self):
        grid = fc.Grid2D(12, 12)
        spec = fc.ModeSpec(0.8, 0.0, 1.5, fc.Sinusoid(1, 2))
        cfg = fc.SynthConfig(grid, k=4, dt=1.0, modes=(spec,))
        _, truth = fc.generate_flow(cfg)
        pattern = spec.pattern.evaluate(grid).reshape(-1)
        rho = np.sqrt((pattern**2).mean())
        for mode in truth:
            assert np.sqrt((np.abs(mode.spatial) ** 2).mean()) == pytest.approx(1.0)
            assert mode.amplitude == pytest.approx(0.8 * rho, rel=1e-12)

    def test_seed_reproducibility(self):
        cfg = five_mode_config(grid=fc.Grid2D(6, 6), k=12, noise_std=0.1, seed=9)
        v1, _ = fc.generate_flow(cfg)
        v2, _ = fc.generate_flow(cfg)
        assert np.array_equal(v1.data, v2.data)
        other = five_mode_config(grid=fc.Grid2D(6, 6), k=12, noise_std=0.1, seed=10)
        v3, _ = fc.generate_flow(other)
        assert not np.array_equal(v1.data, v3.data)

    def test_non_finite_parameters_rejected(self):
        with pytest.raises(ValidationError):
            fc.ModeSpec(np.nan, 0.0, 0.0, fc.Sinusoid(0, 0))
        with pytest.raises(ValidationError):
            fc.ModeSpec(-1.0, 0.0, 0.0, fc.Sinusoid(0, 0))
        with pytest.raises(ValidationError):
            fc.SynthConfig(fc.Grid2D(2, 2), 4, 1.0, (), noise_std=-0.5)


class TestPersistenceBaseline:
    def test_constant_flow_has_zero_error(self):
        grid = fc.Grid2D(2, 2)
        v = fc.SnapshotMatrix(grid, 1.0, np.ones((4, 9)))
        pred = fc.persistence_baseline(v, q=3)
        windows = fc.rolling_windows(v, q=3)
        for i in range(windows.count):
            assert np.array_equal(
                pred.data[:, 2 * i : 2 * i + 2], windows.target_window(i)
            )

    def test_columns_are_exact_copies(self, rng):
        grid = fc.Grid2D(3, 3)
        v = fc.SnapshotMatrix(grid, 1.0, rng.standard_normal((9, 12)))
        q = 4
        pred = fc.persistence_baseline(v, q)
        for i in range(v.k - q - 1):
            assert np.array_equal(pred.data[:, 2 * i], v.data[:, i + q - 1])
            assert np.array_equal(pred.data[:, 2 * i + 1], v.data[:, i + q - 1])

    def test_two_state_flow_error_matches_hand_computation(self):
        # alternating A, B, A, B ...: horizon 1 misses by ||A - B||,
        # horizon 2 is exact
        grid = fc.Grid2D(2, 1)
        a = np.array([1.0, 2.0])
        b = np.array([-1.0, 0.5])
        data = np.column_stack([a if k % 2 == 0 else b for k in range(10)])
        v = fc.SnapshotMatrix(grid, 1.0, data)
        q = 4
        pred = fc.persistence_baseline(v, q)
        windows = fc.rolling_windows(v, q)
        for i in range(windows.count):
            truth = windows.target_window(i)
            got = fc.rrmse(pred.data[:, 2 * i : 2 * i + 2], truth)
            expected = np.linalg.norm(a - b) / np.linalg.norm(truth)
            assert got == pytest.approx(expected, rel=1e-12)

    def test_too_few_snapshots_rejected(self):
        v = fc.SnapshotMatrix(fc.Grid2D(2, 1), 1.0, np.ones((2, 5)))
        with pytest.raises(ValueError):
            fc.persistence_baseline(v, q=4)
