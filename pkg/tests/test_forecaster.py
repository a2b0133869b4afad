"""Estimator front ends: fit/predict, scaling and baseline plumbing."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import flowcast as fc
from flowcast.errors import ConfigError
from flowcast.neural import cnn_arch, init_params, predict_two_ahead


def quick_flow(grid, k=60, seed=0):
    modes = (
        fc.ModeSpec(1.0, 0.0, 0.0, fc.Sinusoid(0, 0)),
        fc.ModeSpec(0.5, 0.0, 2 * np.pi / 0.9, fc.TravelingWave(1, 1)),
    )
    cfg = fc.SynthConfig(grid=grid, k=k, dt=0.1, modes=modes, noise_std=0.01, seed=seed)
    return fc.generate_flow(cfg)[0]


class TestRnnForecaster:
    def test_fit_predict_shapes(self):
        grid = fc.Grid2D(5, 4)
        v = quick_flow(grid)
        train_m, val_m, test_m = fc.split(v, fc.SplitSpec(40, 10, 10))
        est = fc.RnnForecaster(epochs=2, seed=0, early_stopping=False)
        est.fit(fc.rolling_windows(train_m, 4), fc.rolling_windows(val_m, 4))
        w_test = fc.rolling_windows(test_m, 4)
        pred = est.predict(w_test.input_window(0))
        assert pred.shape == (2, grid.j)
        batch = est.predict_dataset(w_test)
        assert batch.shape == (w_test.count, 2 * grid.j)
        assert np.allclose(batch[0].reshape(2, grid.j), pred)

    def test_get_params_round_trip_and_clone(self):
        est = fc.RnnForecaster(epochs=3, seed=9)
        params = est.get_params()
        assert params["epochs"] == 3 and params["seed"] == 9
        assert clone(est).get_params() == params

    def test_unfitted_predict_raises(self):
        with pytest.raises(NotFittedError):
            fc.RnnForecaster().predict(np.zeros((4, 10)))


class TestPredictTwoAhead:
    def _random_model(self, grid, q=10):
        arch = cnn_arch(grid, q=q)
        return arch, init_params(arch, seed=1)

    def test_identity_pipeline_equals_raw_forward(self):
        grid = fc.Grid2D(5, 4)
        v = quick_flow(grid)
        est = fc.RnnForecaster(epochs=1, seed=0, early_stopping=False)
        ds = fc.rolling_windows(v, 4)
        est.fit(ds, ds)
        window = ds.input_window(0)
        direct = est.predict_dataset(ds, [0]).reshape(2, grid.j)
        assert np.array_equal(est.predict(window), direct)

    def test_cnn_without_scaling_rejected(self):
        grid = fc.Grid2D(16, 16)
        arch, model = self._random_model(grid)
        window = np.zeros((grid.j, 10))
        with pytest.raises(ConfigError):
            predict_two_ahead(arch, model, window)

    def test_cnn_outputs_land_in_training_range(self, rng):
        # sigmoid head in [0, 1] maps into [min, max] after inversion
        grid = fc.Grid2D(16, 16)
        arch, model = self._random_model(grid)
        scaling = fc.ScalingParams(-2.0, 3.0)
        window = rng.standard_normal((grid.j, 10))
        pred = predict_two_ahead(arch, model, window, scaling=scaling)
        assert pred.min() >= -2.0 and pred.max() <= 3.0

    def test_baseline_readdition_is_exact(self, rng):
        grid = fc.Grid2D(5, 4)
        v = quick_flow(grid)
        est = fc.RnnForecaster(epochs=1, seed=0, early_stopping=False)
        ds = fc.rolling_windows(v, 4)
        est.fit(ds, ds)
        window = ds.input_window(3)
        baseline = rng.standard_normal((grid.j, 2))
        with_base = est.predict(window, baseline=baseline)
        without = est.predict(window)
        assert np.array_equal(with_base, without + baseline.T)

    def test_subtract_train_add_predict_round_trip(self, rng):
        # full preprocessing loop: train on (multi - single), predict, re-add
        grid = fc.Grid2D(5, 4)
        single = quick_flow(grid, seed=1)
        delta = quick_flow(grid, seed=2)
        multi = fc.add_baseline(delta, single)
        training_field = fc.subtract_baseline(multi, single)
        est = fc.RnnForecaster(epochs=2, seed=0, early_stopping=False)
        ds = fc.rolling_windows(training_field, 4)
        est.fit(ds, ds)
        i = 5
        base_cols = single.data[:, ds.target_indices(i)]
        pred_physical = est.predict(ds.input_window(i), baseline=base_cols)
        # prediction lives on the scale of the raw multiphase field
        truth = multi.data[:, ds.target_indices(i)].T
        assert fc.rrmse(pred_physical, truth) < 1.0

    def test_bad_window_shape_rejected(self):
        grid = fc.Grid2D(5, 4)
        est = fc.RnnForecaster(epochs=1, seed=0, early_stopping=False)
        v = quick_flow(grid)
        ds = fc.rolling_windows(v, 4)
        est.fit(ds, ds)
        with pytest.raises(ValueError):
            est.predict(np.zeros((grid.j, 7)))


class TestCnnForecaster:
    def test_fit_predict_on_scaled_data(self):
        grid = fc.Grid2D(16, 16)
        v = quick_flow(grid, k=40)
        train_m, val_m, test_m = fc.split(v, fc.SplitSpec(26, 7, 7))
        scaler = fc.MinMaxFieldScaler().fit(train_m)
        est = fc.CnnForecaster(epochs=1, seed=0, early_stopping=False)
        est.fit(
            fc.rolling_windows(scaler.transform(train_m), 10),
            fc.rolling_windows(scaler.transform(val_m), 10),
        )
        w_test = fc.rolling_windows(test_m, 10)
        pred = est.predict(w_test.input_window(0), scaling=scaler.params_)
        assert pred.shape == (2, grid.j)
        assert pred.min() >= scaler.params_.min
        assert pred.max() <= scaler.params_.max
