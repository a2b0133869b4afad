"""Training loop behaviour: stopping rules, determinism, divergence,
checkpoint round trips."""

import numpy as np
import pytest

import flowcast as fc
from flowcast.errors import CorruptFileError, DataFormatError, TrainingDivergedError
from flowcast.neural import (
    TrainConfig,
    read_checkpoint,
    rnn_arch,
    train,
    write_checkpoint,
    write_report_csv,
)
from flowcast.neural import training as training_mod
from flowcast.neural.arch import ArchSpec, Dense, Lstm


def tiny_flow(k=40, seed=0, grid=None):
    grid = grid or fc.Grid2D(4, 4)
    modes = (
        fc.ModeSpec(1.0, 0.0, 0.0, fc.Sinusoid(0, 0)),
        fc.ModeSpec(0.5, 0.0, 2 * np.pi / 0.9, fc.TravelingWave(1, 1)),
    )
    cfg = fc.SynthConfig(grid=grid, k=k, dt=0.1, modes=modes, noise_std=0.01, seed=seed)
    v, _ = fc.generate_flow(cfg)
    return v


def tiny_arch(grid):
    return ArchSpec(
        "rnn", grid, 4, (Lstm(8), Dense(6, "relu"), Dense(2 * grid.j, "linear"))
    )


def tiny_datasets(k=40, q=4):
    v = tiny_flow(k)
    train_m, val_m, _ = fc.split(v, fc.SplitSpec(k - 16, 8, 8))
    return (
        fc.rolling_windows(train_m, q, source_range="train"),
        fc.rolling_windows(val_m, q, source_range="val"),
        v.grid,
    )


class TestEarlyStopping:
    def test_monotone_rising_validation_stops_after_patience(self, monkeypatch):
        losses = iter(range(1, 100))
        monkeypatch.setattr(
            training_mod, "_validation_loss", lambda *a, **k: float(next(losses))
        )
        w_train, w_val, grid = tiny_datasets()
        cfg = TrainConfig(epochs=50, patience=3, seed=0)
        _, report = train(tiny_arch(grid), w_train, w_val, cfg)
        assert report.stopping_epoch == 1 + cfg.patience
        assert report.best_epoch == 1
        assert report.stopping_reason == "early-stop"

    def test_disabled_early_stopping_runs_all_epochs(self, monkeypatch):
        losses = iter(range(1, 100))
        monkeypatch.setattr(
            training_mod, "_validation_loss", lambda *a, **k: float(next(losses))
        )
        w_train, w_val, grid = tiny_datasets()
        cfg = TrainConfig(epochs=6, patience=2, early_stopping=False, seed=0)
        _, report = train(tiny_arch(grid), w_train, w_val, cfg)
        assert report.stopping_epoch == 6
        assert report.stopping_reason == "max-epochs"
        assert len(report.train_loss) == len(report.val_loss) == 6

    def test_returns_best_epoch_parameters(self, monkeypatch):
        # validation dips at epoch 2 then rises: the epoch-2 snapshot must be
        # returned, which equals a plain 2-epoch run with the same seed
        w_train, w_val, grid = tiny_datasets()
        reference, _ = train(
            tiny_arch(grid),
            w_train,
            w_val,
            TrainConfig(epochs=2, seed=1, early_stopping=False),
        )
        scripted = iter([5.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        monkeypatch.setattr(
            training_mod, "_validation_loss", lambda *a, **k: next(scripted)
        )
        cfg = TrainConfig(epochs=20, patience=4, seed=1)
        model, report = train(tiny_arch(grid), w_train, w_val, cfg)
        assert report.best_epoch == 2
        assert report.stopping_epoch == 6  # 2 + patience
        for l1, l2 in zip(model.params, reference.params):
            for key in l1:
                assert np.array_equal(l1[key], l2[key])


class TestTraining:
    def test_loss_decreases_on_learnable_flow(self):
        w_train, w_val, grid = tiny_datasets(k=60)
        cfg = TrainConfig(
            epochs=15,
            seed=0,
            early_stopping=False,
            adam=fc.neural.AdamParams(alpha=0.01),
        )
        _, report = train(tiny_arch(grid), w_train, w_val, cfg)
        assert report.train_loss[-1] < report.train_loss[0] / 5

    def test_empty_datasets_rejected(self):
        w_train, w_val, grid = tiny_datasets()
        empty = fc.rolling_windows(tiny_flow(k=5), q=4)
        with pytest.raises(ValueError):
            train(tiny_arch(grid), empty, w_val, TrainConfig(epochs=1))
        with pytest.raises(ValueError):
            train(tiny_arch(grid), w_train, empty, TrainConfig(epochs=1))

    def test_nan_loss_raises_with_epoch(self, monkeypatch):
        monkeypatch.setattr(
            training_mod,
            "loss_and_grads",
            lambda *a, **k: (float("nan"), None, None),
        )
        w_train, w_val, grid = tiny_datasets()
        with pytest.raises(TrainingDivergedError) as err:
            train(tiny_arch(grid), w_train, w_val, TrainConfig(epochs=3, seed=0))
        assert err.value.epoch == 1

    def test_seeded_determinism(self):
        w_train, w_val, grid = tiny_datasets()
        cfg = TrainConfig(epochs=3, seed=7, early_stopping=False)
        m1, r1 = train(tiny_arch(grid), w_train, w_val, cfg)
        m2, r2 = train(tiny_arch(grid), w_train, w_val, cfg)
        assert r1.train_loss == r2.train_loss
        assert r1.val_loss == r2.val_loss
        for l1, l2 in zip(m1.params, m2.params):
            for key in l1:
                assert np.array_equal(l1[key], l2[key])

    def test_different_seed_differs(self):
        w_train, w_val, grid = tiny_datasets()
        m1, _ = train(
            tiny_arch(grid), w_train, w_val, TrainConfig(epochs=2, seed=1, early_stopping=False)
        )
        m2, _ = train(
            tiny_arch(grid), w_train, w_val, TrainConfig(epochs=2, seed=2, early_stopping=False)
        )
        assert not np.array_equal(m1.params[0]["w"], m2.params[0]["w"])

    def test_report_csv(self, tmp_path):
        w_train, w_val, grid = tiny_datasets()
        _, report = train(
            tiny_arch(grid), w_train, w_val, TrainConfig(epochs=2, seed=0, early_stopping=False)
        )
        path = tmp_path / "report.csv"
        write_report_csv(path, report)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,train_loss,val_loss"
        assert len(lines) == 3
        assert float(lines[1].split(",")[1]) == pytest.approx(report.train_loss[0])


class TestCheckpoint:
    def _trained(self):
        w_train, w_val, grid = tiny_datasets()
        arch = rnn_arch(grid, q=4)
        model, _ = train(
            arch, w_train, w_val, TrainConfig(epochs=1, seed=0, early_stopping=False)
        )
        return arch, model

    def test_round_trip_byte_exact(self, tmp_path):
        arch, model = self._trained()
        p1, p2 = tmp_path / "a.mpjn", tmp_path / "b.mpjn"
        write_checkpoint(p1, arch, model)
        arch2, model2 = read_checkpoint(p1)
        assert arch2 == arch
        for l1, l2 in zip(model.params, model2.params):
            for key in l1:
                assert np.array_equal(l1[key], l2[key])
        for s1, s2 in zip(model.state, model2.state):
            for key in s1:
                assert np.array_equal(s1[key], s2[key])
        write_checkpoint(p2, arch2, model2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.mpjn"
        path.write_bytes(b"XXXX" + bytes(20))
        with pytest.raises(DataFormatError):
            read_checkpoint(path)

    def test_truncated(self, tmp_path):
        arch, model = self._trained()
        path = tmp_path / "m.mpjn"
        write_checkpoint(path, arch, model)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(CorruptFileError):
            read_checkpoint(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        arch, model = self._trained()
        path = tmp_path / "m.mpjn"
        write_checkpoint(path, arch, model)
        path.write_bytes(path.read_bytes() + b"extra")
        with pytest.raises(CorruptFileError):
            read_checkpoint(path)
