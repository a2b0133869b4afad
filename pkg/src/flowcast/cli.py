"""Batch front end: generate -> decompose -> preprocess -> train -> predict
-> evaluate, with a reproducibility manifest per stage.

Every command validates its configuration completely before computing,
resolves relative paths against the output directory, and finishes by
atomically writing `<stage>.manifest.json` (config, seed, library version,
input/output digests).  Wall times go to a `<stage>.timings.json` sidecar
so manifests stay byte-reproducible across runs.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateScalingError,
    EmptySpectrumError,
    MissingArtifactError,
    TrainingDivergedError,
    UndefinedRelativeError,
    ValidationError,
)
from .fields import (
    Grid2D,
    SnapshotMatrix,
    apply_minmax,
    downsample_columns,
    fit_minmax,
    read_snapshots,
    subtract_baseline,
    write_snapshots,
)
from .hodmd import (
    HodmdConfig,
    Rom,
    hodmd_decompose,
    mode_table,
    modes_to_rows,
    read_rom,
    rom_reconstruct,
    write_mode_csv,
    write_rom,
)
from .metrics import ErrorSeries, rrmse, write_error_csv
from .neural import (
    AdamParams,
    TrainConfig,
    cnn_arch,
    predict_two_ahead,
    predict_windows,
    read_checkpoint,
    rnn_arch,
    train as train_model,
    write_checkpoint,
    write_report_csv,
)
from .neural.arch import CNN_KIND, RNN_KIND
from .fields import unscale_array
from .runconfig import RunConfig
from .synth import SynthConfig, generate_flow
from .windows import SplitSpec, rolling_windows, split

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_NUMERIC_ERRORS = (
    DegenerateScalingError,
    EmptySpectrumError,
    TrainingDivergedError,
    UndefinedRelativeError,
    FloatingPointError,
)
_DATA_ERRORS = (DataFormatError, FileNotFoundError, ValidationError)

_DEFAULT_EPOCHS = {RNN_KIND: 140, CNN_KIND: 70}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class StageContext:
    """Collects inputs, outputs, metrics and timing for one command."""

    def __init__(self, stage: str, cfg: RunConfig, seed: int | None, out_dir: Path):
        self.stage = stage
        self.cfg = cfg
        self.out_dir = out_dir
        self.seed = seed if seed is not None else cfg.get_int("seed", 0)
        self.inputs: dict[str, Path] = {}
        self.outputs: dict[str, Path] = {}
        self.metrics: dict = {}
        self._started = time.perf_counter()
        out_dir.mkdir(parents=True, exist_ok=True)

    def resolve(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self.out_dir / path

    def input_path(self, key: str, default: str, producer: str) -> Path:
        name = self.cfg.get_str(key, default)
        path = self.resolve(name)
        if not path.exists():
            raise MissingArtifactError(name, producer)
        self.inputs[name] = path
        return path

    def output_path(self, key: str, default: str) -> Path:
        name = self.cfg.get_str(key, default)
        path = self.resolve(name)
        self.outputs[name] = path
        return path

    def finish(self) -> None:
        elapsed = time.perf_counter() - self._started
        timings_name = f"{self.stage}.timings.json"
        timings = {"stage": self.stage, "total_seconds": elapsed}
        _write_atomic(self.out_dir / timings_name, json.dumps(timings, indent=2) + "\n")
        manifest = {
            "command": self.stage,
            "config": dict(sorted(self.cfg.values.items())),
            "seed": self.seed,
            "library_version": __version__,
            "inputs": {name: _sha256(p) for name, p in sorted(self.inputs.items())},
            "outputs": {name: _sha256(p) for name, p in sorted(self.outputs.items())},
            "metrics": self.metrics,
            "timings_file": timings_name,
        }
        _write_atomic(
            self.out_dir / f"{self.stage}.manifest.json",
            json.dumps(manifest, sort_keys=True, indent=2) + "\n",
        )


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _run_stage(stage: str, config: str, seed: int | None, out: str, body) -> None:
    try:
        cfg = RunConfig.from_file(config)
        ctx = StageContext(stage, cfg, seed, Path(out))
        body(ctx)
        ctx.finish()
    except ConfigError as exc:
        _fail(EXIT_CONFIG, f"config error: {exc}")
    except _NUMERIC_ERRORS as exc:
        _fail(EXIT_NUMERIC, f"numeric failure: {exc}")
    except _DATA_ERRORS as exc:
        _fail(EXIT_DATA, f"data error: {exc}")


def _fail(code: int, message: str) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _stage_options(fn):
    fn = click.option(
        "--config", required=True, type=click.Path(), help="Run configuration file."
    )(fn)
    fn = click.option(
        "--seed", type=int, default=None, help="Override the configured seed."
    )(fn)
    fn = click.option(
        "--out", default=".", type=click.Path(), help="Output directory."
    )(fn)
    return fn


@click.group()
@click.version_option(version=__version__)
def main():
    """Snapshot decomposition and forecasting pipeline."""


# -- generate -----------------------------------------------------------


def _cmd_generate(ctx: StageContext) -> None:
    cfg = ctx.cfg
    grid = Grid2D(cfg.get_int("grid.nx"), cfg.get_int("grid.ny"))
    synth = SynthConfig(
        grid=grid,
        k=cfg.get_int("samples"),
        dt=cfg.get_float("dt", 1.0),
        modes=cfg.mode_specs(),
        noise_std=cfg.get_float("noise_std", 0.0),
        seed=ctx.seed,
    )
    v, truth = generate_flow(synth)
    write_snapshots(ctx.output_path("generate.out", "snapshots.mpjf"), v)
    h = cfg.get_float("strouhal.h", 1.0)
    u = cfg.get_float("strouhal.u", 1.0)
    write_mode_csv(
        ctx.output_path("generate.truth_out", "true_modes.csv"),
        modes_to_rows(truth, h, u),
    )
    ctx.metrics = {"k": v.k, "grid": [grid.nx, grid.ny], "modes": len(truth)}


# -- decompose ----------------------------------------------------------


def _hodmd_config(cfg: RunConfig, dt: float) -> HodmdConfig:
    try:
        return HodmdConfig(
            d=cfg.get_int("hodmd.d"),
            eps1=cfg.get_float("hodmd.eps1"),
            eps=cfg.get_float("hodmd.eps"),
            dt=dt,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_decompose(ctx: StageContext) -> None:
    cfg = ctx.cfg
    v = read_snapshots(ctx.input_path("decompose.input", "snapshots.mpjf", "generate"))
    hcfg = _hodmd_config(cfg, v.dt)
    if v.k <= hcfg.d + 1:
        raise ConfigError(
            f"delay window d={hcfg.d} needs K >= d + 2 snapshots, file has K={v.k}"
        )
    result = hodmd_decompose(v, hcfg)
    h = cfg.get_float("strouhal.h", 1.0)
    u = cfg.get_float("strouhal.u", 1.0)
    write_mode_csv(
        ctx.output_path("decompose.modes_out", "modes.csv"),
        mode_table(result, h, u),
    )
    rom = Rom(result=result, dt=v.dt, grid=v.grid)
    write_rom(ctx.output_path("decompose.rom_out", "rom.mpjr"), rom)
    recon = rom_reconstruct(rom, np.arange(v.k))
    per_snapshot = [rrmse(recon.data[:, k], v.data[:, k]) for k in range(v.k)]
    ctx.metrics = {
        "reconstruction_rrmse": float(np.mean(per_snapshot)),
        "spatial_complexity": result.spatial_complexity,
        "spectral_complexity": result.spectral_complexity,
    }


# -- reconstruct ---------------------------------------------------------


def _parse_index_range(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"reconstruct.indices must be 'start:stop', got '{text}'")
    try:
        start, stop = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"reconstruct.indices must be integers, got '{text}'") from None
    if stop <= start:
        raise ConfigError(f"empty index range '{text}'")
    return np.arange(start, stop)


def _cmd_reconstruct(ctx: StageContext) -> None:
    rom = read_rom(ctx.input_path("reconstruct.rom", "rom.mpjr", "decompose"))
    indices = _parse_index_range(ctx.cfg.require("reconstruct.indices"))
    recon = rom_reconstruct(rom, indices)
    write_snapshots(ctx.output_path("reconstruct.out", "reconstruction.mpjf"), recon)
    ctx.metrics = {"first_index": int(indices[0]), "count": int(len(indices))}


# -- preprocess ----------------------------------------------------------


def _cmd_preprocess(ctx: StageContext) -> None:
    cfg = ctx.cfg
    v = read_snapshots(ctx.input_path("preprocess.input", "snapshots.mpjf", "generate"))
    if cfg.raw("preprocess.baseline") is not None:
        baseline = read_snapshots(
            ctx.input_path("preprocess.baseline", "", "generate")
        )
        try:
            v = subtract_baseline(v, baseline)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    step = cfg.get_int("preprocess.step", 1)
    try:
        v = downsample_columns(v, step)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    write_snapshots(ctx.output_path("preprocess.out", "preprocessed.mpjf"), v)
    ctx.metrics = {"k": v.k, "grid": [v.grid.nx, v.grid.ny], "step": step}


# -- shared forecaster plumbing -------------------------------------------


def _model_kind(cfg: RunConfig) -> str:
    kind = cfg.require("train.model").lower()
    if kind not in (RNN_KIND, CNN_KIND):
        raise ConfigError(f"train.model must be rnn or cnn, got '{kind}'")
    return kind


def _scaling_flag(cfg: RunConfig, kind: str) -> bool:
    scaling = cfg.get_bool("train.scaling", default=(kind == CNN_KIND))
    if kind == CNN_KIND and not scaling:
        raise ConfigError("the cnn model requires train.scaling = on")
    if kind == RNN_KIND and scaling:
        raise ConfigError("the rnn model requires train.scaling = off")
    return scaling


def _split_spec(cfg: RunConfig, v: SnapshotMatrix) -> SplitSpec:
    spec = SplitSpec(
        k_training=cfg.get_int("split.train"),
        k_validation=cfg.get_int("split.val"),
        k_test=cfg.get_int("split.test"),
    )
    if spec.total != v.k:
        raise ConfigError(
            f"split sizes sum to {spec.total} but the input has K={v.k}"
        )
    return spec


def _load_model_inputs(ctx: StageContext, input_key: str):
    cfg = ctx.cfg
    v = read_snapshots(ctx.input_path(input_key, "preprocessed.mpjf", "preprocess"))
    spec = _split_spec(cfg, v)
    kind = _model_kind(cfg)
    scaling_on = _scaling_flag(cfg, kind)
    q = cfg.get_int("window", 10)
    train_m, val_m, test_m = split(v, spec)
    scaler = fit_minmax(train_m) if scaling_on else None
    return v, spec, kind, q, scaler, (train_m, val_m, test_m)


def _maybe_scaled(matrix: SnapshotMatrix, scaler) -> SnapshotMatrix:
    return apply_minmax(matrix, scaler) if scaler is not None else matrix


def _read_baseline(ctx: StageContext, key: str, v: SnapshotMatrix):
    if ctx.cfg.raw(key) is None:
        return None
    baseline = read_snapshots(ctx.input_path(key, "", "generate"))
    if baseline.grid != v.grid or baseline.k != v.k:
        raise ConfigError(
            f"{key}: baseline shape ({baseline.grid.nx}x{baseline.grid.ny}, "
            f"K={baseline.k}) does not match the input"
        )
    return baseline


# -- train ----------------------------------------------------------------


def _cmd_train(ctx: StageContext) -> None:
    cfg = ctx.cfg
    _, _, kind, q, scaler, (train_m, val_m, _) = _load_model_inputs(ctx, "train.input")
    w_train = rolling_windows(_maybe_scaled(train_m, scaler), q, source_range="train")
    w_val = rolling_windows(_maybe_scaled(val_m, scaler), q, source_range="val")
    if w_train.count == 0 or w_val.count == 0:
        raise ConfigError(
            f"window length q={q} leaves no rolling windows "
            f"(train {w_train.count}, val {w_val.count})"
        )
    try:
        tcfg = TrainConfig(
            epochs=cfg.get_int("train.epochs", _DEFAULT_EPOCHS[kind]),
            batch_size=cfg.get_int("train.batch_size", 5),
            patience=cfg.get_int("train.patience", 10),
            adam=AdamParams(
                alpha=cfg.get_float("adam.alpha", 1e-3),
                beta1=cfg.get_float("adam.beta1", 0.9),
                beta2=cfg.get_float("adam.beta2", 0.999),
                epsilon=cfg.get_float("adam.epsilon", 1e-8),
            ),
            early_stopping=cfg.get_bool("train.early_stopping", True),
            seed=ctx.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    arch = (rnn_arch if kind == RNN_KIND else cnn_arch)(train_m.grid, q=q)
    model, report = train_model(arch, w_train, w_val, tcfg)
    write_checkpoint(ctx.output_path("train.out", "model.mpjn"), arch, model)
    write_report_csv(ctx.output_path("train.report_out", "train_report.csv"), report)
    ctx.metrics = {
        "model": kind,
        "parameter_count": model.parameter_count,
        "scaling": scaler is not None,
        "early_stopping": tcfg.early_stopping,
        "stopping_epoch": report.stopping_epoch,
        "stopping_reason": report.stopping_reason,
        "best_epoch": report.best_epoch,
        "final_train_loss": report.train_loss[-1],
        "final_val_loss": report.val_loss[-1],
    }


# -- predict ----------------------------------------------------------------


def _load_checkpoint(ctx: StageContext, key: str):
    path = ctx.input_path(key, "model.mpjn", "train")
    return read_checkpoint(path)


def _check_arch_consistency(arch, kind, grid, q) -> None:
    if arch.kind != kind:
        raise ConfigError(
            f"checkpoint holds a {arch.kind} model but train.model is {kind}"
        )
    if arch.grid != grid:
        raise ConfigError(
            f"checkpoint grid {arch.grid.nx}x{arch.grid.ny} does not match "
            f"the input grid {grid.nx}x{grid.ny}"
        )
    if arch.q != q:
        raise ConfigError(f"checkpoint window q={arch.q} but config says q={q}")


def _cmd_predict(ctx: StageContext) -> None:
    cfg = ctx.cfg
    arch, model = _load_checkpoint(ctx, "predict.checkpoint")
    v, spec, kind, q, scaler, (_, _, test_m) = _load_model_inputs(ctx, "predict.input")
    _check_arch_consistency(arch, kind, v.grid, q)
    w_test = rolling_windows(test_m, q, source_range="test")
    index = cfg.get_int("predict.window_index", 0)
    if not 0 <= index < w_test.count:
        raise ConfigError(
            f"predict.window_index {index} out of range [0, {w_test.count})"
        )
    baseline = _read_baseline(ctx, "predict.baseline", v)
    offset = spec.k_training + spec.k_validation
    targets = [offset + t for t in w_test.target_indices(index)]
    baseline_cols = baseline.data[:, targets] if baseline is not None else None
    pred = predict_two_ahead(
        arch, model, w_test.input_window(index), scaling=scaler, baseline=baseline_cols
    )
    write_snapshots(
        ctx.output_path("predict.out", "prediction.mpjf"),
        SnapshotMatrix(v.grid, v.dt, pred.T),
    )
    ctx.metrics = {"window_index": index, "target_indices": targets}


# -- evaluate ----------------------------------------------------------------


def _cmd_evaluate(ctx: StageContext) -> None:
    arch, model = _load_checkpoint(ctx, "evaluate.checkpoint")
    v, spec, kind, q, scaler, (_, _, test_m) = _load_model_inputs(ctx, "evaluate.input")
    _check_arch_consistency(arch, kind, v.grid, q)
    w_truth = rolling_windows(test_m, q, source_range="test")
    if w_truth.count == 0:
        raise ConfigError(f"window length q={q} leaves no test windows")
    w_model = rolling_windows(_maybe_scaled(test_m, scaler), q, source_range="test")
    preds = predict_windows(arch, model, w_model)
    if scaler is not None:
        preds = unscale_array(preds, scaler)
    baseline = _read_baseline(ctx, "evaluate.baseline", v)
    offset = spec.k_training + spec.k_validation
    j = v.grid.j
    indices = []
    values = []
    for i in range(w_truth.count):
        pred = preds[i].reshape(2, j)
        truth = w_truth.target_window(i).T
        if baseline is not None:
            cols = [offset + t for t in w_truth.target_indices(i)]
            base = baseline.data[:, cols].T
            pred = pred + base
            truth = truth + base
        indices.append(offset + i + q)
        values.append(rrmse(pred, truth))
    series = ErrorSeries(indices=tuple(indices), values=np.array(values))
    write_error_csv(ctx.output_path("evaluate.out", "evaluation.csv"), series)
    ctx.metrics = {"mean_rrmse": series.mean, "windows": w_truth.count}


# -- report ----------------------------------------------------------------


def _cmd_report(out: str) -> None:
    out_dir = Path(out)
    manifests = sorted(out_dir.glob("*.manifest.json"))
    if not manifests:
        _fail(EXIT_DATA, f"data error: no manifests found in {out_dir}")
    for path in manifests:
        manifest = json.loads(path.read_text())
        click.echo(f"stage: {manifest['command']}")
        click.echo(f"  seed: {manifest['seed']}")
        timings_file = out_dir / manifest.get("timings_file", "")
        if timings_file.is_file():
            timings = json.loads(timings_file.read_text())
            click.echo(f"  wall time: {timings['total_seconds']:.3f} s")
        for name, value in sorted(manifest.get("metrics", {}).items()):
            click.echo(f"  {name}: {value}")
        for label, group in (("inputs", "inputs"), ("outputs", "outputs")):
            for name, digest in sorted(manifest.get(group, {}).items()):
                click.echo(f"  {label[:-1]} {name}: sha256 {digest[:16]}...")


@main.command()
@_stage_options
def generate(config, seed, out):
    """Generate a synthetic snapshot file plus its ground-truth mode table."""
    _run_stage("generate", config, seed, out, _cmd_generate)


@main.command()
@_stage_options
def decompose(config, seed, out):
    """Decompose snapshots into modes; write mode table and ROM checkpoint."""
    _run_stage("decompose", config, seed, out, _cmd_decompose)


@main.command()
@_stage_options
def reconstruct(config, seed, out):
    """Reconstruct snapshots from a ROM checkpoint."""
    _run_stage("reconstruct", config, seed, out, _cmd_reconstruct)


@main.command()
@_stage_options
def preprocess(config, seed, out):
    """Subtract a baseline flow and/or downsample the normal axis."""
    _run_stage("preprocess", config, seed, out, _cmd_preprocess)


@main.command()
@_stage_options
def train(config, seed, out):
    """Train a forecaster; write its checkpoint and per-epoch report."""
    _run_stage("train", config, seed, out, _cmd_train)


@main.command()
@_stage_options
def predict(config, seed, out):
    """Forecast two snapshots from one test window."""
    _run_stage("predict", config, seed, out, _cmd_predict)


@main.command()
@_stage_options
def evaluate(config, seed, out):
    """Score the forecaster on every test window; write per-window RRMSE."""
    _run_stage("evaluate", config, seed, out, _cmd_evaluate)


@main.command()
@click.option("--out", default=".", type=click.Path(), help="Output directory.")
def report(out):
    """Summarize the manifests of completed stages."""
    _cmd_report(out)


if __name__ == "__main__":
    main()
