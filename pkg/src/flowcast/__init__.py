"""Modal decomposition and two-step-ahead forecasting of 2-D flow snapshots.

The package covers the full pipeline: synthetic snapshot generation with
known modal content, delay-embedded dynamic mode decomposition with
amplitude filtering and ROM reconstruction, rolling-window dataset
preparation, two from-scratch forecasters (recurrent and convolutional),
and the error metrics tying everything together.  `flowcast.cli` exposes
the batch front end.
"""

from .errors import (
    ConfigError,
    CorruptFileError,
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
    MinMaxFieldScaler,
    ScalingParams,
    SnapshotMatrix,
    add_baseline,
    apply_minmax,
    downsample_columns,
    export_csv,
    fit_minmax,
    invert_minmax,
    read_snapshots,
    snapshots_from_fields,
    subtract_baseline,
    write_snapshots,
)
from .hodmd import (
    DmdMode,
    Hodmd,
    HodmdConfig,
    HodmdResult,
    PRESETS,
    Rom,
    hodmd_decompose,
    mode_table,
    read_rom,
    rom_reconstruct,
    strouhal,
    write_mode_csv,
    write_rom,
)
from .linalg import EigenPairs, TruncatedSvd, eig_dense, lstsq, rms_normalize, truncated_svd
from .metrics import ErrorSeries, mse_global, mse_local, rrmse, write_error_csv
from .neural import (
    CnnForecaster,
    RnnForecaster,
    TrainConfig,
    TrainReport,
    cnn_arch,
    param_count,
    predict_two_ahead,
    rnn_arch,
    shape_trace,
    train,
)
from .synth import (
    GaussianSinusoid,
    ModeSpec,
    Sinusoid,
    SynthConfig,
    TravelingWave,
    generate_flow,
    persistence_baseline,
)
from .windows import SplitSpec, WindowedDataset, rolling_windows, split, window_count

__version__ = "0.1.0"

__all__ = [
    "CnnForecaster",
    "ConfigError",
    "CorruptFileError",
    "DataFormatError",
    "DegenerateScalingError",
    "DmdMode",
    "EigenPairs",
    "EmptySpectrumError",
    "ErrorSeries",
    "GaussianSinusoid",
    "Grid2D",
    "Hodmd",
    "HodmdConfig",
    "HodmdResult",
    "MinMaxFieldScaler",
    "MissingArtifactError",
    "ModeSpec",
    "PRESETS",
    "RnnForecaster",
    "Rom",
    "ScalingParams",
    "Sinusoid",
    "SnapshotMatrix",
    "SplitSpec",
    "SynthConfig",
    "TrainConfig",
    "TrainReport",
    "TrainingDivergedError",
    "TravelingWave",
    "TruncatedSvd",
    "UndefinedRelativeError",
    "ValidationError",
    "WindowedDataset",
    "add_baseline",
    "apply_minmax",
    "cnn_arch",
    "downsample_columns",
    "eig_dense",
    "export_csv",
    "fit_minmax",
    "generate_flow",
    "hodmd_decompose",
    "invert_minmax",
    "lstsq",
    "mode_table",
    "mse_global",
    "mse_local",
    "param_count",
    "persistence_baseline",
    "predict_two_ahead",
    "read_rom",
    "read_snapshots",
    "rms_normalize",
    "rnn_arch",
    "rolling_windows",
    "rom_reconstruct",
    "rrmse",
    "shape_trace",
    "snapshots_from_fields",
    "split",
    "strouhal",
    "subtract_baseline",
    "train",
    "truncated_svd",
    "window_count",
    "write_error_csv",
    "write_mode_csv",
    "write_rom",
    "write_snapshots",
]
