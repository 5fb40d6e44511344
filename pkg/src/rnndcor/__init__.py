"""Elman RNN forecasting with layer-wise distance-correlation analysis."""

from .analysis import (
    AggregateSummary,
    DcorProfile,
    HeatmapGrid,
    RunSummary,
    aggregate,
    align_windows,
    cross_model_grid,
    eval_metrics,
    info_loss,
    layer_profile,
    streak_period,
)
from .estat import acf, acf_significance_band, dcor, dcor_squared, dcov2, double_center, pairwise_distances
from .experiment import ExperimentConfig, ProcessSpec, heatmap, run_once, simulate, sweep
from .pipeline import SampleSet, make_samples, split, standardize
from .rnn import ActivationTensor, RnnConfig, RnnModel, capture_activations, predict, train
from .tsgen import (
    ArParams,
    GarchParams,
    MaParams,
    NoiseSpec,
    TimeSeries,
    gen_ar,
    gen_arma,
    gen_garch,
    gen_ma,
    load_csv,
)

__version__ = "0.1.0"
