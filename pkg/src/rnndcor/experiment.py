"""Experiment orchestration: series -> windows -> training -> capture -> metrics.

Run ``i`` of an experiment uses seed ``base_seed + i`` both for the noise
of a synthetic series and for the network, so any single run can be
reproduced on its own.
"""

from __future__ import annotations

import itertools
import logging
from contextlib import contextmanager
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

import numpy as np

from . import analysis, pipeline, rnn, tsgen
from .errors import RnnDcorError, UserInputError

log = logging.getLogger(__name__)

PROCESS_KINDS = ("ar", "ma", "arma", "garch", "csv")


@dataclass(frozen=True)
class ProcessSpec:
    kind: str = "ar"
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()
    delta: float = 0.0
    alpha0: float = 0.1
    alpha: tuple[float, ...] = ()
    beta: tuple[float, ...] = ()
    standard_form: bool = False
    noise_mean: float = 0.0
    noise_std: float = 1.0
    csv_path: str | None = None
    column: int | str = 0
    skip_header: bool = False
    delimiter: str = ","
    rows: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise UserInputError(f"unknown process kind {self.kind!r}; choose from {PROCESS_KINDS}")
        for name in ("ar", "ma", "alpha", "beta"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.rows is not None:
            object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        if self.kind in ("ar", "arma") and not self.ar:
            raise UserInputError(f"{self.kind} process needs AR coefficients")
        if self.kind in ("ma", "arma") and not self.ma:
            raise UserInputError(f"{self.kind} process needs MA coefficients")
        if self.kind == "garch" and not self.alpha:
            raise UserInputError("garch process needs alpha coefficients")
        if self.kind == "csv" and not self.csv_path:
            raise UserInputError("csv process needs csv_path")

    @classmethod
    def from_orders(cls, kind: str, p: int = 0, q: int = 0, *, ar_coeff: float = tsgen.DEFAULT_LAG_COEFF,
                    ma_coeff: float = tsgen.DEFAULT_LAG_COEFF, **kw) -> "ProcessSpec":
        """Single-coefficient-at-the-largest-lag process of the given orders."""
        if kind == "ar":
            return cls("ar", ar=tsgen.lag_coeffs(p, ar_coeff), **kw)
        if kind == "ma":
            return cls("ma", ma=tsgen.lag_coeffs(q or p, ma_coeff), **kw)
        if kind == "arma":
            return cls("arma", ar=tsgen.lag_coeffs(p, ar_coeff), ma=tsgen.lag_coeffs(q, ma_coeff), **kw)
        if kind == "garch":
            g = tsgen.GarchParams.default(p, q)
            return cls("garch", alpha0=g.alpha0, alpha=g.alpha, beta=g.beta, **kw)
        raise UserInputError(f"orders do not apply to process kind {kind!r}")

    @property
    def name(self) -> str:
        if self.kind == "ar":
            return f"AR({len(self.ar)})"
        if self.kind == "ma":
            return f"MA({len(self.ma)})"
        if self.kind == "arma":
            return f"ARMA({len(self.ar)},{len(self.ma)})"
        if self.kind == "garch":
            return f"GARCH({len(self.alpha)},{len(self.beta)})"
        return f"CSV({self.csv_path}:{self.column})"

    def build(self, length: int, seed: int, burn_in: int = tsgen.DEFAULT_BURN_IN) -> tsgen.TimeSeries:
        if self.kind == "csv":
            return tsgen.load_csv(self.csv_path, self.column, skip_header=self.skip_header,
                                  delimiter=self.delimiter, rows=self.rows)
        noise = tsgen.NoiseSpec(self.noise_mean, self.noise_std, seed)
        if self.kind == "ar":
            return tsgen.gen_ar(tsgen.ArParams(self.ar), noise, length, burn_in)
        if self.kind == "ma":
            return tsgen.gen_ma(tsgen.MaParams(self.ma, self.delta), noise, length, burn_in,
                                standard_form=self.standard_form)
        if self.kind == "arma":
            return tsgen.gen_arma(tsgen.ArParams(self.ar), tsgen.MaParams(self.ma, self.delta),
                                  noise, length, burn_in)
        return tsgen.gen_garch(tsgen.GarchParams(self.alpha0, self.alpha, self.beta), noise,
                               length, burn_in, standard_form=self.standard_form)


@dataclass(frozen=True)
class ExperimentConfig:
    process: ProcessSpec = field(default_factory=lambda: ProcessSpec.from_orders("ar", 1))
    length: int = 4000
    burn_in: int = tsgen.DEFAULT_BURN_IN
    split: float = 0.8
    standardize_on: str = "train"
    profile_on: str = "test"
    rnn: rnn.RnnConfig = field(default_factory=rnn.RnnConfig)
    runs: int = 5
    base_seed: int = 0
    max_dcor_samples: int | None = None
    precision: int = 6
    workers: int = 1
    min_success: float = 0.8
    name: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise UserInputError("runs must be >= 1")
        if self.standardize_on not in ("train", "full"):
            raise UserInputError("standardize_on must be 'train' or 'full'")
        if self.profile_on not in ("train", "test"):
            raise UserInputError("profile_on must be 'train' or 'test'")
        if self.max_dcor_samples is not None and self.max_dcor_samples < 2:
            raise UserInputError("max_dcor_samples must be >= 2")

    @property
    def label(self) -> str:
        return self.name or self.process.name

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise UserInputError(f"unknown experiment config fields: {sorted(unknown)}")
        if "process" in d and isinstance(d["process"], dict):
            pk = {f.name for f in fields(ProcessSpec)}
            bad = set(d["process"]) - pk
            if bad:
                raise UserInputError(f"unknown process fields: {sorted(bad)}")
            d["process"] = ProcessSpec(**d["process"])
        if "rnn" in d and isinstance(d["rnn"], dict):
            d["rnn"] = rnn.RnnConfig.from_dict(d["rnn"])
        return cls(**d)

    def with_overrides(self, overrides: dict[str, Any]) -> "ExperimentConfig":
        """Apply ``{"rnn.hidden": 128, "runs": 3, ...}`` style dotted overrides."""
        doc = self.to_dict()
        for key, value in overrides.items():
            set_dotted(doc, key, value)
        return ExperimentConfig.from_dict(doc)


def set_dotted(doc: dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    node = doc
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise UserInputError(f"unknown config key {key!r}")
        node = node[p]
    if parts[-1] not in node:
        raise UserInputError(f"unknown config key {key!r}")
    node[parts[-1]] = value


@dataclass
class PreparedData:
    series: tsgen.TimeSeries
    standardized: pipeline.StandardizedSeries
    train: pipeline.SampleSet
    test: pipeline.SampleSet
    train_range: range
    test_range: range


@contextmanager
def stage(name: str):
    """Tag any library error raised inside the block with the pipeline stage."""
    try:
        yield
    except RnnDcorError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
        raise


def prepare(cfg: ExperimentConfig, seed: int, T: int | None = None) -> PreparedData:
    T = cfg.rnn.T if T is None else T
    H = cfg.rnn.H
    with stage("generate"):
        series = cfg.process.build(cfg.length, seed, cfg.burn_in)
    with stage("split"):
        tr, te = pipeline.split(len(series), cfg.split, T + H)
    with stage("standardize"):
        std = pipeline.standardize(series, (tr.start, tr.stop) if cfg.standardize_on == "train" else None)
    with stage("window"):
        train = pipeline.segment_samples(std, tr, T, H)
        test = pipeline.segment_samples(std, te, T, H)
    return PreparedData(series, std, train, test, tr, te)


@dataclass
class RunResult:
    summary: analysis.RunSummary
    data: PreparedData
    report: rnn.TrainReport
    predictions: np.ndarray        # standardized, on the test samples
    acts: rnn.ActivationTensor

    def forecast_table(self) -> dict[str, np.ndarray]:
        """Test-segment targets and forecasts on the original scale."""
        std = self.data.standardized
        return {
            "index": self.data.test.target_index,
            "actual": analysis.destandardize_predictions(self.data.test.Y[:, 0], std.mean, std.std),
            "forecast": analysis.destandardize_predictions(self.predictions[:, 0], std.mean, std.std),
        }


def run_once(cfg: ExperimentConfig, run_index: int = 0) -> RunResult:
    seed = cfg.base_seed + run_index
    data = prepare(cfg, seed)
    rcfg = replace(cfg.rnn, seed=seed)
    with stage("train"):
        report = rnn.train(rcfg, data.train)
    model = report.model

    prof_set = data.test if cfg.profile_on == "test" else data.train
    with stage("capture"):
        preds = rnn.predict(model, data.test.X)
        acts = rnn.capture_activations(model, prof_set, tag=cfg.profile_on)
    with stage("analyze"):
        mse, mape, skipped = analysis.eval_metrics(preds, data.test.Y)
        profile = analysis.layer_profile(acts, prof_set.Y, max_samples=cfg.max_dcor_samples, seed=seed)
        seg = data.test_range if cfg.profile_on == "test" else data.train_range
        analysis.attach_acf(profile, data.standardized.values[seg.start:seg.stop])

    subsampled = cfg.max_dcor_samples is not None and prof_set.n > cfg.max_dcor_samples
    summary = analysis.RunSummary.build(
        mse, mape, profile, seed, mape_skipped=skipped,
        n_profile_samples=min(prof_set.n, cfg.max_dcor_samples or prof_set.n),
        subsampled=subsampled, train_losses=list(report.losses),
    )
    return RunResult(summary, data, report, preds, acts)


def _run_summary_job(args: tuple[ExperimentConfig, int]) -> tuple[int, analysis.RunSummary | None, str | None]:
    cfg, i = args
    try:
        return i, run_once(cfg, i).summary, None
    except RnnDcorError as exc:
        tag = getattr(exc, "stage", None)
        return i, None, f"{type(exc).__name__}{f' [{tag}]' if tag else ''}: {exc}"


@dataclass
class SimulationResult:
    config: ExperimentConfig
    runs: list[analysis.RunSummary]
    failures: dict[int, str]
    aggregate: analysis.AggregateSummary


def simulate(cfg: ExperimentConfig) -> SimulationResult:
    """Run ``cfg.runs`` independent seeds and aggregate them.

    Failed runs are recorded; the aggregate requires at least
    ``min_success`` of the runs to succeed.
    """
    jobs = [(cfg, i) for i in range(cfg.runs)]
    if cfg.workers > 1 and cfg.runs > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_summary_job, jobs))
    else:
        results = [_run_summary_job(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    runs = [s for _, s, _ in results if s is not None]
    failures = {i: err for i, _, err in results if err is not None}
    for i, err in failures.items():
        log.warning("%s run %d failed: %s", cfg.label, i, err)
    if len(runs) < cfg.min_success * cfg.runs or not runs:
        raise SimulationFailed(
            f"{cfg.label}: only {len(runs)} of {cfg.runs} runs succeeded", failures)
    return SimulationResult(cfg, runs, failures, analysis.aggregate(runs))


class SimulationFailed(RnnDcorError):
    def __init__(self, msg: str, failures: dict[int, str]):
        super().__init__(msg)
        self.failures = failures


@dataclass
class HeatmapResult:
    grid: analysis.HeatmapGrid
    metrics: dict[str, dict[str, float]]
    n_samples: int
    configs: tuple[rnn.RnnConfig, rnn.RnnConfig]
    target_index: np.ndarray


def heatmap(cfg: ExperimentConfig, rnn_a: rnn.RnnConfig, rnn_b: rnn.RnnConfig,
            labels: tuple[str, str] | None = None) -> HeatmapResult:
    """Train two networks on one series and compare every pair of their layers.

    Both models see the series generated from ``cfg.base_seed``; their
    test windows are aligned on shared forecast targets before capture.
    """
    seed = cfg.base_seed
    if labels is None:
        labels = (f"T{rnn_a.T}_b{rnn_a.hidden}_{rnn_a.activation}",
                  f"T{rnn_b.T}_b{rnn_b.hidden}_{rnn_b.activation}")
    if labels[0] == labels[1]:
        labels = (labels[0] + "_A", labels[1] + "_B")
    if rnn_a.H != rnn_b.H:
        raise UserInputError("both networks must share the forecast horizon")
    series = cfg.process.build(cfg.length, seed, cfg.burn_in)
    Tmax = max(rnn_a.T, rnn_b.T)
    tr, te = pipeline.split(len(series), cfg.split, Tmax + rnn_a.H)
    std = pipeline.standardize(series, (tr.start, tr.stop) if cfg.standardize_on == "train" else None)

    models, test_sets, metrics = [], [], {}
    for label, rc in zip(labels, (rnn_a, rnn_b)):
        train_s = pipeline.segment_samples(std, tr, rc.T, rc.H)
        test_s = pipeline.segment_samples(std, te, rc.T, rc.H)
        model = rnn.train(rc, train_s).model
        mse, mape, _ = analysis.eval_metrics(rnn.predict(model, test_s.X), test_s.Y)
        metrics[label] = {"mse": mse, "mape": mape}
        models.append(model)
        test_sets.append(test_s)

    i1, i2 = analysis.align_windows(test_sets[0], test_sets[1])
    s1, s2 = test_sets[0].subset(i1), test_sets[1].subset(i2)
    limit = cfg.max_dcor_samples
    keep = analysis._subsample_idx(s1.n, limit, seed)
    if keep is not None:
        s1, s2 = s1.subset(keep), s2.subset(keep)
    a1 = rnn.capture_activations(models[0], s1)
    a2 = rnn.capture_activations(models[1], s2)
    grid = analysis.cross_model_grid(a1, a2, labels)
    return HeatmapResult(grid, metrics, s1.n, (rnn_a, rnn_b), s1.target_index)


SWEEP_AXES = {
    "hidden": "rnn.hidden",
    "b": "rnn.hidden",
    "lr": "rnn.learning_rate",
    "learning_rate": "rnn.learning_rate",
    "dropout": "rnn.dropout_final",
    "T": "rnn.T",
    "activation": "rnn.activation",
    "epochs": "rnn.epochs",
}


def sweep_variants(cfg: ExperimentConfig, axes: dict[str, list[Any]]) -> list[tuple[dict[str, Any], ExperimentConfig]]:
    """Cartesian product of the sweep axes, each as a dotted-override config."""
    keys = list(axes)
    for k in keys:
        if k not in SWEEP_AXES and "." not in k:
            raise UserInputError(f"unknown sweep axis {k!r}; choose from {sorted(SWEEP_AXES)}")
    out = []
    for combo in itertools.product(*(axes[k] for k in keys)):
        point = dict(zip(keys, combo))
        overrides = {SWEEP_AXES.get(k, k): v for k, v in point.items()}
        out.append((point, cfg.with_overrides(overrides)))
    return out


@dataclass
class SweepRow:
    variant: dict[str, Any]
    result: SimulationResult | None
    error: str | None = None


def sweep(cfg: ExperimentConfig, axes: dict[str, list[Any]]) -> list[SweepRow]:
    rows = []
    for point, vcfg in sweep_variants(cfg, axes):
        try:
            rows.append(SweepRow(point, simulate(vcfg)))
        except RnnDcorError as exc:
            log.warning("sweep variant %s failed: %s", point, exc)
            rows.append(SweepRow(point, None, f"{type(exc).__name__}: {exc}"))
    return rows


def reference_presets() -> dict[str, ProcessSpec]:
    """Benchmark process set used by ``simulate --preset`` and the summary table.

    AR weights are 0.99 at the largest lag, so a one-step forecast on
    standardized data has an error floor near 1 - c^2 ~ 0.02. MA weights
    are 0.8 with the contemporaneous shock included (floor ~ 1 / 1.64).
    """
    ar, ma = 0.99, 0.8
    p: dict[str, ProcessSpec] = {}
    for k in (1, 5, 10, 20):
        p[f"AR({k})"] = ProcessSpec.from_orders("ar", k, ar_coeff=ar)
    for k in (1, 5, 10, 20):
        p[f"MA({k})"] = ProcessSpec.from_orders("ma", 0, k, ma_coeff=ma, standard_form=True)
    for a, m in ((1, 1), (1, 10), (10, 1)):
        p[f"ARMA({a},{m})"] = ProcessSpec.from_orders("arma", a, m, ar_coeff=ar, ma_coeff=ma)
    for a, b in ((2, 2), (4, 4)):
        p[f"GARCH({a},{b})"] = ProcessSpec.from_orders("garch", a, b)
    return p
