"""Per-layer dcor profiles, cross-model heatmaps, information loss and run metrics."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import estat
from .errors import (
    AlignmentError,
    DegenerateProfileError,
    DegenerateTargetsError,
    EmptyIntersection,
    SampleCountMismatchError,
    ShapeMismatchError,
    UserInputError,
)
from .pipeline import SampleSet
from .rnn import ActivationTensor

MAPE_THRESHOLD = 1e-8


@dataclass
class DcorProfile:
    """r_t = R(A_t, Y) for t = 1..T, with the ACF aligned layer-to-lag."""
    values: np.ndarray
    tag: str = "test"
    epoch: int = 0
    acf: np.ndarray | None = None   # acf[t-1] is the ACF at lag T + 1 - t

    @property
    def T(self) -> int:
        return self.values.size

    @property
    def max_r(self) -> float:
        return float(np.max(self.values))

    @property
    def final_r(self) -> float:
        return float(self.values[-1])

    def rows(self) -> list[tuple[int, float, int | None, float | None]]:
        out = []
        for t, r in enumerate(self.values, start=1):
            lag = self.T + 1 - t
            a = None if self.acf is None else float(self.acf[t - 1])
            out.append((t, float(r), lag if self.acf is not None else None, a))
        return out


def _subsample_idx(n: int, limit: int | None, seed: int) -> np.ndarray | None:
    if limit is None or n <= limit:
        return None
    rng = np.random.Generator(np.random.PCG64([int(seed), 2]))
    return np.sort(rng.choice(n, size=limit, replace=False))


def layer_profile(acts: ActivationTensor, Y, *, max_samples: int | None = None,
                  seed: int = 0) -> DcorProfile:
    """Distance correlation between each activation layer and the targets.

    With ``max_samples`` set, a seeded subset of at most that many samples
    is used for every layer.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != acts.n:
        raise SampleCountMismatchError(f"{acts.n} activation samples vs {Y.shape[0]} targets")
    idx = _subsample_idx(acts.n, max_samples, seed)
    layers = acts.layers if idx is None else acts.layers[:, idx]
    if idx is not None:
        Y = Y[idx]
    yc = estat.CenteredSample(Y)
    vals = np.array([estat.CenteredSample(layers[t]).dcor(yc) for t in range(acts.T)])
    return DcorProfile(vals, acts.tag, acts.epoch)


def acf_alignment(T: int, acf_values: Sequence[float]) -> list[tuple[int, int, float]]:
    """Pair layer t with lag T + 1 - t; ``acf_values[h]`` must hold lag h."""
    acf_values = np.asarray(acf_values, dtype=float)
    if acf_values.size < T + 1:
        raise UserInputError(f"need ACF up to lag {T}, got up to lag {acf_values.size - 1}")
    return [(t, T + 1 - t, float(acf_values[T + 1 - t])) for t in range(1, T + 1)]


def attach_acf(profile: DcorProfile, series_values: np.ndarray) -> DcorProfile:
    rho = estat.acf(series_values, profile.T)
    profile.acf = np.array([a for _, _, a in acf_alignment(profile.T, rho)])
    return profile


def info_loss(profile: DcorProfile | Sequence[float]) -> float:
    """Percentage drop from the largest layer dcor to the final-layer dcor (unrounded)."""
    v = profile.values if isinstance(profile, DcorProfile) else np.asarray(profile, dtype=float)
    if v.size == 0:
        raise DegenerateProfileError("empty profile")
    peak = float(np.max(v))
    if not peak > 0:
        raise DegenerateProfileError("information loss is undefined for an all-zero profile")
    # the ratio can round a hair past 1 when the final layer is exactly zero
    return min(100.0, 100.0 * (1.0 - float(v[-1]) / peak))


@dataclass
class HeatmapGrid:
    """grid[v-1, m-1] = R(A_v of model 1, A_m of model 2)."""
    grid: np.ndarray
    labels: tuple[str, str] = ("model1", "model2")

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    def to_csv(self, path: str | Path, precision: int = 6) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([f"{self.labels[0]}\\{self.labels[1]}"] +
                       [f"L{m}" for m in range(1, self.grid.shape[1] + 1)])
            for v, row in enumerate(self.grid, start=1):
                w.writerow([f"L{v}"] + [f"{x:.{precision}f}" for x in row])


def cross_model_grid(acts1: ActivationTensor, acts2: ActivationTensor,
                     labels: tuple[str, str] = ("model1", "model2")) -> HeatmapGrid:
    if acts1.n != acts2.n:
        raise AlignmentError(f"sample counts differ ({acts1.n} vs {acts2.n}); align windows first")
    t1, t2 = acts1.target_index, acts2.target_index
    if t1 is not None and t2 is not None and not np.array_equal(t1, t2):
        raise AlignmentError("activation tensors forecast different targets; align windows first")
    c1 = [estat.CenteredSample(acts1.layers[v]) for v in range(acts1.T)]
    c2 = c1 if acts2 is acts1 else [estat.CenteredSample(acts2.layers[m]) for m in range(acts2.T)]
    g = np.empty((acts1.T, acts2.T))
    for v in range(acts1.T):
        for m in range(acts2.T):
            g[v, m] = c1[v].dcor(c2[m])
    return HeatmapGrid(g, labels)


def align_windows(s1: SampleSet, s2: SampleSet) -> tuple[np.ndarray, np.ndarray]:
    """Indices into each sample set keeping only the shared forecast targets."""
    if s1.H != s2.H:
        raise AlignmentError(f"horizons differ ({s1.H} vs {s2.H})")
    common, i1, i2 = np.intersect1d(s1.target_index, s2.target_index, return_indices=True)
    if common.size == 0:
        raise EmptyIntersection("the two sample sets share no forecast targets")
    if not np.array_equal(s1.Y[i1], s2.Y[i2]):
        raise AlignmentError("sample sets share target indices but not target values; "
                             "were they built from the same series?")
    return i1, i2


def diagonal_means(grid: np.ndarray, shift: int = 0) -> dict[int, float]:
    """Mean of grid[v, m] over each diagonal k = m - v - shift (1-based layers)."""
    T1, T2 = grid.shape
    out: dict[int, list[float]] = {}
    for v in range(T1):
        for m in range(T2):
            out.setdefault(m - v - shift, []).append(grid[v, m])
    return {k: float(np.mean(vals)) for k, vals in sorted(out.items())}


def streak_offsets(grid: np.ndarray, shift: int = 0) -> np.ndarray:
    """Per column m, the offset m - argmax_v grid[v, m] - shift."""
    T1, T2 = grid.shape
    best = np.argmax(grid, axis=0)
    return np.arange(T2) - best - shift


def streak_period(grid: np.ndarray, shift: int = 0) -> int | None:
    """Spacing of the similarity streaks parallel to the aligned diagonal.

    The column-argmax offsets (see :func:`streak_offsets`) take a few
    distinct values, one per streak; the period is the most common gap
    between consecutive distinct offsets. ``None`` when only one streak
    is present.
    """
    distinct = np.unique(streak_offsets(grid, shift))
    if distinct.size < 2:
        return None
    gaps, counts = np.unique(np.diff(distinct), return_counts=True)
    return int(gaps[np.argmax(counts)])


def eval_metrics(yhat, y) -> tuple[float, float, int]:
    """(MSE, MAPE, skipped) with |y| < 1e-8 targets excluded from MAPE only."""
    yhat = np.asarray(yhat, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if yhat.shape != y.shape:
        raise ShapeMismatchError(f"{yhat.size} predictions vs {y.size} targets")
    mse = float(np.mean((yhat - y) ** 2))
    keep = np.abs(y) >= MAPE_THRESHOLD
    if not np.any(keep):
        raise DegenerateTargetsError("every target is below the MAPE threshold")
    mape = float(np.mean(np.abs(yhat[keep] - y[keep]) / np.abs(y[keep])))
    return mse, mape, int(np.count_nonzero(~keep))


def destandardize_predictions(yhat, mean: float, std: float) -> np.ndarray:
    if not std > 0:
        raise UserInputError("std must be > 0")
    return np.asarray(yhat, dtype=float) * std + mean


@dataclass
class RunSummary:
    mse: float
    mape: float
    profile: list[float]
    max_r: float
    final_r: float
    info_loss_pct: float
    seed: int
    mape_skipped: int = 0
    acf: list[float] | None = None
    n_profile_samples: int = 0
    subsampled: bool = False
    train_losses: list[float] = field(default_factory=list)

    @classmethod
    def build(cls, mse: float, mape: float, profile: DcorProfile, seed: int, **kw) -> "RunSummary":
        return cls(
            mse=mse, mape=mape, profile=[float(v) for v in profile.values],
            max_r=profile.max_r, final_r=profile.final_r, info_loss_pct=info_loss(profile),
            seed=seed, acf=None if profile.acf is None else [float(a) for a in profile.acf], **kw,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


SUMMARY_METRICS = ("mse", "mape", "max_r", "final_r", "info_loss_pct")


@dataclass
class AggregateSummary:
    mean: dict[str, float]
    std: dict[str, float]
    runs: int
    mean_profile: list[float]
    mean_acf: list[float] | None = None
    seeds: list[int] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def table_row(self, name: str, precision: int = 3) -> dict[str, str]:
        """One row of the summary table, metrics as mean and std strings."""
        p = precision
        return {
            "series": name,
            "mse": f"{self.mean['mse']:.{p}f} ± {self.std['mse']:.{p}f}",
            "mape": f"{self.mean['mape']:.{p}f} ± {self.std['mape']:.{p}f}",
            "max_r": f"{self.mean['max_r']:.{p}f}",
            "final_r": f"{self.mean['final_r']:.{p}f}",
            "change_pct": f"{round(self.mean['info_loss_pct']):d}",
        }


def aggregate(runs: Sequence[RunSummary]) -> AggregateSummary:
    """Mean and sample standard deviation (n - 1 divisor, 0 for one run) per metric."""
    if not runs:
        raise UserInputError("nothing to aggregate")
    mean, std = {}, {}
    for k in SUMMARY_METRICS:
        v = np.array([getattr(r, k) for r in runs], dtype=float)
        if np.all(v == v[0]):
            # summation rounding would otherwise leave a tiny spread
            mean[k], std[k] = float(v[0]), 0.0
            continue
        mean[k] = float(np.mean(v))
        std[k] = float(np.std(v, ddof=1))
    prof = np.mean([r.profile for r in runs], axis=0)
    acfs = [r.acf for r in runs if r.acf is not None]
    mean_acf = np.mean(acfs, axis=0).tolist() if len(acfs) == len(runs) else None
    return AggregateSummary(mean, std, len(runs), prof.tolist(), mean_acf, [r.seed for r in runs])


def write_profile_csv(path: str | Path, values: Sequence[float], acf: Sequence[float] | None = None,
                      precision: int = 6) -> None:
    T = len(values)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["layer", "dcor", "acf_lag", "acf"])
        for t, r in enumerate(values, start=1):
            a = "" if acf is None else f"{acf[t - 1]:.{precision}f}"
            w.writerow([t, f"{r:.{precision}f}", T + 1 - t, a])


def write_json(path: str | Path, doc: dict[str, Any]) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n",
                          encoding="utf-8")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return None
    raise TypeError(f"cannot serialize {type(o).__name__}")
