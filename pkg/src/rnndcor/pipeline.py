"""Z-scoring, chronological splitting and sliding-window sample construction.

Sample matrices are stored with one row per sample: ``X`` has shape
``(n, T)`` and ``Y`` has shape ``(n, H)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSeriesError, InsufficientDataError, UserInputError
from .tsgen import TimeSeries


@dataclass(frozen=True)
class StandardizedSeries:
    values: np.ndarray
    mean: float
    std: float

    def destandardize(self, values: np.ndarray | None = None) -> np.ndarray:
        v = self.values if values is None else np.asarray(values, dtype=float)
        return v * self.std + self.mean


def standardize(series: TimeSeries | np.ndarray, fit: slice | tuple[int, int] | None = None) -> StandardizedSeries:
    """Z-score the whole series using mean and population std of ``fit``."""
    z = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    if fit is None:
        seg = z
    elif isinstance(fit, slice):
        seg = z[fit]
    else:
        seg = z[fit[0]:fit[1]]
    if seg.size == 0:
        raise DegenerateSeriesError("empty fit segment")
    mean = float(np.mean(seg))
    std = float(np.std(seg))
    if not std > 0:
        raise DegenerateSeriesError("fit segment has zero variance")
    return StandardizedSeries((z - mean) / std, mean, std)


def split(length: int, ratio: float = 0.8, min_segment: int = 2) -> tuple[range, range]:
    """Chronological split into ``floor(ratio * L)`` train points and the rest.

    ``min_segment`` is normally ``T + H``; either side shorter than that
    raises :class:`InsufficientDataError`.
    """
    if not 0 < ratio < 1:
        raise UserInputError(f"split ratio must lie in (0, 1), got {ratio}")
    n_train = int(np.floor(ratio * length))
    train, test = range(0, n_train), range(n_train, length)
    for name, seg in (("train", train), ("test", test)):
        if len(seg) < min_segment:
            raise InsufficientDataError(
                f"{name} segment has {len(seg)} points, windowing needs at least {min_segment}"
            )
    return train, test


@dataclass(frozen=True)
class SampleSet:
    X: np.ndarray
    Y: np.ndarray
    T: int
    H: int
    # absolute series index of each sample's first input value
    offsets: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def target_index(self) -> np.ndarray:
        """Absolute series index of each sample's first forecast target."""
        return self.offsets + self.T

    def subset(self, idx: np.ndarray) -> "SampleSet":
        idx = np.asarray(idx)
        return SampleSet(self.X[idx], self.Y[idx], self.T, self.H, self.offsets[idx])

    def to_csv(self, path: str | Path) -> None:
        header = [f"x{t}" for t in range(1, self.T + 1)] + [f"y{h}" for h in range(1, self.H + 1)]
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in np.hstack([self.X, self.Y]):
                w.writerow([repr(float(v)) for v in row])


def make_samples(values: np.ndarray, T: int, H: int = 1, start: int = 0) -> SampleSet:
    """Slide a window of ``T`` inputs followed by ``H`` targets over ``values``.

    ``start`` is the absolute index of ``values[0]`` in the full series and
    is only used to fill the sample offsets.
    """
    v = np.asarray(values, dtype=float)
    if T < 1 or H < 1:
        raise UserInputError("window size T and horizon H must be >= 1")
    n = v.size - T - H + 1
    if n < 1:
        raise InsufficientDataError(
            f"segment of length {v.size} is too short for T={T}, H={H}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(v, T + H)
    X = np.ascontiguousarray(windows[:, :T])
    Y = np.ascontiguousarray(windows[:, T:])
    return SampleSet(X, Y, T, H, np.arange(n) + start)


def segment_samples(std: StandardizedSeries, seg: range, T: int, H: int = 1) -> SampleSet:
    return make_samples(std.values[seg.start:seg.stop], T, H, start=seg.start)
