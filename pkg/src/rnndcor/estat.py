"""Energy statistics: distance covariance / correlation, plus the sample ACF.

Sample matrices hold one observation per row, shape ``(n, d)``; 1-d input
is read as ``(n, 1)``. The two arguments of :func:`dcor` may have
different ``d`` but must share ``n``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    DegenerateSeriesError,
    InternalConsistencyError,
    InvalidDistanceMatrixError,
    NonFiniteInputError,
    SampleCountMismatchError,
    UserInputError,
)

NEGATIVE_CLAMP_TOL = 1e-12
_ROW_BLOCK = 512


def _as_samples(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise UserInputError(f"sample matrix must be 1-d or 2-d, got shape {a.shape}")
    if a.shape[0] < 2:
        raise UserInputError("need at least 2 samples")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInputError("sample matrix contains non-finite entries")
    return a


def pairwise_distances(m) -> np.ndarray:
    """Euclidean distance matrix between the rows of ``m``."""
    a = _as_samples(m)
    n = a.shape[0]
    out = np.empty((n, n))
    # row blocks keep the working set small; each block writes its own rows
    for lo in range(0, n, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, n)
        out[lo:hi] = cdist(a[lo:hi], a, "euclidean")
    # cdist already gives exact zeros on the diagonal; symmetrize bit-exactly
    out = np.triu(out) + np.triu(out, 1).T
    return out


def double_center(d: np.ndarray) -> np.ndarray:
    """Subtract row and column means and add back the grand mean."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InvalidDistanceMatrixError(f"distance matrix must be square, got {d.shape}")
    if not np.array_equal(d, d.T):
        scale = max(1.0, float(np.max(np.abs(d))))
        if np.max(np.abs(d - d.T)) > 1e-12 * scale:
            raise InvalidDistanceMatrixError("distance matrix is not symmetric")
        d = 0.5 * (d + d.T)
    row = d.mean(axis=1)
    # row_i + row_j is commutative in floating point, so the result is exactly symmetric
    return d - (row[:, None] + row[None, :]) + row.mean()


def _centered(m) -> np.ndarray:
    return double_center(pairwise_distances(m))


def _clamp(v: float) -> float:
    if v < 0:
        if v < -NEGATIVE_CLAMP_TOL:
            raise InternalConsistencyError(f"squared distance covariance is negative ({v:.3g})")
        return 0.0
    return v


def _check_n(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[0] != y.shape[0]:
        raise SampleCountMismatchError(f"sample counts differ: {x.shape[0]} vs {y.shape[0]}")


def dcov2_centered(b: np.ndarray, c: np.ndarray) -> float:
    n = b.shape[0]
    return _clamp(float(np.sum(b * c)) / (n * n))


def dcov2(x, y) -> float:
    """Squared sample distance covariance V^2(X, Y)."""
    x, y = _as_samples(x), _as_samples(y)
    _check_n(x, y)
    return dcov2_centered(_centered(x), _centered(y))


def dcor_squared_centered(b: np.ndarray, c: np.ndarray,
                          vx: float | None = None, vy: float | None = None) -> float:
    """R^2 from precomputed double-centred matrices (and optionally their dvars)."""
    vxy = dcov2_centered(b, c)
    vx = dcov2_centered(b, b) if vx is None else vx
    vy = dcov2_centered(c, c) if vy is None else vy
    denom = vx * vy
    if denom <= 0:
        return 0.0
    return min(1.0, max(0.0, vxy / math.sqrt(denom)))


def dcor_squared(x, y) -> float:
    x, y = _as_samples(x), _as_samples(y)
    _check_n(x, y)
    return dcor_squared_centered(_centered(x), _centered(y))


def dcor(x, y) -> float:
    """Empirical distance correlation R(X, Y) in [0, 1].

    Zero whenever either sample has zero distance variance.
    """
    return math.sqrt(dcor_squared(x, y))


class CenteredSample:
    """Double-centred distance matrix cached for repeated dcor calls."""

    def __init__(self, m):
        self.B = _centered(m)
        self.dvar = dcov2_centered(self.B, self.B)

    def dcor(self, other: "CenteredSample") -> float:
        if other.B.shape != self.B.shape:
            raise SampleCountMismatchError(
                f"sample counts differ: {self.B.shape[0]} vs {other.B.shape[0]}"
            )
        return math.sqrt(dcor_squared_centered(self.B, other.B, self.dvar, other.dvar))


def acf(values, max_lag: int) -> np.ndarray:
    """Sample autocorrelations rho(0..max_lag) with the biased (1/L) divisor.

    Index ``h`` of the result holds lag ``h``; ``rho[0] == 1``.
    """
    z = np.asarray(values, dtype=float)
    L = z.size
    if max_lag < 0 or L <= max_lag + 1:
        raise UserInputError(f"series of length {L} too short for max_lag={max_lag}")
    dev = z - z.mean()
    denom = float(np.dot(dev, dev))
    if not denom > 0:
        raise DegenerateSeriesError("series has zero variance")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for h in range(1, max_lag + 1):
        out[h] = float(np.dot(dev[h:], dev[:-h])) / denom
    return out


def acf_significance_band(L: int) -> float:
    """Half-width of the 95% white-noise band, 1.96 / sqrt(L)."""
    if L < 2:
        raise UserInputError("series length must be >= 2")
    return 1.96 / math.sqrt(L)
