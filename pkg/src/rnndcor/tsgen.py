"""Synthetic AR / MA / ARMA / GARCH series and CSV ingestion.

All generators draw their white noise from a ``numpy.random.Generator``
backed by PCG64 and seeded only from :class:`NoiseSpec`, so a given
(params, noise, length, burn_in) tuple always yields the same series.
Pre-history is zero for ``z`` and ``epsilon`` and ``alpha0`` for the GARCH
variance; the first ``burn_in`` values are discarded.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import (
    GarchConstraintError,
    InvalidLength,
    NumericalInstabilityError,
    ParseError,
    StationarityError,
    UserInputError,
)

DEFAULT_BURN_IN = 500
DEFAULT_LAG_COEFF = 0.8
GARCH_VARIANCE_LIMIT = 1e12


class Origin(str, enum.Enum):
    AR = "AR"
    MA = "MA"
    ARMA = "ARMA"
    GARCH = "GARCH"
    CSV = "CSV"


@dataclass(frozen=True)
class NoiseSpec:
    mean: float = 0.0
    std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.std > 0 and math.isfinite(self.std)):
            raise UserInputError(f"noise std must be > 0, got {self.std}")
        if not math.isfinite(self.mean):
            raise UserInputError("noise mean must be finite")
        if not 0 <= int(self.seed) < 2**64:
            raise UserInputError("seed must be a 64-bit unsigned integer")

    def draw(self, size: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(int(self.seed)))
        return self.mean + self.std * rng.standard_normal(size)


def _strip_trailing_zeros(coeffs: Sequence[float]) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else c[:0]


def is_stationary(coeffs: Sequence[float]) -> bool:
    """True when 1 - c_1 x - ... - c_p x^p has every root outside the unit circle."""
    c = _strip_trailing_zeros(coeffs)
    if c.size == 0:
        return True
    # np.roots wants the highest degree first
    poly = np.concatenate([-c[::-1], [1.0]])
    roots = np.roots(poly)
    return bool(np.all(np.abs(roots) > 1.0 + 1e-9))


@dataclass(frozen=True)
class ArParams:
    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not all(math.isfinite(c) for c in self.coeffs):
            raise UserInputError("AR coefficients must be finite")
        if not is_stationary(self.coeffs):
            raise StationarityError(
                f"AR coefficients {list(self.coeffs)} are not stationary "
                "(characteristic polynomial has a root on or inside the unit circle)"
            )

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @classmethod
    def single_lag(cls, p: int, value: float = DEFAULT_LAG_COEFF) -> "ArParams":
        return cls(lag_coeffs(p, value))


@dataclass(frozen=True)
class MaParams:
    coeffs: tuple[float, ...]
    delta: float = 0.0

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            coeffs = (0.0,)
        object.__setattr__(self, "coeffs", coeffs)
        if not all(math.isfinite(c) for c in coeffs) or not math.isfinite(self.delta):
            raise UserInputError("MA coefficients and delta must be finite")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @classmethod
    def single_lag(cls, q: int, value: float = DEFAULT_LAG_COEFF, delta: float = 0.0) -> "MaParams":
        return cls(lag_coeffs(q, value), delta)


@dataclass(frozen=True)
class GarchParams:
    alpha0: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        vals = (self.alpha0, *self.alpha, *self.beta)
        if not all(math.isfinite(v) for v in vals):
            raise GarchConstraintError("GARCH parameters must be finite")
        if self.alpha0 <= 0:
            raise GarchConstraintError(f"alpha0 must be > 0, got {self.alpha0}")
        if any(a < 0 for a in self.alpha) or any(b < 0 for b in self.beta):
            raise GarchConstraintError("alpha and beta coefficients must be >= 0")
        if sum(self.alpha) + sum(self.beta) >= 1:
            raise GarchConstraintError(
                f"sum(alpha) + sum(beta) = {sum(self.alpha) + sum(self.beta):.6g} must be < 1"
            )

    @classmethod
    def default(cls, p: int, q: int) -> "GarchParams":
        """Default parameterization used when only the orders are given.

        alpha0 = 0.1; the ARCH weights split 0.3 and the GARCH weights 0.1
        evenly across their lags. The squared-variance recursion has an
        unstable fixed point, and larger GARCH weights make it reachable.
        """
        if p < 1 or q < 0:
            raise UserInputError("GARCH order must have p >= 1, q >= 0")
        return cls(0.1, (0.3 / p,) * p, (0.1 / q,) * q if q else ())


@dataclass
class TimeSeries:
    values: np.ndarray
    origin: Origin
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    variance: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise InvalidLength("a time series needs at least 2 observations")
        if not np.all(np.isfinite(self.values)):
            raise NumericalInstabilityError("time series contains non-finite values")

    def __len__(self) -> int:
        return self.values.size

    def describe(self) -> dict[str, Any]:
        return {
            "origin": self.origin.value,
            "length": len(self),
            "seed": self.seed,
            "params": self.params,
        }


def lag_coeffs(order: int, value: float = DEFAULT_LAG_COEFF) -> tuple[float, ...]:
    """Coefficient vector of the given order with a single non-zero entry at the largest lag."""
    if order < 1:
        raise UserInputError(f"process order must be >= 1, got {order}")
    return (0.0,) * (order - 1) + (float(value),)


def _check_lengths(length: int, burn_in: int) -> None:
    if int(length) < 2:
        raise InvalidLength(f"length must be >= 2, got {length}")
    if int(burn_in) < 0:
        raise InvalidLength(f"burn_in must be >= 0, got {burn_in}")


def _arma_core(ar: np.ndarray, ma: np.ndarray, delta: float, eps: np.ndarray,
               contemporaneous: bool) -> np.ndarray:
    """z_l = sum_i ar_i z_{l-i} + delta + [eps_l] + sum_i ma_i eps_{l-i}, zero pre-history."""
    p, q = ar.size, ma.size
    total = eps.size
    # left-pad with zero pre-history so every lag index is valid
    z = np.zeros(total + p)
    e = np.concatenate([np.zeros(q), eps])
    ar_rev = ar[::-1].copy()
    ma_rev = ma[::-1].copy()
    for l in range(total):
        acc = delta
        if p:
            acc += float(np.dot(ar_rev, z[l:l + p]))
        if q:
            acc += float(np.dot(ma_rev, e[l:l + q]))
        if contemporaneous:
            acc += e[l + q]
        z[l + p] = acc
    return z[p:]


def gen_ar(params: ArParams, noise: NoiseSpec, length: int,
           burn_in: int = DEFAULT_BURN_IN) -> TimeSeries:
    _check_lengths(length, burn_in)
    eps = noise.draw(burn_in + length)
    z = _arma_core(np.asarray(params.coeffs), np.zeros(0), 0.0, eps, contemporaneous=True)
    return TimeSeries(
        z[burn_in:], Origin.AR,
        {"ar": list(params.coeffs), "noise_mean": noise.mean, "noise_std": noise.std,
         "burn_in": burn_in},
        seed=noise.seed,
    )


def gen_ma(params: MaParams, noise: NoiseSpec, length: int,
           burn_in: int = DEFAULT_BURN_IN, standard_form: bool = False) -> TimeSeries:
    """Moving-average series ``z_l = delta + sum theta_i eps_{l-i}``.

    With ``standard_form`` the contemporaneous shock ``eps_l`` is added,
    giving the textbook MA(q).
    """
    _check_lengths(length, burn_in)
    eps = noise.draw(burn_in + length)
    z = _arma_core(np.zeros(0), np.asarray(params.coeffs), params.delta, eps,
                   contemporaneous=standard_form)
    return TimeSeries(
        z[burn_in:], Origin.MA,
        {"ma": list(params.coeffs), "delta": params.delta, "standard_form": standard_form,
         "noise_mean": noise.mean, "noise_std": noise.std, "burn_in": burn_in},
        seed=noise.seed,
    )


def gen_arma(ar: ArParams, ma: MaParams, noise: NoiseSpec, length: int,
             burn_in: int = DEFAULT_BURN_IN) -> TimeSeries:
    """AR recursion (with its shock eps_l) plus the lagged MA terms and delta.

    Zeroing the MA side reproduces :func:`gen_ar`; zeroing the AR side
    reproduces ``gen_ma(..., standard_form=True)``.
    """
    _check_lengths(length, burn_in)
    eps = noise.draw(burn_in + length)
    z = _arma_core(np.asarray(ar.coeffs), np.asarray(ma.coeffs), ma.delta, eps,
                   contemporaneous=True)
    return TimeSeries(
        z[burn_in:], Origin.ARMA,
        {"ar": list(ar.coeffs), "ma": list(ma.coeffs), "delta": ma.delta,
         "noise_mean": noise.mean, "noise_std": noise.std, "burn_in": burn_in},
        seed=noise.seed,
    )


def gen_garch(params: GarchParams, noise: NoiseSpec, length: int,
              burn_in: int = DEFAULT_BURN_IN, standard_form: bool = False) -> TimeSeries:
    """GARCH series ``z_l = sqrt(h_l) eps_l``.

    Default variance recursion squares the lagged variances,
    ``h_l = a0 + sum a_i z_{l-i}^2 + sum b_j h_{l-j}^2``; ``standard_form``
    uses the unsquared ``h_{l-j}``. The retained variances are returned in
    ``TimeSeries.variance``.
    """
    _check_lengths(length, burn_in)
    eps = noise.draw(burn_in + length)
    total = eps.size
    a = np.asarray(params.alpha)[::-1].copy()
    b = np.asarray(params.beta)[::-1].copy()
    p, q = a.size, b.size
    z = np.zeros(total + p)
    h = np.full(total + q, params.alpha0)
    for l in range(total):
        hl = params.alpha0
        if p:
            hl += float(np.dot(a, z[l:l + p] ** 2))
        if q:
            lagged = h[l:l + q]
            hl += float(np.dot(b, lagged if standard_form else lagged ** 2))
        if not math.isfinite(hl) or hl > GARCH_VARIANCE_LIMIT:
            raise NumericalInstabilityError(
                f"GARCH variance diverged at step {l} (h = {hl:.6g})"
            )
        h[l + q] = hl
        z[l + p] = math.sqrt(hl) * eps[l]
    return TimeSeries(
        z[p + burn_in:], Origin.GARCH,
        {"alpha0": params.alpha0, "alpha": list(params.alpha), "beta": list(params.beta),
         "standard_form": standard_form, "noise_mean": noise.mean,
         "noise_std": noise.std, "burn_in": burn_in},
        seed=noise.seed,
        variance=h[q + burn_in:].copy(),
    )


def load_csv(path: str | Path, column: int | str = 0, *, skip_header: bool = False,
             delimiter: str = ",", rows: tuple[int, int] | None = None) -> TimeSeries:
    """Read one column of a delimited file as a series.

    ``column`` is a 0-based index, or a header name (implies a header row).
    ``rows`` is a half-open ``(start, stop)`` range over the data rows.
    Parse errors cite the 1-based line number in the file.
    """
    path = Path(path)
    if not path.is_file():
        raise UserInputError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        lines = list(reader)

    first = 0
    if isinstance(column, str):
        if not lines:
            raise ParseError(f"{path}: empty file")
        header = [h.strip() for h in lines[0]]
        if column not in header:
            raise ParseError(f"{path}: column {column!r} not in header {header}")
        col = header.index(column)
        first = 1
    else:
        col = int(column)
        first = 1 if skip_header else 0

    values, linenos = [], []
    for lineno, row in enumerate(lines[first:], start=first + 1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if col >= len(row):
            raise ParseError(f"{path}: row {lineno} has no column {col}")
        cell = row[col].strip()
        try:
            v = float(cell)
        except ValueError:
            raise ParseError(f"{path}: cannot parse {cell!r} as a number at row {lineno}") from None
        if not math.isfinite(v):
            raise ParseError(f"{path}: non-finite value {cell!r} at row {lineno}")
        values.append(v)
        linenos.append(lineno)

    if rows is not None:
        start, stop = rows
        values = values[start:stop]
    if len(values) < 2:
        raise InvalidLength(f"{path}: need at least 2 data rows, found {len(values)}")
    return TimeSeries(
        np.array(values), Origin.CSV,
        {"path": str(path), "column": column, "rows": len(values),
         "row_range": list(rows) if rows else None},
    )


def write_series_csv(path: str | Path, series: TimeSeries | np.ndarray, header: bool = True) -> None:
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(["value"])
        for v in values:
            w.writerow([repr(float(v))])
