"""Measure families: samplers, 1-d quantile evaluators, dataset handles.

Every family is a frozen dataclass with a ``dim`` property and a
``draw(k, rng)`` method returning a (k, dim) float array. Samplers take
an explicit numpy Generator; nothing in this module touches global
random state.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .errors import (
    DatasetFormatError,
    DatasetParseError,
    EmptyDatasetError,
    ParameterError,
    ShapeError,
    UnsupportedFamilyError,
)
from .transport import EmpiricalMeasure

__all__ = [
    "MeasureSpec",
    "Uniform01",
    "Exponential",
    "Weibull",
    "TukeyLambda",
    "Logistic",
    "Gaussian",
    "GaussianMixture",
    "LowRankGaussian",
    "SphereUniform",
    "TwoPoint",
    "IndependentSum",
    "Dataset",
    "DatasetHandle",
    "Quantile1D",
    "sample",
    "quantile1d",
    "load_dataset",
    "bootstrap_sample",
]

# smallest uniform variate fed to a quantile transform; rng.random() can
# return exactly 0.0, which maps to -inf for heavy lower tails
_U_FLOOR = 2.0 ** -53


class MeasureSpec:
    """Base class for samplable probability measures."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform01(MeasureSpec):
    """Uniform measure on [0, 1]."""

    @property
    def dim(self) -> int:
        return 1

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random((k, 1))


@dataclass(frozen=True)
class Exponential(MeasureSpec):
    """Exponential measure with the given rate (mean 1/rate)."""

    rate: float = 1.0

    def __post_init__(self) -> None:
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ParameterError(f"rate must be positive and finite, got {self.rate}")

    @property
    def dim(self) -> int:
        return 1

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return rng.exponential(scale=1.0 / self.rate, size=(k, 1))


@dataclass(frozen=True)
class Weibull(MeasureSpec):
    """Weibull measure with cdf 1 - exp(-x^shape) on x >= 0 (unit scale)."""

    shape: float

    def __post_init__(self) -> None:
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise ParameterError(f"shape must be positive and finite, got {self.shape}")

    @property
    def dim(self) -> int:
        return 1

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return rng.weibull(self.shape, size=(k, 1))


@dataclass(frozen=True)
class TukeyLambda(MeasureSpec):
    """Tukey lambda family; lam = 0 is the standard logistic.

    Sampling applies the quantile transform
    (u^lam - (1-u)^lam) / lam to uniform variates.
    """

    lam: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.lam):
            raise ParameterError(f"lambda must be finite, got {self.lam}")

    @property
    def dim(self) -> int:
        return 1

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        u = np.clip(rng.random((k, 1)), _U_FLOOR, None)
        return _tukey_quantile(u, self.lam)


@dataclass(frozen=True)
class Logistic(MeasureSpec):
    """Standard logistic measure (location 0, scale 1)."""

    @property
    def dim(self) -> int:
        return 1

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return rng.logistic(size=(k, 1))


@dataclass(frozen=True)
class Gaussian(MeasureSpec):
    """Gaussian with the given mean vector and diagonal covariance."""

    mean: tuple[float, ...] = (0.0,)
    cov_diag: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        mean = tuple(float(v) for v in np.atleast_1d(self.mean))
        cov = tuple(float(v) for v in np.atleast_1d(self.cov_diag))
        if len(mean) != len(cov) or len(mean) < 1:
            raise ParameterError(
                f"mean and cov_diag must have equal positive length, got {len(mean)} and {len(cov)}"
            )
        if any(not math.isfinite(v) for v in mean) or any(
            not (v >= 0 and math.isfinite(v)) for v in cov
        ):
            raise ParameterError("mean must be finite and cov_diag nonnegative finite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov_diag", cov)

    @property
    def dim(self) -> int:
        return len(self.mean)

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((k, self.dim))
        return np.asarray(self.mean) + np.sqrt(np.asarray(self.cov_diag)) * z


@dataclass(frozen=True)
class GaussianMixture(MeasureSpec):
    """Symmetric two-component isotropic Gaussian mixture with unit variance.

    Components sit at +-separation * e1 with equal weight; the per-axis
    component variance (1 - separation^2) / dim makes the total variance
    E||X - EX||^2 equal 1 for every separation in [0, 1).
    """

    separation: float
    dim_: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.separation < 1.0):
            raise ParameterError(f"separation must lie in [0, 1), got {self.separation}")
        if self.dim_ < 1:
            raise ParameterError(f"dim must be >= 1, got {self.dim_}")

    @property
    def dim(self) -> int:
        return self.dim_

    @property
    def component_std(self) -> float:
        return math.sqrt((1.0 - self.separation**2) / self.dim_)

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        signs = np.where(rng.random(k) < 0.5, -1.0, 1.0)
        pts = self.component_std * rng.standard_normal((k, self.dim_))
        pts[:, 0] += signs * self.separation
        return pts


@dataclass(frozen=True)
class LowRankGaussian(MeasureSpec):
    """Gaussian supported on a rank-dimensional coordinate subspace of R^dim.

    Covariance is diag(1/rank, ..., 1/rank, 0, ..., 0), so the total
    variance is 1 regardless of rank.
    """

    rank: int
    dim_: int

    def __post_init__(self) -> None:
        if not (1 <= self.rank <= self.dim_):
            raise ParameterError(f"need 1 <= rank <= dim, got rank={self.rank}, dim={self.dim_}")

    @property
    def dim(self) -> int:
        return self.dim_

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        pts = np.zeros((k, self.dim_))
        pts[:, : self.rank] = rng.standard_normal((k, self.rank)) / math.sqrt(self.rank)
        return pts


@dataclass(frozen=True)
class SphereUniform(MeasureSpec):
    """Uniform measure on the unit sphere of a span_dim coordinate subspace.

    Draws a span_dim-dimensional standard Gaussian, normalizes it to unit
    length, and zero-pads to R^dim. span_dim = 1 gives the two-point set
    {-e1, +e1}.
    """

    span_dim: int
    dim_: int

    def __post_init__(self) -> None:
        if not (1 <= self.span_dim <= self.dim_):
            raise ParameterError(
                f"need 1 <= span_dim <= dim, got span_dim={self.span_dim}, dim={self.dim_}"
            )

    @property
    def dim(self) -> int:
        return self.dim_

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        g = rng.standard_normal((k, self.span_dim))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        # a zero draw has probability zero; nudge rather than branch
        norms[norms == 0.0] = 1.0
        pts = np.zeros((k, self.dim_))
        pts[:, : self.span_dim] = g / norms
        return pts


@dataclass(frozen=True)
class TwoPoint(MeasureSpec):
    """Half mass at -e1/2, half at +e1/2, embedded in R^dim."""

    dim_: int = 1

    def __post_init__(self) -> None:
        if self.dim_ < 1:
            raise ParameterError(f"dim must be >= 1, got {self.dim_}")

    @property
    def dim(self) -> int:
        return self.dim_

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        pts = np.zeros((k, self.dim_))
        pts[:, 0] = np.where(rng.random(k) < 0.5, -0.5, 0.5)
        return pts


@dataclass(frozen=True)
class IndependentSum(MeasureSpec):
    """Sum of independent draws from two equal-dimension measures."""

    first: MeasureSpec
    second: MeasureSpec

    def __post_init__(self) -> None:
        if self.first.dim != self.second.dim:
            raise ParameterError(
                f"summands must share a dimension, got {self.first.dim} and {self.second.dim}"
            )

    @property
    def dim(self) -> int:
        return self.first.dim

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return self.first.draw(k, rng) + self.second.draw(k, rng)


# ---------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class DatasetHandle:
    """In-memory numeric table backing the bootstrap resampler."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ShapeError(f"rows must be a nonempty (m, d) array, got shape {np.shape(self.rows)}")
        if not np.all(np.isfinite(rows)):
            raise ShapeError("dataset rows must be finite")
        object.__setattr__(self, "rows", rows)

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class Dataset(MeasureSpec):
    """The empirical measure of a dataset; sampling bootstraps its rows."""

    handle: DatasetHandle

    @property
    def dim(self) -> int:
        return self.handle.d

    def draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return bootstrap_sample(self.handle, k, rng)


def load_dataset(path, delimiter: str = ",") -> DatasetHandle:
    """Load a delimited numeric table into a DatasetHandle.

    An optional single header line is detected (first physical line with
    any non-numeric field) and skipped. Row numbers in error messages are
    1-based over physical lines, header included. Accepts LF or CRLF.
    """
    try:
        fh = open(path, "r", newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise exc
    with fh:
        physical = [(i, row) for i, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1)]
    physical = [(i, row) for i, row in physical if any(f.strip() != "" for f in row)]
    if not physical:
        raise EmptyDatasetError(f"{path}: no data rows")

    def parse(row: list[str], rownum: int) -> list[float]:
        out = []
        for colnum, fieldtext in enumerate(row, start=1):
            try:
                out.append(float(fieldtext))
            except ValueError:
                raise DatasetParseError(
                    f"{path}: row {rownum}, column {colnum}: could not parse {fieldtext.strip()!r} as a number"
                ) from None
        return out

    start = 0
    first_num, first_row = physical[0]
    try:
        first_parsed = [float(f) for f in first_row]
    except ValueError:
        start = 1
        first_parsed = None
    data: list[list[float]] = []
    if first_parsed is not None:
        data.append(first_parsed)
    width = len(first_row) if first_parsed is not None else None
    for rownum, row in physical[start if first_parsed is None else 1 :]:
        if width is None:
            width = len(row)
        if len(row) != width:
            raise DatasetFormatError(
                f"{path}: row {rownum}: expected {width} fields, found {len(row)}"
            )
        data.append(parse(row, rownum))
    if not data:
        raise EmptyDatasetError(f"{path}: no data rows")
    return DatasetHandle(rows=np.asarray(data, dtype=np.float64))


def bootstrap_sample(handle: DatasetHandle, k: int, rng: np.random.Generator) -> np.ndarray:
    """Draw k rows with replacement (no smoothing, no centering)."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    idx = rng.integers(0, handle.m, size=k)
    return handle.rows[idx].copy()


def sample(spec: MeasureSpec, k: int, rng: np.random.Generator) -> EmpiricalMeasure:
    """Draw a k-point empirical measure from the family."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    return EmpiricalMeasure(points=spec.draw(k, rng))


# ---------------------------------------------------------------------------
# 1-d quantile machinery


@dataclass(frozen=True)
class Quantile1D:
    """Vectorized evaluators for a one-dimensional measure.

    quantile and quantile_density map the open interval (0, 1); cdf and
    density map the real line. quantile_density(u) * density(quantile(u))
    equals 1 wherever the density is positive.
    """

    name: str
    quantile: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    density: Callable[[np.ndarray], np.ndarray]
    quantile_density: Callable[[np.ndarray], np.ndarray]


def _check_unit_open(u) -> np.ndarray:
    arr = np.asarray(u, dtype=np.float64)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ParameterError("quantile arguments must lie strictly inside (0, 1)")
    return arr


def _tukey_quantile(u: np.ndarray, lam: float) -> np.ndarray:
    if lam == 0.0:
        return special.logit(u)
    return (u**lam - (1.0 - u) ** lam) / lam


def quantile1d(spec: MeasureSpec) -> Quantile1D:
    """Quantile/cdf/density evaluators for a one-dimensional family.

    Raises UnsupportedFamilyError for multivariate or purely empirical
    specs (their quantile structure is not defined here).
    """
    if isinstance(spec, Uniform01):
        return Quantile1D(
            name="uniform01",
            quantile=lambda u: _check_unit_open(u) * 1.0,
            cdf=lambda x: np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0),
            density=lambda x: _indicator_density(x, 0.0, 1.0),
            quantile_density=lambda u: np.ones_like(_check_unit_open(u)),
        )
    if isinstance(spec, Exponential):
        lam = spec.rate
        return Quantile1D(
            name=f"exponential(rate={lam:g})",
            quantile=lambda u: -np.log1p(-_check_unit_open(u)) / lam,
            cdf=lambda x: -np.expm1(-lam * np.maximum(np.asarray(x, dtype=np.float64), 0.0)),
            density=lambda x: np.where(
                np.asarray(x, dtype=np.float64) >= 0.0,
                lam * np.exp(-lam * np.maximum(np.asarray(x, dtype=np.float64), 0.0)),
                0.0,
            ),
            quantile_density=lambda u: 1.0 / (lam * (1.0 - _check_unit_open(u))),
        )
    if isinstance(spec, Weibull):
        a = spec.shape
        def w_quantile(u):
            return (-np.log1p(-_check_unit_open(u))) ** (1.0 / a)
        def w_cdf(x):
            x = np.maximum(np.asarray(x, dtype=np.float64), 0.0)
            return -np.expm1(-(x**a))
        def w_density(x):
            x = np.asarray(x, dtype=np.float64)
            with np.errstate(divide="ignore", invalid="ignore"):
                val = a * x ** (a - 1.0) * np.exp(-(x**a))
            return np.where(x > 0.0, val, 0.0 if a != 1.0 else 1.0)
        def w_qd(u):
            u = _check_unit_open(u)
            t = -np.log1p(-u)
            return t ** (1.0 / a - 1.0) / (a * (1.0 - u))
        return Quantile1D(
            name=f"weibull(shape={a:g})",
            quantile=w_quantile,
            cdf=w_cdf,
            density=w_density,
            quantile_density=w_qd,
        )
    if isinstance(spec, Logistic) or (isinstance(spec, TukeyLambda) and spec.lam == 0.0):
        return Quantile1D(
            name="logistic",
            quantile=lambda u: special.logit(_check_unit_open(u)),
            cdf=lambda x: special.expit(np.asarray(x, dtype=np.float64)),
            density=lambda x: special.expit(np.asarray(x, dtype=np.float64))
            * special.expit(-np.asarray(x, dtype=np.float64)),
            quantile_density=lambda u: 1.0
            / (_check_unit_open(u) * (1.0 - _check_unit_open(u))),
        )
    if isinstance(spec, TukeyLambda):
        lam = spec.lam
        def t_quantile(u):
            return _tukey_quantile(_check_unit_open(u), lam)
        def t_cdf(x):
            return special.tklmbda(np.asarray(x, dtype=np.float64), lam)
        def t_qd(u):
            u = _check_unit_open(u)
            return u ** (lam - 1.0) + (1.0 - u) ** (lam - 1.0)
        def t_density(x):
            u = np.clip(t_cdf(x), _U_FLOOR, 1.0 - 2.0**-53)
            qd = t_qd(u)
            inside = np.isfinite(np.asarray(x, dtype=np.float64))
            if lam > 0.0:
                lim = 1.0 / lam
                inside &= (np.asarray(x) >= -lim) & (np.asarray(x) <= lim)
            return np.where(inside, 1.0 / qd, 0.0)
        return Quantile1D(
            name=f"tukey(lambda={lam:g})",
            quantile=t_quantile,
            cdf=t_cdf,
            density=t_density,
            quantile_density=t_qd,
        )
    if isinstance(spec, Gaussian) and spec.dim == 1:
        loc = spec.mean[0]
        scale = math.sqrt(spec.cov_diag[0])
        if scale <= 0.0:
            raise UnsupportedFamilyError("degenerate (zero-variance) Gaussian has no density")
        inv_sqrt2pi = 1.0 / math.sqrt(2.0 * math.pi)
        def g_density(x):
            z = (np.asarray(x, dtype=np.float64) - loc) / scale
            return inv_sqrt2pi / scale * np.exp(-0.5 * z * z)
        def g_qd(u):
            z = special.ndtri(_check_unit_open(u))
            return scale / (inv_sqrt2pi * np.exp(-0.5 * z * z))
        return Quantile1D(
            name=f"gaussian(mean={loc:g}, var={scale**2:g})",
            quantile=lambda u: loc + scale * special.ndtri(_check_unit_open(u)),
            cdf=lambda x: special.ndtr((np.asarray(x, dtype=np.float64) - loc) / scale),
            density=g_density,
            quantile_density=g_qd,
        )
    raise UnsupportedFamilyError(
        f"no quantile evaluators for {type(spec).__name__} (dim {getattr(spec, 'dim', '?')})"
    )


def _indicator_density(x, lo: float, hi: float) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    return np.where((arr >= lo) & (arr <= hi), 1.0 / (hi - lo), 0.0)
