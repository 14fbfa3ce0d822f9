"""Sweeps of the estimator over k-grids and log-log slope recovery."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .kvariance import estimate_kvar
from .measures import GaussianMixture, MeasureSpec, SphereUniform
from .streams import derive_seed

__all__ = [
    "SweepConfig",
    "SweepRecord",
    "SlopeFit",
    "run_sweep",
    "fit_loglog_slope",
    "gmm_sweep",
    "sphere_sweep",
]


@dataclass(frozen=True)
class SweepRecord:
    """One (k, estimate) point of a sweep curve."""

    label: str
    k: int
    estimate: float
    stderr: float
    n: int
    elapsed_seconds: float


@dataclass(frozen=True)
class SweepConfig:
    """A labelled estimator sweep over a k-grid."""

    spec: MeasureSpec
    k_grid: tuple[int, ...]
    n_per_k: int
    master_seed: int
    label: str = "sweep"
    workers: int = 1
    support_radius: float | None = None

    def __post_init__(self) -> None:
        grid = tuple(int(k) for k in self.k_grid)
        if len(grid) < 1 or any(k < 1 for k in grid):
            raise ParameterError(f"k_grid must be nonempty positive integers, got {self.k_grid}")
        if self.n_per_k < 1:
            raise ParameterError(f"n_per_k must be >= 1, got {self.n_per_k}")
        object.__setattr__(self, "k_grid", grid)


def run_sweep(config: SweepConfig) -> list[SweepRecord]:
    """Estimate the k-variance at every grid k.

    Each grid point gets its own seed derived from (master_seed, k), so a
    record depends only on its own (spec, k, n, seed) and not on grid
    order or the other points.
    """
    records = []
    for k in config.k_grid:
        seed = derive_seed(config.master_seed, k)
        t0 = time.perf_counter()
        est = estimate_kvar(
            config.spec,
            k,
            config.n_per_k,
            seed,
            workers=config.workers,
            support_radius=config.support_radius,
        )
        elapsed = time.perf_counter() - t0
        records.append(
            SweepRecord(
                label=config.label,
                k=k,
                estimate=est.estimate,
                stderr=est.stderr,
                n=config.n_per_k,
                elapsed_seconds=elapsed,
            )
        )
    return records


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line through (log k, log estimate)."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int


def fit_loglog_slope(records: list[SweepRecord], k_min: int = 32) -> SlopeFit:
    """Fit log(estimate) ~ slope * log(k) + intercept over records with k >= k_min.

    Records with nonpositive estimates cannot enter the log fit; they are
    dropped with a warning. Fewer than 3 usable records raises
    InsufficientDataError.
    """
    usable = [r for r in records if r.k >= k_min]
    dropped = [r for r in usable if r.estimate <= 0.0]
    if dropped:
        warnings.warn(
            f"dropping {len(dropped)} nonpositive estimate(s) from the log-log fit",
            RuntimeWarning,
            stacklevel=2,
        )
        usable = [r for r in usable if r.estimate > 0.0]
    if len(usable) < 3:
        raise InsufficientDataError(
            f"log-log fit needs at least 3 records with k >= {k_min} and positive estimates, "
            f"got {len(usable)}"
        )
    x = np.log([r.k for r in usable])
    y = np.log([r.estimate for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid * resid)) / ss_tot
    return SlopeFit(slope=float(slope), intercept=float(intercept), r_squared=r2, n_points=len(usable))


def gmm_sweep(
    separations,
    dim: int,
    k_grid,
    n_per_k: int,
    master_seed: int,
    workers: int = 1,
) -> dict[str, list[SweepRecord]]:
    """One sweep curve per mixture separation, with per-curve derived seeds."""
    curves: dict[str, list[SweepRecord]] = {}
    for idx, x in enumerate(separations):
        label = f"x={float(x):g}"
        config = SweepConfig(
            spec=GaussianMixture(separation=float(x), dim_=dim),
            k_grid=tuple(k_grid),
            n_per_k=n_per_k,
            master_seed=derive_seed(master_seed, idx),
            label=label,
            workers=workers,
        )
        curves[label] = run_sweep(config)
    return curves


def sphere_sweep(
    span_dims,
    dim: int,
    k_grid,
    n_per_k: int,
    master_seed: int,
    k_min: int = 32,
    workers: int = 1,
) -> tuple[dict[str, list[SweepRecord]], dict[str, SlopeFit]]:
    """Sweep spheres of several span dimensions and fit their decay slopes."""
    curves: dict[str, list[SweepRecord]] = {}
    slopes: dict[str, SlopeFit] = {}
    for idx, dprime in enumerate(span_dims):
        label = f"dprime={int(dprime)}"
        config = SweepConfig(
            spec=SphereUniform(span_dim=int(dprime), dim_=dim),
            k_grid=tuple(k_grid),
            n_per_k=n_per_k,
            master_seed=derive_seed(master_seed, idx),
            label=label,
            workers=workers,
        )
        curves[label] = run_sweep(config)
        slopes[label] = fit_loglog_slope(curves[label], k_min=k_min)
    return curves, slopes
