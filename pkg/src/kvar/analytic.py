"""Closed forms, order-statistic identities, bounds, and limit quadrature.

In one dimension the k-variance decomposes over order statistics:

    kvar_k = sum_i Var(X_(i)),   X_(1) <= ... <= X_(k) from one k-sample,

which yields exact values for the uniform (Beta order statistics) and
exponential (Renyi representation) parents, a Taylor-style surrogate on
the quantile grid p_i = i/(k+1), and the large-k limit

    kvar_inf = integral_0^1 u(1-u) * quantile_density(u)^2 du.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InsufficientDataError, ParameterError, SingularityError, UnsupportedFamilyError
from .kvariance import scaling_rate
from .measures import MeasureSpec, Quantile1D

__all__ = [
    "OrderStatSummary",
    "Bounds1D",
    "UNIT_SQUARE_VARINF",
    "harmonic",
    "kvar_uniform",
    "kvar_exponential",
    "varinf_weibull",
    "varinf_tukey",
    "kvar_two_point",
    "order_stats_uniform",
    "order_stats_exponential",
    "order_stats_mc",
    "uniform_order_stat_covariance",
    "order_stat_correlation_bound",
    "bounds_1d",
    "kvar_from_order_stats",
    "kvar_taylor_approx",
    "varinf_integral",
    "clustered_bound",
]

# large-k limit of the k-variance of the uniform measure on the unit square
UNIT_SQUARE_VARINF = 1.0 / (2.0 * math.pi)

_HARMONIC_DIRECT_MAX = 10**6


def harmonic(k: int) -> float:
    """k-th harmonic number; exact partial sum up to 1e6, asymptotic beyond."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if k <= _HARMONIC_DIRECT_MAX:
        return float(np.sum(1.0 / np.arange(1, k + 1, dtype=np.float64)))
    return math.log(k) + np.euler_gamma + 1.0 / (2.0 * k) - 1.0 / (12.0 * k * k)


def kvar_uniform(k: int) -> float:
    """k-variance of Uniform[0,1]: k / (6(k+1)); limit 1/6."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    return k / (6.0 * (k + 1.0))


def kvar_exponential(k: int, rate: float = 1.0) -> float:
    """k-variance of the exponential: H_k / rate^2; diverges with k."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not (rate > 0 and math.isfinite(rate)):
        raise ParameterError(f"rate must be positive finite, got {rate}")
    return harmonic(k) / (rate * rate)


def varinf_weibull(shape: float) -> float:
    """Limit k-variance of the unit-scale Weibull: Gamma(2/shape) / (shape(shape-2)).

    Finite only for shape > 2 (tails lighter than squared-exponential);
    shape <= 2 returns inf.
    """
    if not (shape > 0 and math.isfinite(shape)):
        raise ParameterError(f"shape must be positive finite, got {shape}")
    if shape <= 2.0:
        return math.inf
    return float(special.gamma(2.0 / shape) / (shape * (shape - 2.0)))


def varinf_tukey(lam: float) -> float:
    """Limit expression 2 / ((lam+1)(lam+2)) for the Tukey lambda family.

    Guaranteed as a limit for lam >= 2 and at lam = 0 (logistic); for
    other lam in (-1, 2) the value only bounds the limsup, and a
    RuntimeWarning says so. lam <= -1 is divergent and raises.
    """
    if not math.isfinite(lam):
        raise ParameterError(f"lambda must be finite, got {lam}")
    if lam <= -1.0:
        raise ParameterError(f"lambda must exceed -1 (divergent otherwise), got {lam}")
    if -1.0 < lam < 2.0 and lam != 0.0:
        warnings.warn(
            f"lambda={lam:g}: value is an upper bound on the limsup, not a guaranteed limit",
            RuntimeWarning,
            stacklevel=2,
        )
    return 2.0 / ((lam + 1.0) * (lam + 2.0))


def kvar_two_point(k: int, d: int) -> float:
    """k-variance of half mass at -e1/2, half at +e1/2 in R^d.

    Equals rate(k, d) * C(2k, k) / 2^(2k+1); as k grows this behaves like
    rate(k, d) / (2 sqrt(pi k)). Exact binomials up to k = 500, log-gamma
    beyond (the central binomial coefficient overflows doubles there).
    """
    rate = scaling_rate(k, d)
    if k <= 500:
        return rate * (math.comb(2 * k, k) / float(2 ** (2 * k + 1)))
    log_binom = special.gammaln(2 * k + 1) - 2.0 * special.gammaln(k + 1)
    return rate * math.exp(log_binom - (2 * k + 1) * math.log(2.0))


# ---------------------------------------------------------------------------
# order statistics


@dataclass(frozen=True)
class OrderStatSummary:
    """Per-rank means/variances of a sorted k-sample plus parent moments."""

    k: int
    means: np.ndarray
    variances: np.ndarray
    parent_mean: float
    parent_variance: float

    def __post_init__(self) -> None:
        means = np.asarray(self.means, dtype=np.float64)
        variances = np.asarray(self.variances, dtype=np.float64)
        if means.shape != (self.k,) or variances.shape != (self.k,):
            raise ParameterError(
                f"means/variances must have shape ({self.k},), got {means.shape} and {variances.shape}"
            )
        if np.any(variances < 0):
            raise ParameterError("variances must be nonnegative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)


def order_stats_uniform(k: int) -> OrderStatSummary:
    """Exact Beta(i, k+1-i) order-statistic moments of Uniform[0,1]."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    i = np.arange(1, k + 1, dtype=np.float64)
    p = i / (k + 1.0)
    return OrderStatSummary(
        k=k,
        means=p,
        variances=p * (1.0 - p) / (k + 2.0),
        parent_mean=0.5,
        parent_variance=1.0 / 12.0,
    )


def order_stats_exponential(k: int, rate: float = 1.0) -> OrderStatSummary:
    """Exact exponential order-statistic moments via the spacing representation.

    X_(i) = (1/rate) * sum_{j<=i} Z_j / (k - j + 1) with iid standard
    exponential Z_j, so means and variances are prefix sums of
    1/(k-j+1) and 1/(k-j+1)^2.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not (rate > 0 and math.isfinite(rate)):
        raise ParameterError(f"rate must be positive finite, got {rate}")
    inv = 1.0 / np.arange(k, 0, -1, dtype=np.float64)
    return OrderStatSummary(
        k=k,
        means=np.cumsum(inv) / rate,
        variances=np.cumsum(inv * inv) / (rate * rate),
        parent_mean=1.0 / rate,
        parent_variance=1.0 / (rate * rate),
    )


def order_stats_mc(
    spec: MeasureSpec, k: int, n_reps: int, rng: np.random.Generator, block: int = 4096
) -> OrderStatSummary:
    """Monte-Carlo order-statistic moments from n_reps sorted k-samples."""
    if spec.dim != 1:
        raise UnsupportedFamilyError("order statistics require a one-dimensional measure")
    if k < 1 or n_reps < 2:
        raise ParameterError(f"need k >= 1 and n_reps >= 2, got k={k}, n_reps={n_reps}")
    sums = np.zeros(k)
    sumsq = np.zeros(k)
    done = 0
    while done < n_reps:
        b = min(block, n_reps - done)
        x = np.sort(spec.draw(b * k, rng).reshape(b, k), axis=1)
        sums += x.sum(axis=0)
        sumsq += (x * x).sum(axis=0)
        done += b
    n = float(n_reps)
    means = sums / n
    variances = np.maximum((sumsq - n * means * means) / (n - 1.0), 0.0)
    total = k * n
    parent_mean = float(sums.sum() / total)
    parent_var = float((sumsq.sum() - total * parent_mean**2) / (total - 1.0))
    return OrderStatSummary(
        k=k,
        means=means,
        variances=variances,
        parent_mean=parent_mean,
        parent_variance=max(parent_var, 0.0),
    )


def uniform_order_stat_covariance(k: int) -> np.ndarray:
    """Covariance matrix of uniform order statistics: p_i(1-p_j)/(k+2), i <= j."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    p = np.arange(1, k + 1, dtype=np.float64) / (k + 1.0)
    lo = np.minimum.outer(p, p)
    hi = np.maximum.outer(p, p)
    return lo * (1.0 - hi) / (k + 2.0)


def order_stat_correlation_bound(k: int, i, j) -> np.ndarray:
    """Maximal correlation of ranks i <= j: sqrt(i(k+1-j) / (j(k+1-i))).

    Attained by the uniform parent; every other parent correlates ranks
    no more strongly.
    """
    i = np.asarray(i, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    if np.any(i < 1) or np.any(j > k) or np.any(i > j):
        raise ParameterError("need 1 <= i <= j <= k")
    return np.sqrt(i * (k + 1.0 - j) / (j * (k + 1.0 - i)))


@dataclass(frozen=True)
class Bounds1D:
    """Two-sided k-variance bounds from order-statistic moments."""

    lower: float
    upper: float
    upper_loose: float


def kvar_from_order_stats(summary: OrderStatSummary) -> float:
    """Exact 1-d identity: the k-variance is the summed rank variances."""
    return float(np.sum(summary.variances))


def bounds_1d(summary: OrderStatSummary) -> Bounds1D:
    """Sandwich the 1-d k-variance between moment-based bounds.

    upper       k*sigma^2 - sum_i (mean_i - parent_mean)^2, an identity
                when the summary moments are exact;
    upper_loose k*sigma^2;
    lower       k*sigma^2 - 2 sum_{i<j} sd_i sd_j * corr_bound(i, j),
                tight for the uniform parent.
    """
    k = summary.k
    ks2 = k * summary.parent_variance
    centered = summary.means - summary.parent_mean
    upper = ks2 - float(np.sum(centered * centered))
    sd = np.sqrt(summary.variances)
    idx = np.arange(1, k + 1, dtype=np.float64)
    ratio = np.sqrt(
        np.outer(idx, (k + 1.0 - idx)) / np.outer((k + 1.0 - idx), idx)
    )
    # only i < j: pair (row i, col j) with the rank-i/rank-j bound
    iu = np.triu_indices(k, 1)
    cross = float(np.sum(sd[iu[0]] * sd[iu[1]] * ratio[iu]))
    return Bounds1D(lower=ks2 - 2.0 * cross, upper=upper, upper_loose=ks2)


# ---------------------------------------------------------------------------
# quantile-based surrogates


def kvar_taylor_approx(q: Quantile1D, k: int) -> float:
    """Taylor surrogate (1/(k+2)) * sum_i p_i(1-p_i) quantile_density(p_i)^2.

    p_i = i / (k+1). Exact for the uniform parent at every k; elsewhere
    accurate to O(1/sqrt(k)). Raises SingularityError when the density
    vanishes at some grid point (infinite quantile density).
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    p = np.arange(1, k + 1, dtype=np.float64) / (k + 1.0)
    qd = np.asarray(q.quantile_density(p), dtype=np.float64)
    bad = ~np.isfinite(qd)
    if np.any(bad):
        first = p[bad][0]
        raise SingularityError(f"quantile density is not finite at p={first:.6g}")
    return float(np.sum(p * (1.0 - p) * qd * qd) / (k + 2.0))


# quadrature window: u = sigmoid(s) on |s| <= _S_MAX keeps 1-u above
# machine epsilon so black-box quantile densities stay evaluable
_S_MAX = 26.0
_FIT_LO = 16.0
# fitted tail exponents above this are treated as divergent; the margin
# keeps log-divergent integrands (local exponent ~ -1.1) out of the
# convergent branch at the price of misreading true exponents in
# (-1.15, -1), e.g. Weibull shapes just above 2
_DIVERGENCE_EXPONENT = -1.15
_NEGLIGIBLE = 1e-13


def varinf_integral(q: Quantile1D, nodes: int = 4096) -> float:
    """Limit k-variance via the graded quadrature of u(1-u) qd(u)^2 on (0,1).

    Substitutes u = sigmoid(s) and integrates the transformed integrand
    over |s| <= 26 with a trapezoid rule, then completes each endpoint
    with a power-law tail fitted on v = -log(1-u) in [16, 26] (mirrored
    for u -> 0). Divergence is declared when nested-window estimates grow
    by more than 10% twice in a row, or when a fitted tail exponent is
    >= -1.15 with non-negligible edge mass; the result is then inf.
    """
    if nodes < 64:
        raise ParameterError(f"need at least 64 nodes, got {nodes}")
    # multiple of 8 so the nested window edges fall on grid points
    m = ((nodes + 7) // 8) * 8
    s = np.linspace(-_S_MAX, _S_MAX, m + 1)
    u = special.expit(s)
    delta = special.expit(-s)
    w = (u * delta) ** 2
    qd = np.asarray(q.quantile_density(u), dtype=np.float64)
    integrand = w * qd * qd
    if not np.all(np.isfinite(integrand)):
        raise SingularityError("integrand is not finite inside (0, 1)")

    h = s[1] - s[0]
    windows = []
    center = m // 2
    for frac in (1, 2, 3, 4):
        half = (m // 8) * frac
        seg = integrand[center - half : center + half + 1]
        windows.append(float(np.trapezoid(seg, dx=h)))
    growth_streak = 0
    for prev, cur in zip(windows, windows[1:]):
        if prev > 0 and cur > 1.1 * prev:
            growth_streak += 1
            if growth_streak >= 2:
                return math.inf
        else:
            growth_streak = 0

    compact = windows[-1]
    peak = float(np.max(integrand))
    total_tail = 0.0
    for side in (1.0, -1.0):
        v = np.logaddexp(0.0, side * s)
        mask = (v >= _FIT_LO) & (side * s > 0)
        h_side = integrand[mask]
        v_side = v[mask]
        edge = h_side[-1] if side > 0 else h_side[0]
        v_edge = v_side[-1] if side > 0 else v_side[0]
        if edge <= _NEGLIGIBLE * peak:
            continue
        pos = h_side > 0
        if np.count_nonzero(pos) < 8:
            continue
        slope = np.polyfit(np.log(v_side[pos]), np.log(h_side[pos]), 1)[0]
        if slope >= _DIVERGENCE_EXPONENT:
            return math.inf
        total_tail += float(edge * v_edge / (-1.0 - slope))
    return compact + total_tail


def clustered_bound(k: int, d: int, m: int) -> float:
    """Upper bound 168 sqrt(m) / k^(1/2 - 2/d) for m-cluster measures, d > 4."""
    if d <= 4:
        raise ParameterError(f"bound requires d > 4, got {d}")
    if k < 1 or m < 1:
        raise ParameterError(f"k and m must be >= 1, got k={k}, m={m}")
    return 168.0 * math.sqrt(m) / float(k) ** (0.5 - 2.0 / d)
