"""Squared 2-Wasserstein distance between equal-size uniform empirical measures.

For two clouds of k points each with uniform weights 1/k, the squared
W2 distance is the optimal-assignment value of the pairwise squared
Euclidean cost matrix, i.e. the minimum over permutations pi of

    (1/k) * sum_i ||x_i - y_pi(i)||^2.

The general solver runs an exact linear-assignment routine in every
dimension; :func:`w2sq_1d` is the one-dimensional shortcut (sort both
sides and pair by rank), which the assignment solution must agree with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import ShapeError

__all__ = ["EmpiricalMeasure", "AssignmentResult", "w2sq", "w2sq_1d"]


@dataclass(frozen=True)
class EmpiricalMeasure:
    """A uniform empirical measure on k points in R^d.

    points has shape (k, d); weights are implicitly 1/k each.
    """

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ShapeError(f"points must be a (k, d) array with k >= 1, got shape {np.shape(self.points)}")
        if not np.all(np.isfinite(pts)):
            raise ShapeError("points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class AssignmentResult:
    """Optimal matching between two k-point clouds.

    cost is the mean matched squared distance; permutation maps the row
    index i of the first cloud to its partner permutation[i] in the second.
    """

    cost: float
    permutation: np.ndarray


def _as_points(obj) -> np.ndarray:
    if isinstance(obj, EmpiricalMeasure):
        return obj.points
    pts = np.asarray(obj, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ShapeError(f"expected a (k, d) point array, got shape {np.shape(obj)}")
    return pts


def _sq_dist_matrix(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances.

    Small instances go through cdist (exact per-pair differences); large
    ones use the Gram expansion |x|^2 + |y|^2 - 2 x.y, which is a BLAS
    call and far faster, with negatives from rounding clipped to zero.
    """
    k = xs.shape[0]
    d = xs.shape[1]
    if k * k * d <= (1 << 24):
        return cdist(xs, ys, "sqeuclidean")
    g = (xs * xs).sum(axis=1)[:, None] + (ys * ys).sum(axis=1)[None, :]
    g -= 2.0 * (xs @ ys.T)
    np.maximum(g, 0.0, out=g)
    return g


def _assignment_cost(xs: np.ndarray, ys: np.ndarray) -> tuple[float, np.ndarray]:
    cost_matrix = _sq_dist_matrix(xs, ys)
    rows, cols = linear_sum_assignment(cost_matrix)
    perm = np.empty(xs.shape[0], dtype=np.intp)
    perm[rows] = cols
    # recompute from exact pair differences so the reported cost does not
    # inherit Gram-expansion rounding
    diff = xs - ys[perm]
    cost = float(np.mean(np.einsum("ij,ij->i", diff, diff)))
    return cost, perm


def w2sq(first, second) -> AssignmentResult:
    """Exact squared W2 between two equal-size uniform empirical measures.

    Accepts EmpiricalMeasure instances or (k, d) arrays. Raises ShapeError
    when the clouds differ in size or dimension.
    """
    xs = _as_points(first)
    ys = _as_points(second)
    if xs.shape[0] != ys.shape[0]:
        raise ShapeError(f"point counts differ: {xs.shape[0]} vs {ys.shape[0]}")
    if xs.shape[1] != ys.shape[1]:
        raise ShapeError(f"dimensions differ: {xs.shape[1]} vs {ys.shape[1]}")
    cost, perm = _assignment_cost(xs, ys)
    return AssignmentResult(cost=cost, permutation=perm)


def w2sq_1d(xs_sorted, ys_sorted) -> float:
    """Squared W2 of two sorted 1-d samples: mean squared rank-pair difference.

    Both inputs must be ascending 1-d arrays of equal length.
    """
    xs = np.asarray(xs_sorted, dtype=np.float64).reshape(-1)
    ys = np.asarray(ys_sorted, dtype=np.float64).reshape(-1)
    if xs.shape[0] != ys.shape[0]:
        raise ShapeError(f"lengths differ: {xs.shape[0]} vs {ys.shape[0]}")
    if xs.shape[0] < 1:
        raise ShapeError("need at least one point")
    diff = xs - ys
    return float(np.mean(diff * diff))
