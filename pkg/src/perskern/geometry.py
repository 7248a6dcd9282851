"""Point clouds, pairwise/Hausdorff distances, and the linked twisted map.

A point cloud is a plain ``(n, v)`` float array: one point per row. All
operations are pure functions; arrays are never mutated in place.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform


def as_point_cloud(points) -> np.ndarray:
    """Validate and return a point cloud as an (n, v) float64 array.

    Raises ValueError on empty input, ragged rows, or non-finite coordinates.
    """
    cloud = np.asarray(points, dtype=np.float64)
    if cloud.ndim == 1:
        cloud = cloud.reshape(-1, 1)
    if cloud.ndim != 2 or cloud.shape[0] == 0 or cloud.shape[1] == 0:
        raise ValueError(f"point cloud must be a non-empty (n, v) array, got shape {cloud.shape}")
    if not np.isfinite(cloud).all():
        raise ValueError("point cloud contains non-finite coordinates")
    return cloud


def pairwise_distances(cloud) -> np.ndarray:
    """Euclidean distance matrix of a point cloud.

    Returns a symmetric (n, n) array with zero diagonal.
    """
    cloud = as_point_cloud(cloud)
    return squareform(pdist(cloud, metric="euclidean"))


def check_distance_matrix(dm) -> np.ndarray:
    """Validate a precomputed distance matrix (square, symmetric, zero diagonal)."""
    dm = np.asarray(dm, dtype=np.float64)
    if dm.ndim != 2 or dm.shape[0] != dm.shape[1] or dm.shape[0] == 0:
        raise ValueError(f"distance matrix must be square and non-empty, got shape {dm.shape}")
    if not np.isfinite(dm).all():
        raise ValueError("distance matrix contains non-finite entries")
    if (dm < 0).any():
        raise ValueError("distance matrix contains negative entries")
    if not np.allclose(dm, dm.T, rtol=0.0, atol=1e-12):
        raise ValueError("distance matrix is not symmetric")
    if np.abs(np.diag(dm)).max() > 0.0:
        raise ValueError("distance matrix diagonal is not zero")
    return dm


def hausdorff_distance(x, y) -> float:
    """Hausdorff distance between two point clouds, max-norm ground metric.

    max( sup_x inf_y ||x-y||_inf , sup_y inf_x ||x-y||_inf ).
    """
    x = as_point_cloud(x)
    y = as_point_cloud(y)
    if x.shape[1] != y.shape[1]:
        raise ValueError("point clouds must have the same dimension")
    cross = cdist(x, y, metric="chebyshev")
    return float(max(cross.min(axis=1).max(), cross.min(axis=0).max()))


def enclosing_radius(dm) -> float:
    """min over points of the max distance to the others.

    Beyond this radius the complex is a cone over the minimising point, so no
    homology in dimensions >= 1 survives or is created; it is the default
    filtration threshold.
    """
    dm = np.asarray(dm, dtype=np.float64)
    if dm.shape[0] == 1:
        return 0.0
    return float(dm.max(axis=1).min())


@dataclass(frozen=True)
class OrbitParams:
    """Parameters of one linked-twisted-map orbit."""

    x0: float
    y0: float
    r: float
    n_points: int

    def __post_init__(self):
        if not (0.0 <= self.x0 <= 1.0 and 0.0 <= self.y0 <= 1.0):
            raise ValueError("starting point must lie in [0,1]^2")
        if self.r <= 0.0:
            raise ValueError("r must be positive")
        if self.n_points < 1:
            raise ValueError("n_points must be positive")


def _mod1(t: float) -> float:
    # floor form maps any real into [0,1); robust also for negative inputs
    return t - np.floor(t)


def linked_twisted_orbit(params: OrbitParams) -> np.ndarray:
    """Iterate the linked twisted map and return the orbit as an (n, 2) array.

    The x coordinate is updated first and the y update uses the already
    updated x value; both updates are taken mod 1. The returned sequence
    starts at (x0, y0) and contains exactly ``n_points`` points.
    """
    out = np.empty((params.n_points, 2), dtype=np.float64)
    x, y = params.x0, params.y0
    out[0, 0], out[0, 1] = _mod1(x), _mod1(y)
    x, y = out[0, 0], out[0, 1]
    r = params.r
    for n in range(1, params.n_points):
        x = _mod1(x + r * y * (1.0 - y))
        y = _mod1(y + r * x * (1.0 - x))
        out[n, 0] = x
        out[n, 1] = y
    return out


def random_orbit_starts(count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` starting points uniformly from [0,1]^2."""
    return rng.uniform(0.0, 1.0, size=(count, 2))
