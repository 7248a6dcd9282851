"""Persistence diagrams and the metrics between them.

A diagram stores only the finite off-diagonal pairs; the diagonal (infinite
multiplicity) is implicit and accounted for analytically by every metric.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import cdist


class PersistenceDiagram:
    """Finite multiset of (birth, death) pairs with 0 <= birth < death < inf.

    ``points`` is a read-only (m, 2) float64 array; ``dim`` is the homology
    dimension the pairs belong to. Instances are immutable and safe to share
    across workers.
    """

    __slots__ = ("dim", "points")

    def __init__(self, points=(), dim: int = 0):
        pts = np.array(points, dtype=np.float64).reshape(-1, 2)
        if pts.size:
            if not np.isfinite(pts).all():
                raise ValueError("diagram pairs must be finite")
            if (pts[:, 0] < 0).any():
                raise ValueError("births must be nonnegative")
            if (pts[:, 1] <= pts[:, 0]).any():
                raise ValueError("every pair must lie strictly above the bisector")
        pts.flags.writeable = False
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "points", pts)

    def __setattr__(self, name, value):
        raise AttributeError("PersistenceDiagram is immutable")

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        if self.dim != other.dim or len(self) != len(other):
            return False
        return bool(np.array_equal(_lexsorted(self.points), _lexsorted(other.points)))

    def __hash__(self):
        return hash((self.dim, _lexsorted(self.points).tobytes()))

    def __repr__(self) -> str:
        return f"PersistenceDiagram(dim={self.dim}, n={len(self)})"

    @property
    def persistences(self) -> np.ndarray:
        """Lifetimes death - birth of the stored pairs."""
        return self.points[:, 1] - self.points[:, 0]


def _lexsorted(pts: np.ndarray) -> np.ndarray:
    if pts.shape[0] == 0:
        return pts
    return pts[np.lexsort((pts[:, 1], pts[:, 0]))]


def persistence(pair) -> float:
    """Lifetime d - b of a single (birth, death) pair."""
    b, d = float(pair[0]), float(pair[1])
    return d - b


def _check_pair(d1: PersistenceDiagram, d2: PersistenceDiagram):
    if d1.dim != d2.dim:
        raise ValueError(f"diagrams have different homology dimensions ({d1.dim} vs {d2.dim})")


def _diag_mid(pts: np.ndarray) -> np.ndarray:
    return 0.5 * (pts[:, 0] + pts[:, 1])


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Exact bottleneck distance (max-norm costs, diagonal matches allowed).

    Binary search over the finite set of candidate costs (all pairwise
    max-norm distances plus all half-persistences), testing each cost by
    bipartite-matching feasibility via augmenting paths.
    """
    _check_pair(d1, d2)
    p1, p2 = d1.points, d2.points
    n1, n2 = len(p1), len(p2)
    if n1 == 0 and n2 == 0:
        return 0.0
    half1 = 0.5 * (p1[:, 1] - p1[:, 0])
    half2 = 0.5 * (p2[:, 1] - p2[:, 0])
    cross = cdist(p1, p2, metric="chebyshev") if n1 and n2 else np.empty((n1, n2))
    candidates = np.unique(np.concatenate([[0.0], cross.ravel(), half1, half2]))

    def feasible(t: float) -> bool:
        # left: points of d1 then diagonal slots for d2; right: points of d2
        # then diagonal slots for d1. Diagonal-to-diagonal matches are free.
        size = n1 + n2
        adj = np.zeros((size, size), dtype=bool)
        adj[:n1, :n2] = cross <= t
        adj[np.arange(n1), n2 + np.arange(n1)] = half1 <= t
        adj[n1 + np.arange(n2), np.arange(n2)] = half2 <= t
        adj[n1:, n2:] = True
        matching = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
        return not (matching < 0).any()

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def wasserstein_distance(d1: PersistenceDiagram, d2: PersistenceDiagram, p: float = 1.0) -> float:
    """Exact p-Wasserstein distance with max-norm ground costs.

    Each diagram is augmented with the diagonal projections of the other's
    points, the square assignment problem with costs ||x - y||_inf^p
    (diagonal-to-diagonal free) is solved exactly, and the p-th root of the
    optimum is returned.
    """
    _check_pair(d1, d2)
    if not np.isfinite(p) or p < 1.0:
        raise ValueError("p must be finite and >= 1")
    p1, p2 = d1.points, d2.points
    n1, n2 = len(p1), len(p2)
    if n1 == 0 and n2 == 0:
        return 0.0
    size = n1 + n2
    proj1 = np.repeat(_diag_mid(p1)[:, None], 2, axis=1) if n1 else np.empty((0, 2))
    proj2 = np.repeat(_diag_mid(p2)[:, None], 2, axis=1) if n2 else np.empty((0, 2))
    left = np.vstack([p1, proj2])
    right = np.vstack([p2, proj1])
    cost = cdist(left, right, metric="chebyshev")
    cost[n1:, n2:] = 0.0
    scale = cost.max()
    if scale == 0.0:
        return 0.0
    powered = (cost / scale) ** p
    rows, cols = linear_sum_assignment(powered)
    total = powered[rows, cols].sum()
    return float(scale * total ** (1.0 / p))


def sliced_wasserstein_distance(d1: PersistenceDiagram, d2: PersistenceDiagram,
                                n_slices: int = 10) -> float:
    """Sliced approximation of the diagram transport distance.

    For each direction theta_k = -pi/2 + (k + 1/2) pi / n_slices the points of
    one diagram plus the diagonal projections of the other's are projected
    onto (cos theta, sin theta), both value lists are sorted, and their L1
    difference is taken; the mean over directions is returned.
    """
    _check_pair(d1, d2)
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    p1, p2 = d1.points, d2.points
    n1, n2 = len(p1), len(p2)
    if n1 + n2 == 0:
        return 0.0
    theta = -0.5 * np.pi + (np.arange(n_slices) + 0.5) * np.pi / n_slices
    directions = np.stack([np.cos(theta), np.sin(theta)], axis=1)  # (s, 2)
    diag_coef = directions.sum(axis=1)  # projection of (m, m) is m * (cos + sin)
    v1 = np.vstack([p1 @ directions.T, np.outer(_diag_mid(p2), diag_coef)])
    v2 = np.vstack([p2 @ directions.T, np.outer(_diag_mid(p1), diag_coef)])
    v1.sort(axis=0)
    v2.sort(axis=0)
    return float(np.abs(v1 - v2).sum(axis=0).mean())
