"""Positive definite kernels on persistence diagrams and Gram machinery.

Three kernels are provided: a scale-space heat kernel over the half-plane
with mirrored negative mass (PSS), a weighted Gaussian mean-embedding kernel
(PWG), and an exponentiated sliced transport distance (SW). Evaluation cost
is O(|D1| * |D2|) for PSS/PWG and O(n_slices * m log m) for SW, so diagram
sizes are the knob that controls Gram cost.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .diagram import PersistenceDiagram, sliced_wasserstein_distance


def _ordered(d1: PersistenceDiagram, d2: PersistenceDiagram):
    # fix an evaluation order so k(a, b) and k(b, a) run the identical float
    # computation and agree bit for bit
    k1 = (len(d1), d1.points.tobytes())
    k2 = (len(d2), d2.points.tobytes())
    return (d1, d2) if k1 <= k2 else (d2, d1)


def pss_kernel(d1: PersistenceDiagram, d2: PersistenceDiagram, sigma: float) -> float:
    """Heat-kernel similarity with mirrored negative mass below the bisector.

    (1 / 8 pi sigma) * sum over pairs of exp(-|y-z|^2 / 8 sigma)
    - exp(-|y-zbar|^2 / 8 sigma), where zbar swaps birth and death. Empty
    diagrams contribute an empty sum, hence 0.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d1, d2 = _ordered(d1, d2)
    if len(d1) == 0 or len(d2) == 0:
        return 0.0
    p1, p2 = d1.points, d2.points
    direct = cdist(p1, p2, metric="sqeuclidean")
    mirrored = cdist(p1, p2[:, ::-1], metric="sqeuclidean")
    scale = 8.0 * sigma
    total = np.sum(np.exp(-direct / scale) - np.exp(-mirrored / scale))
    return float(total / (scale * np.pi))


def arctan_weight(points: np.ndarray, c: float, delta: int) -> np.ndarray:
    """Persistence weight arctan(C * (d - b)^delta) per point."""
    return np.arctan(c * (points[:, 1] - points[:, 0]) ** delta)


def pwg_embedding_inner(d1: PersistenceDiagram, d2: PersistenceDiagram,
                        rho_g: float, c: float, delta: int) -> float:
    """RKHS inner product of the weighted Gaussian mean embeddings.

    sum over x in D1, y in D2 of w(x) w(y) exp(-|x-y|^2 / (2 rho_g^2)) with
    the arctan persistence weight; either diagram empty gives 0.
    """
    if rho_g <= 0 or c <= 0 or delta < 1:
        raise ValueError("parameters must be positive (delta a positive integer)")
    d1, d2 = _ordered(d1, d2)
    if len(d1) == 0 or len(d2) == 0:
        return 0.0
    w1 = arctan_weight(d1.points, c, delta)
    w2 = arctan_weight(d2.points, c, delta)
    gauss = np.exp(-cdist(d1.points, d2.points, metric="sqeuclidean") / (2.0 * rho_g**2))
    return float(w1 @ gauss @ w2)


def pwg_kernel(d1: PersistenceDiagram, d2: PersistenceDiagram,
               rho_g: float, c: float, tau: float, delta: int) -> float:
    """Gaussian of the RKHS distance between weighted mean embeddings.

    exp(-|E(D1) - E(D2)|^2 / (2 tau^2)); the squared distance expands into
    the three embedding inners and is clamped at zero against roundoff. Two
    empty diagrams have identical (zero) embeddings, so the value is 1.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    k11 = pwg_embedding_inner(d1, d1, rho_g, c, delta)
    k22 = pwg_embedding_inner(d2, d2, rho_g, c, delta)
    k12 = pwg_embedding_inner(d1, d2, rho_g, c, delta)
    sq = max(k11 + k22 - 2.0 * k12, 0.0)
    return float(np.exp(-sq / (2.0 * tau**2)))


def sw_kernel(d1: PersistenceDiagram, d2: PersistenceDiagram,
              sigma: float, n_slices: int = 10) -> float:
    """exp(-SW(D1, D2) / (2 sigma^2)); the exponent uses the first power."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return float(np.exp(-sliced_wasserstein_distance(d1, d2, n_slices) / (2.0 * sigma**2)))


def induced_distance(kernel, d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """k(x,x) + k(y,y) - 2 k(x,y), clamped at zero (no square root taken)."""
    return max(kernel(d1, d1) + kernel(d2, d2) - 2.0 * kernel(d1, d2), 0.0)


def _pairwise_gram(kernel, diagrams) -> np.ndarray:
    n = len(diagrams)
    values = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i, n):
            v = kernel(diagrams[i], diagrams[j])
            if not np.isfinite(v):
                raise ArithmeticError(f"kernel value for diagram pair ({i}, {j}) is not finite")
            values[i, j] = v
            values[j, i] = v
    return values


@dataclass(frozen=True)
class PssKernel:
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def __call__(self, d1, d2):
        return pss_kernel(d1, d2, self.sigma)

    def gram(self, diagrams):
        return _pairwise_gram(self, diagrams)

    def describe(self):
        return {"kind": "pss", "sigma": self.sigma}


@dataclass(frozen=True)
class PwgKernel:
    rho_g: float
    c: float
    tau: float
    delta: int = 10

    def __post_init__(self):
        if min(self.rho_g, self.c, self.tau) <= 0 or self.delta < 1:
            raise ValueError("all PWG parameters must be positive")

    def __call__(self, d1, d2):
        return pwg_kernel(d1, d2, self.rho_g, self.c, self.tau, self.delta)

    def gram(self, diagrams):
        # the kernel depends on the diagrams only through embedding inners,
        # so compute each self-inner once instead of once per pair
        n = len(diagrams)
        self_inner = np.array(
            [pwg_embedding_inner(d, d, self.rho_g, self.c, self.delta) for d in diagrams]
        )
        values = np.empty((n, n), dtype=np.float64)
        for i in range(n):
            for j in range(i, n):
                cross = pwg_embedding_inner(
                    diagrams[i], diagrams[j], self.rho_g, self.c, self.delta
                )
                sq = max(self_inner[i] + self_inner[j] - 2.0 * cross, 0.0)
                values[i, j] = values[j, i] = np.exp(-sq / (2.0 * self.tau**2))
        if not np.isfinite(values).all():
            raise ArithmeticError("PWG Gram matrix contains non-finite values")
        return values

    def describe(self):
        return {"kind": "pwg", "rho_g": self.rho_g, "c": self.c,
                "tau": self.tau, "delta": self.delta}


@dataclass(frozen=True)
class SwKernel:
    sigma: float
    n_slices: int = 10

    def __post_init__(self):
        if self.sigma <= 0 or self.n_slices < 1:
            raise ValueError("sigma must be positive and n_slices >= 1")

    def __call__(self, d1, d2):
        return sw_kernel(d1, d2, self.sigma, self.n_slices)

    def gram(self, diagrams):
        dists = sw_distance_matrix(diagrams, self.n_slices)
        values = np.exp(-dists / (2.0 * self.sigma**2))
        if not np.isfinite(values).all():
            raise ArithmeticError("SW Gram matrix contains non-finite values")
        return values

    def describe(self):
        return {"kind": "sw", "sigma": self.sigma, "n_slices": self.n_slices}


def sw_distance_matrix(diagrams, n_slices: int = 10) -> np.ndarray:
    """Symmetric matrix of sliced transport distances over a diagram list."""
    n = len(diagrams)
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = sliced_wasserstein_distance(
                diagrams[i], diagrams[j], n_slices
            )
    return out


@dataclass(frozen=True)
class GramMatrix:
    """Kernel matrix over a diagram set plus how it was produced."""

    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("Gram matrix must be square")
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def shape(self):
        return self.values.shape

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.values)[0])

    def is_positive_semidefinite(self, tol: float = 1e-8) -> bool:
        trace = float(np.trace(self.values))
        return self.min_eigenvalue() >= -tol * max(1.0, trace)


def gram_matrix(kernel, diagrams) -> GramMatrix:
    """Evaluate a kernel over all diagram pairs (mirrored upper triangle)."""
    if len(diagrams) == 0:
        raise ValueError("diagram list is empty")
    values = kernel.gram(diagrams) if hasattr(kernel, "gram") else _pairwise_gram(kernel, diagrams)
    provenance = kernel.describe() if hasattr(kernel, "describe") else {}
    return GramMatrix(values, {**provenance, "n_diagrams": len(diagrams)})


def median_heuristic(values) -> float:
    """Median of the positive entries (mean of the middle two on even counts)."""
    values = np.asarray(values, dtype=np.float64).ravel()
    positive = values[values > 0]
    if positive.size == 0:
        raise ValueError("no positive values to take a median of")
    return float(np.median(positive))


def pwg_bandwidth(diagrams, max_pooled: int = 2000) -> float:
    """Gaussian bandwidth for PWG: median pairwise distance of pooled points.

    Points from all diagrams are pooled; evenly spaced subsampling keeps the
    pairwise computation bounded (and deterministic) for large pools.
    """
    pools = [d.points for d in diagrams if len(d)]
    if not pools:
        raise ValueError("all diagrams are empty")
    pooled = np.vstack(pools)
    if len(pooled) > max_pooled:
        step = int(np.ceil(len(pooled) / max_pooled))
        pooled = pooled[::step]
    return median_heuristic(pdist(pooled, metric="euclidean"))


SW_SIGMA_MULTIPLIERS = (0.01, 0.1, 1.0, 10.0, 100.0)


def sw_sigma_grid(diagrams, n_slices: int = 10) -> list[float]:
    """Candidate SW bandwidths: fixed multipliers of the median SW distance."""
    dists = sw_distance_matrix(diagrams, n_slices)
    med = median_heuristic(dists[np.triu_indices(len(diagrams), k=1)])
    return [m * med for m in SW_SIGMA_MULTIPLIERS]
