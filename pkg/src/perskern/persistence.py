"""Vietoris-Rips filtrations and persistence pairs over the two-element field.

The filtration keeps one simplex block per dimension, each sorted by
(appearance radius, lexicographic vertex order); appearance radius of a
simplex is its diameter. Pairing runs the standard column reduction of the
boundary matrix in filtration order, block by block from the top dimension
down so that the clearing optimisation can skip columns already known to
vanish.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _fastreduce
from .diagram import PersistenceDiagram
from .geometry import check_distance_matrix, enclosing_radius

DEFAULT_SIMPLEX_CAP = 50_000_000


class FiltrationSizeError(RuntimeError):
    """Raised when a filtration would exceed the configured simplex cap."""


@dataclass(frozen=True)
class PersistencePair:
    """One birth-death pair; death is math.inf for essential classes."""

    dim: int
    birth: float
    death: float

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)


@dataclass(frozen=True)
class RipsFiltration:
    """Simplices of a Rips complex, one block per dimension.

    ``simplex_vertices[d]`` is an (m_d, d+1) int array of strictly increasing
    vertex tuples, ``simplex_radii[d]`` the matching nondecreasing appearance
    radii. Faces always precede cofaces because a face never has a larger
    radius and ties are broken by dimension.
    """

    n_points: int
    max_dim: int
    threshold: float
    simplex_vertices: tuple
    simplex_radii: tuple

    def __len__(self) -> int:
        return sum(r.shape[0] for r in self.simplex_radii)

    def simplices(self):
        """Yield (vertex_tuple, radius) in global filtration order."""

        def stream(d, verts, radii):
            for i in range(len(radii)):
                yield radii[i], d, tuple(int(v) for v in verts[i])

        streams = [
            stream(d, self.simplex_vertices[d], self.simplex_radii[d])
            for d in range(len(self.simplex_radii))
        ]
        for radius, _, vt in heapq.merge(*streams):
            yield vt, float(radius)


def _sort_block(verts: np.ndarray, radii: np.ndarray):
    if len(radii) == 0:
        return verts, radii
    keys = tuple(verts[:, c] for c in reversed(range(verts.shape[1]))) + (radii,)
    order = np.lexsort(keys)
    return np.ascontiguousarray(verts[order]), np.ascontiguousarray(radii[order])


def _enumerate_higher(dm: np.ndarray, threshold: float, dim: int, budget: int):
    """All simplices of one dimension >= 3 whose diameter fits the threshold."""
    n = dm.shape[0]
    verts, radii = [], []
    for comb in itertools.combinations(range(n), dim + 1):
        diam = 0.0
        ok = True
        for a in range(dim + 1):
            row = dm[comb[a]]
            for b in range(a + 1, dim + 1):
                dab = row[comb[b]]
                if dab > threshold:
                    ok = False
                    break
                if dab > diam:
                    diam = dab
            if not ok:
                break
        if ok:
            verts.append(comb)
            radii.append(diam)
            if len(verts) > budget:
                raise FiltrationSizeError(
                    f"simplex cap exceeded while enumerating dimension {dim}; "
                    "lower the threshold or max_dim, or raise simplex_cap"
                )
    varr = np.array(verts, dtype=np.int64).reshape(-1, dim + 1)
    return varr, np.array(radii, dtype=np.float64)


def build_rips_filtration(dm, max_dim: int, threshold: float | None = None,
                          simplex_cap: int = DEFAULT_SIMPLEX_CAP) -> RipsFiltration:
    """Build the Rips filtration of a distance matrix.

    Includes every simplex of dimension <= max_dim + 1 whose diameter is at
    most the threshold (the extra dimension is what kills max_dim cycles).
    ``threshold=None`` uses the enclosing radius, past which no homology in
    dimensions >= 1 changes; pass math.inf for the unbounded filtration.
    """
    dm = check_distance_matrix(dm)
    n = dm.shape[0]
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    if threshold is None:
        threshold = enclosing_radius(dm)
    threshold = float(threshold)
    if not threshold >= 0.0:
        raise ValueError("threshold must be positive or unbounded")

    blocks_v = [np.arange(n, dtype=np.int64).reshape(-1, 1)]
    blocks_r = [np.zeros(n, dtype=np.float64)]
    total = n
    if total > simplex_cap:
        raise FiltrationSizeError("simplex cap exceeded by the vertex set")

    top_dim = max_dim + 1
    if top_dim >= 1 and n >= 2:
        iu, ju = np.triu_indices(n, k=1)
        dists = dm[iu, ju]
        mask = dists <= threshold
        everts = np.stack([iu[mask], ju[mask]], axis=1).astype(np.int64)
        eradii = dists[mask]
        total += len(eradii)
        if total > simplex_cap:
            raise FiltrationSizeError(
                f"simplex cap {simplex_cap} exceeded at dimension 1 "
                f"({total} simplices); lower the threshold"
            )
        blocks_v.append(everts)
        blocks_r.append(eradii)

    if top_dim >= 2 and n >= 3:
        n_tri = int(_fastreduce.count_triangles(dm, threshold))
        total += n_tri
        if total > simplex_cap:
            raise FiltrationSizeError(
                f"simplex cap {simplex_cap} exceeded at dimension 2 "
                f"({total} simplices); lower the threshold"
            )
        tverts = np.empty((n_tri, 3), dtype=np.int64)
        tradii = np.empty(n_tri, dtype=np.float64)
        _fastreduce.fill_triangles(dm, threshold, tverts, tradii)
        blocks_v.append(tverts)
        blocks_r.append(tradii)

    for dim in range(3, top_dim + 1):
        if n < dim + 1:
            break
        varr, radii = _enumerate_higher(dm, threshold, dim, simplex_cap - total)
        total += len(radii)
        blocks_v.append(varr)
        blocks_r.append(radii)

    sorted_v, sorted_r = [], []
    for verts, radii in zip(blocks_v, blocks_r):
        sv, sr = _sort_block(verts, radii)
        sorted_v.append(sv)
        sorted_r.append(sr)
    return RipsFiltration(
        n_points=n,
        max_dim=max_dim,
        threshold=threshold,
        simplex_vertices=tuple(sorted_v),
        simplex_radii=tuple(sorted_r),
    )


def _facet_rows(filtration: RipsFiltration, d: int) -> np.ndarray:
    """Row indices (into the (d-1)-block) of every d-column's boundary."""
    verts = filtration.simplex_vertices[d]
    m = verts.shape[0]
    if d == 1:
        return np.ascontiguousarray(verts, dtype=np.int32)
    n = filtration.n_points
    faces = filtration.simplex_vertices[d - 1]
    face_keys = np.zeros(faces.shape[0], dtype=np.int64)
    for c in range(d):
        face_keys = face_keys * n + faces[:, c]
    key_order = np.argsort(face_keys, kind="stable")
    sorted_keys = face_keys[key_order]

    rows = np.empty((m, d + 1), dtype=np.int64)
    for drop in range(d + 1):
        keep = [c for c in range(d + 1) if c != drop]
        keys = np.zeros(m, dtype=np.int64)
        for c in keep:
            keys = keys * n + verts[:, c]
        pos = np.searchsorted(sorted_keys, keys)
        rows[:, drop] = key_order[pos]
    rows.sort(axis=1)
    return rows.astype(np.int32)


def compute_persistence(filtration: RipsFiltration) -> list[PersistencePair]:
    """Persistence pairs of a filtration by Z/2 column reduction.

    Zero-persistence pairs are dropped; creators of dimension <= max_dim that
    are never killed become essential pairs with infinite death.
    """
    radii = filtration.simplex_radii
    n_dims = len(radii)
    pivots = {}
    cleared_rows = None
    for d in range(n_dims - 1, 0, -1):
        m = radii[d].shape[0]
        cleared = np.zeros(m, dtype=np.bool_)
        if cleared_rows is not None:
            cleared[cleared_rows] = True
        if m == 0:
            pivots[d] = np.empty(0, dtype=np.int64)
            cleared_rows = np.empty(0, dtype=np.int64)
            continue
        facets = _facet_rows(filtration, d)
        piv = _fastreduce.reduce_boundary(facets, radii[d - 1].shape[0], cleared)
        pivots[d] = piv
        cleared_rows = piv[piv >= 0]

    pairs: list[PersistencePair] = []
    for r in range(0, filtration.max_dim + 1):
        if r >= n_dims:
            break
        m_r = radii[r].shape[0]
        if m_r == 0:
            continue
        killed = np.zeros(m_r, dtype=np.bool_)
        if r + 1 < n_dims and radii[r + 1].shape[0] > 0:
            piv = pivots[r + 1]
            cols = np.flatnonzero(piv >= 0)
            rows = piv[cols]
            killed[rows] = True
            births = radii[r][rows]
            deaths = radii[r + 1][cols]
            keep = deaths > births
            pairs.extend(
                PersistencePair(r, float(b), float(dth))
                for b, dth in zip(births[keep], deaths[keep])
            )
        creators = np.ones(m_r, dtype=np.bool_) if r == 0 else pivots[r] == -1
        for idx in np.flatnonzero(creators & ~killed):
            pairs.append(PersistencePair(r, float(radii[r][idx]), math.inf))
    pairs.sort(key=lambda p: (p.dim, p.birth, p.death))
    return pairs


def rips_pairs(dm, max_dim: int, threshold: float | None = None,
               simplex_cap: int = DEFAULT_SIMPLEX_CAP) -> list[PersistencePair]:
    """Convenience wrapper: filtration construction followed by reduction."""
    return compute_persistence(build_rips_filtration(dm, max_dim, threshold, simplex_cap))


def diagrams_from_pairs(pairs, r: int, essential="drop") -> PersistenceDiagram:
    """Select the dimension-r pairs as a diagram.

    ``essential`` is "drop" (default) or a finite death value used to cap
    essential pairs; the cap must exceed every selected birth.
    """
    if r < 0:
        raise ValueError("homology dimension must be >= 0")
    selected = [p for p in pairs if p.dim == r]
    points = []
    if essential == "drop":
        points = [(p.birth, p.death) for p in selected if not p.essential]
    else:
        cap = float(essential)
        if not math.isfinite(cap):
            raise ValueError("essential cap must be finite")
        if any(p.birth >= cap for p in selected):
            raise ValueError("essential cap must exceed every birth in the diagram")
        points = [(p.birth, cap if p.essential else p.death) for p in selected]
    return PersistenceDiagram(points, dim=r)


def betti_from_pairs(pairs, r: int, eps: float) -> int:
    """Rank of r-dimensional homology at radius eps implied by the pairs."""
    return sum(
        1
        for p in pairs
        if p.dim == r and p.birth <= eps and (p.essential or p.death > eps)
    )
