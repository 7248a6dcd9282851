"""Brute-force Betti numbers from dense Z/2 boundary matrices.

Independent of the filtration/reduction pipeline on purpose: simplices are
re-enumerated here with itertools and ranks come from dense Gaussian
elimination, so this module can serve as the test oracle for it. Exponential
cost; intended for small point counts only.
"""
from __future__ import annotations

import itertools

import numpy as np

from .geometry import check_distance_matrix

HARD_POINT_CAP = 14


def _gf2_rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    m = mat.copy()
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        hits = np.flatnonzero(m[rank:, c])
        if hits.size == 0:
            continue
        pr = rank + hits[0]
        if pr != rank:
            m[[rank, pr]] = m[[pr, rank]]
        others = np.flatnonzero(m[:, c])
        others = others[others != rank]
        m[others] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _simplices_at(dm: np.ndarray, eps: float, k: int) -> list:
    if k < 0:
        return []
    n = dm.shape[0]
    out = []
    for comb in itertools.combinations(range(n), k + 1):
        ok = True
        for a in range(k + 1):
            for b in range(a + 1, k + 1):
                if dm[comb[a], comb[b]] > eps:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(comb)
    return out


def _boundary_matrix(faces: list, simplices: list) -> np.ndarray:
    mat = np.zeros((len(faces), len(simplices)), dtype=np.bool_)
    index = {f: i for i, f in enumerate(faces)}
    for j, s in enumerate(simplices):
        for t in range(len(s)):
            mat[index[s[:t] + s[t + 1:]], j] = True
    return mat


def betti_number_oracle(dm, eps: float, r: int, max_points: int = HARD_POINT_CAP) -> int:
    """Rank of r-dimensional homology of the full complex at radius eps.

    dim C_r minus the ranks of the boundary operators into and out of the
    r-chains, all over Z/2.
    """
    dm = check_distance_matrix(dm)
    if r < 0:
        raise ValueError("homology dimension must be >= 0")
    n = dm.shape[0]
    if n > max_points:
        raise ValueError(f"oracle limited to {max_points} points, got {n}")
    c_r = _simplices_at(dm, eps, r)
    if not c_r:
        return 0
    rank_in = _gf2_rank(_boundary_matrix(_simplices_at(dm, eps, r - 1), c_r)) if r > 0 else 0
    rank_out = _gf2_rank(_boundary_matrix(c_r, _simplices_at(dm, eps, r + 1)))
    return len(c_r) - rank_in - rank_out
