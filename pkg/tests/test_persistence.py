import math

import numpy as np
import pytest

from perskern.geometry import pairwise_distances
from perskern.oracle import betti_number_oracle
from perskern.persistence import (
    FiltrationSizeError,
    PersistencePair,
    RipsFiltration,
    betti_from_pairs,
    build_rips_filtration,
    compute_persistence,
    diagrams_from_pairs,
    rips_pairs,
)

SQUARE = np.array([(0, 0), (1, 0), (0, 1), (1, 1)], dtype=float)
SQRT2 = math.sqrt(2.0)


def pair_multiset(pairs):
    return sorted((p.dim, p.birth, p.death) for p in pairs)


def test_two_point_filtration_max_dim_zero():
    dm = pairwise_distances([(0.0,), (1.0,)])
    f = build_rips_filtration(dm, max_dim=0, threshold=math.inf)
    assert list(f.simplices()) == [((0,), 0.0), ((1,), 0.0), ((0, 1), 1.0)]


def test_square_filtration_enumeration():
    f = build_rips_filtration(pairwise_distances(SQUARE), max_dim=1, threshold=math.inf)
    simplices = list(f.simplices())
    radii = {}
    for verts, radius in simplices:
        radii.setdefault(len(verts) - 1, []).append(radius)
    assert radii[0] == [0.0] * 4
    assert sorted(radii[1]) == pytest.approx([1.0] * 4 + [SQRT2] * 2, abs=1e-15)
    assert radii[2] == pytest.approx([SQRT2] * 4, abs=1e-15)
    # faces precede cofaces; radii are globally nondecreasing
    assert all(simplices[i][1] <= simplices[i + 1][1] for i in range(len(simplices) - 1))


def test_square_filtration_threshold_filters_diagonals():
    f = build_rips_filtration(pairwise_distances(SQUARE), max_dim=1, threshold=1.2)
    dims = [len(v) - 1 for v, _ in f.simplices()]
    assert dims.count(1) == 4  # the two sqrt(2) edges are out
    assert dims.count(2) == 0  # triangles all have diameter sqrt(2)


def test_two_point_persistence():
    pairs = rips_pairs(pairwise_distances([(0.0,), (1.0,)]), max_dim=0, threshold=math.inf)
    assert pair_multiset(pairs) == [(0, 0.0, 1.0), (0, 0.0, math.inf)]


def test_square_persistence_golden():
    pairs = rips_pairs(pairwise_distances(SQUARE), max_dim=1, threshold=math.inf)
    h0 = [p for p in pairs if p.dim == 0]
    h1 = [p for p in pairs if p.dim == 1]
    assert pair_multiset(h0) == [(0, 0.0, 1.0)] * 3 + [(0, 0.0, math.inf)]
    assert len(h1) == 1
    assert h1[0].birth == pytest.approx(1.0, abs=1e-12)
    assert h1[0].death == pytest.approx(SQRT2, abs=1e-12)


def test_collinear_points_have_no_h1():
    dm = pairwise_distances([(0.0,), (1.0,), (2.0,)])
    pairs = rips_pairs(dm, max_dim=1, threshold=math.inf)
    assert all(p.dim == 0 for p in pairs)


def test_default_threshold_is_enclosing_radius():
    f = build_rips_filtration(pairwise_distances(SQUARE), max_dim=1)
    assert f.threshold == pytest.approx(SQRT2, abs=0)


def test_enclosing_radius_preserves_diagram(rng):
    # past the enclosing radius the complex is a cone, so nothing changes
    cloud = rng.uniform(0, 1, (12, 2))
    dm = pairwise_distances(cloud)
    full = rips_pairs(dm, max_dim=1, threshold=math.inf)
    capped = rips_pairs(dm, max_dim=1, threshold=None)
    assert pair_multiset(full) == pair_multiset(capped)


def test_simplex_cap_guard():
    dm = pairwise_distances(SQUARE)
    with pytest.raises(FiltrationSizeError, match="cap"):
        build_rips_filtration(dm, max_dim=1, threshold=math.inf, simplex_cap=5)


def test_oracle_equivalence_random_clouds(rng):
    for _ in range(12):
        n = int(rng.integers(5, 9))
        cloud = rng.uniform(0, 1, (n, 2))
        dm = pairwise_distances(cloud)
        pairs = rips_pairs(dm, max_dim=2, threshold=math.inf)
        crit = np.unique(dm[np.triu_indices(n, k=1)])
        for eps in np.concatenate([crit - 1e-6, crit, crit + 1e-6, [0.0]]):
            for r in (0, 1, 2):
                assert betti_from_pairs(pairs, r, eps) == betti_number_oracle(dm, eps, r)


def test_betti_from_pairs_conventions():
    pairs = [PersistencePair(0, 0.0, 1.0), PersistencePair(0, 0.0, math.inf)]
    assert betti_from_pairs(pairs, 0, 0.0) == 2
    assert betti_from_pairs(pairs, 0, 1.0) == 1  # death radius is exclusive
    assert betti_from_pairs(pairs, 0, 5.0) == 1
    assert betti_from_pairs(pairs, 1, 0.5) == 0


def _permute_tie_block(filtration: RipsFiltration, dim: int, rng) -> RipsFiltration:
    verts = filtration.simplex_vertices[dim].copy()
    radii = filtration.simplex_radii[dim].copy()
    values, counts = np.unique(radii, return_counts=True)
    tie_values = values[counts > 1]
    assert len(tie_values) > 0, "test needs a tie to permute"
    for v in tie_values:
        block = np.flatnonzero(radii == v)
        perm = rng.permutation(block)
        verts[block] = verts[perm]
    blocks_v = list(filtration.simplex_vertices)
    blocks_v[dim] = verts
    return RipsFiltration(
        n_points=filtration.n_points,
        max_dim=filtration.max_dim,
        threshold=filtration.threshold,
        simplex_vertices=tuple(blocks_v),
        simplex_radii=filtration.simplex_radii,
    )


def test_pairing_invariant_under_tie_permutation(rng):
    # equal-radius ties: the square has sqrt(2) ties in dims 1 and 2, and a
    # 4-fold tie among the unit edges
    f = build_rips_filtration(pairwise_distances(SQUARE), max_dim=1, threshold=math.inf)
    reference = pair_multiset(compute_persistence(f))
    for dim in (1, 2):
        for _ in range(5):
            permuted = _permute_tie_block(f, dim, rng)
            assert pair_multiset(compute_persistence(permuted)) == reference


def test_diagrams_from_pairs_drop_and_cap():
    pairs = rips_pairs(pairwise_distances(SQUARE), max_dim=1, threshold=math.inf)
    h1 = diagrams_from_pairs(pairs, 1)
    assert h1.dim == 1
    assert h1.points == pytest.approx(np.array([[1.0, SQRT2]]))
    h0 = diagrams_from_pairs(pairs, 0)
    assert h0.points == pytest.approx(np.array([[0.0, 1.0]] * 3))
    capped = diagrams_from_pairs(pairs, 0, essential=10.0)
    assert sorted(capped.points[:, 1].tolist()) == pytest.approx([1.0, 1.0, 1.0, 10.0])


def test_diagrams_from_pairs_cap_validation():
    pairs = [PersistencePair(0, 2.0, math.inf)]
    with pytest.raises(ValueError):
        diagrams_from_pairs(pairs, 0, essential=1.5)
    with pytest.raises(ValueError):
        diagrams_from_pairs(pairs, 0, essential=math.inf)


def test_h2_on_octahedron_boundary():
    # the six octahedron vertices enclose a 2-sphere: one H2 class
    cloud = np.array([
        (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)
    ], dtype=float)
    pairs = rips_pairs(pairwise_distances(cloud), max_dim=2, threshold=math.inf)
    h2 = [p for p in pairs if p.dim == 2 and p.death > p.birth]
    assert len(h2) == 1
    assert h2[0].birth == pytest.approx(math.sqrt(2), abs=1e-12)
    assert h2[0].death == pytest.approx(2.0, abs=1e-12)
