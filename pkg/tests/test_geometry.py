import numpy as np
import pytest

from perskern.geometry import (
    OrbitParams,
    as_point_cloud,
    enclosing_radius,
    hausdorff_distance,
    linked_twisted_orbit,
    pairwise_distances,
    random_orbit_starts,
)
from perskern.io import load_point_cloud, save_point_cloud


def test_single_point_distance_matrix():
    dm = pairwise_distances([(0.0, 0.0)])
    assert dm.shape == (1, 1)
    assert dm[0, 0] == 0.0


def test_three_four_five_triangle():
    dm = pairwise_distances([(0, 0), (3, 4)])
    assert dm[0, 1] == pytest.approx(5.0, abs=0)
    assert dm[1, 0] == pytest.approx(5.0, abs=0)


def test_right_triangle_distances():
    dm = pairwise_distances([(0, 0), (1, 0), (0, 1)])
    entries = sorted([dm[0, 1], dm[0, 2], dm[1, 2]])
    assert entries == pytest.approx([1.0, 1.0, np.sqrt(2)], abs=1e-15)


def test_nonfinite_coordinates_rejected():
    with pytest.raises(ValueError):
        pairwise_distances([(0.0, np.inf)])
    with pytest.raises(ValueError):
        as_point_cloud(np.empty((0, 2)))


def test_distance_matrix_symmetry_and_triangle_inequality(rng):
    for _ in range(10):
        cloud = rng.uniform(-1, 1, (12, 3))
        dm = pairwise_distances(cloud)
        assert np.allclose(dm, dm.T, atol=0)
        assert np.abs(np.diag(dm)).max() == 0.0
        n = len(dm)
        slack = dm[:, :, None] - (dm[:, None, :] + dm[None, :, :])
        assert slack.max() <= 1e-12


def test_hausdorff_identical_sets():
    cloud = [(0.1, 0.4), (0.7, 0.2)]
    assert hausdorff_distance(cloud, cloud) == 0.0


def test_hausdorff_uses_max_norm():
    assert hausdorff_distance([(0, 0)], [(3, 4)]) == 4.0


def test_hausdorff_directed_terms():
    assert hausdorff_distance([(0, 0), (1, 0)], [(0, 0)]) == 1.0


def test_hausdorff_symmetry_and_separation(rng):
    for _ in range(10):
        x = rng.uniform(0, 1, (6, 2))
        y = rng.uniform(0, 1, (9, 2))
        assert hausdorff_distance(x, y) == hausdorff_distance(y, x)
        assert hausdorff_distance(x, y) > 0.0
        assert hausdorff_distance(x, x) == 0.0


def test_hausdorff_dimension_mismatch():
    with pytest.raises(ValueError):
        hausdorff_distance([(0, 0)], [(0, 0, 0)])


def test_orbit_fixed_point():
    orbit = linked_twisted_orbit(OrbitParams(0.0, 0.0, 3.7, 50))
    assert np.all(orbit == 0.0)


def test_orbit_first_iterate_hand_value():
    # x1 = 0.5 + 2.5*0.25 = 1.125 -> 0.125;  y1 = 0.5 + 2.5*0.125*0.875
    orbit = linked_twisted_orbit(OrbitParams(0.5, 0.5, 2.5, 2))
    assert orbit[1, 0] == pytest.approx(0.125, abs=0)
    assert orbit[1, 1] == pytest.approx(0.7734375, abs=0)


def test_orbit_y_update_uses_new_x():
    # with the simultaneous update y1 would be 0.5 + 2.5*0.5*0.5 = 1.125 -> 0.125
    orbit = linked_twisted_orbit(OrbitParams(0.5, 0.5, 2.5, 2))
    assert orbit[1, 1] != pytest.approx(0.125)


def test_orbit_stays_in_unit_square(rng):
    for _ in range(5):
        params = OrbitParams(rng.uniform(), rng.uniform(), rng.uniform(0.5, 5.0), 200)
        orbit = linked_twisted_orbit(params)
        assert np.all(orbit >= 0.0) and np.all(orbit < 1.0)


def test_orbit_deterministic():
    params = OrbitParams(0.3, 0.8, 4.1, 500)
    a = linked_twisted_orbit(params)
    b = linked_twisted_orbit(params)
    assert np.array_equal(a, b)


def test_orbit_length_is_n_points():
    assert linked_twisted_orbit(OrbitParams(0.2, 0.2, 2.5, 137)).shape == (137, 2)


@pytest.mark.parametrize("bad", [
    dict(x0=-0.1, y0=0.0, r=1.0, n_points=10),
    dict(x0=0.0, y0=1.5, r=1.0, n_points=10),
    dict(x0=0.0, y0=0.0, r=0.0, n_points=10),
    dict(x0=0.0, y0=0.0, r=1.0, n_points=0),
])
def test_orbit_params_validation(bad):
    with pytest.raises(ValueError):
        OrbitParams(**bad)


def test_random_starts_seeded():
    a = random_orbit_starts(5, np.random.default_rng(11))
    b = random_orbit_starts(5, np.random.default_rng(11))
    assert np.array_equal(a, b)
    assert a.shape == (5, 2)
    assert np.all((a >= 0) & (a <= 1))


def test_enclosing_radius_square():
    dm = pairwise_distances([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert enclosing_radius(dm) == pytest.approx(np.sqrt(2), abs=0)
    assert enclosing_radius(pairwise_distances([(0.5, 0.5)])) == 0.0


def test_point_cloud_csv_roundtrip(tmp_path):
    cloud = np.array([[0.25, -1.75], [np.pi, np.e]])
    path = tmp_path / "cloud.csv"
    save_point_cloud(path, cloud)
    text = path.read_text()
    assert "," in text.splitlines()[0]
    loaded = load_point_cloud(path)
    assert np.array_equal(loaded, cloud)
