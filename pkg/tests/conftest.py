import numpy as np
import pytest

from perskern.diagram import PersistenceDiagram


def random_diagram(rng, min_points=1, max_points=8, birth_scale=2.0,
                   pers_low=0.05, pers_high=2.0, dim=0):
    m = int(rng.integers(min_points, max_points + 1))
    births = rng.uniform(0.0, birth_scale, m)
    pers = rng.uniform(pers_low, pers_high, m)
    return PersistenceDiagram(np.stack([births, births + pers], axis=1), dim=dim)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
