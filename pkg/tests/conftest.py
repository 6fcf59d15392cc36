import numpy as np
import pytest

from pyramidrate.geometry import Pyramid
from pyramidrate.models import QUADRANT_MODELS

MODEL1 = ((-1, 1), (1, -1), (1, 1))


@pytest.fixture
def quadrant():
    return Pyramid.orthant(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def quadrant_row(number):
    return QUADRANT_MODELS[number - 1]


def random_pyramid(rng, dim, k):
    """Random pointed pyramid: normals clustered around (1, ..., 1)."""
    centre = np.ones(dim) / np.sqrt(dim)
    normals = centre + 0.6 * rng.normal(size=(k, dim)) / np.sqrt(dim)
    return Pyramid(normals)
