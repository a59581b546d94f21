import numpy as np
import pytest

from lsqmm.quaternion import QMatrix


def random_qmatrix(rng, m, n, pure=False):
    planes = rng.standard_normal((4, m, n))
    if pure:
        planes[0] = 0.0
    return QMatrix(planes)


def random_quaternion_array(rng):
    return rng.standard_normal(4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
