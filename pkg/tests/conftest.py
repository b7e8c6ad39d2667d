import numpy as np
import pytest

from ccch.spectral import GridSpec, random_bandlimited


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def grid64():
    return GridSpec(64)


def random_fields(grid, rng, count, kmax=None, amplitude=1.0):
    return [random_bandlimited(grid, rng, kmax=kmax, amplitude=amplitude) for _ in range(count)]
