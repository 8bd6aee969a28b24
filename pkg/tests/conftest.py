import numpy as np
import pytest

import lie_sde as ls


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session")
def entries():
    """One default-parameter entry per catalogued system."""
    return {name: ls.get_entry(name) for name in ls.BUILDERS}


def ham_points(entry, rng, count):
    return entry.sample_ham_points(rng, count)


def interior_points(entry, rng, count):
    return entry.sample_points(rng, count)
