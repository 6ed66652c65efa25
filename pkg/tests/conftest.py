import numpy as np
import pytest

from haarlab import MeasureGrid, build_lattice, induce, random_band


def random_weights(lattice, seed, zero_fraction=0.0):
    rng = np.random.default_rng(seed)
    mass = np.exp(rng.standard_normal(lattice.n_leaves))
    if zero_fraction > 0:
        mass[rng.random(lattice.n_leaves) < zero_fraction] = 0.0
    return MeasureGrid(lattice, mass)


def random_instance(dim, depth, r, seed, zero_fraction=0.0, root_amplitude=0.0):
    """A random band operator with random weights, induced."""
    lattice = build_lattice(dim, 0, -depth)
    mu = random_weights(lattice, seed * 3 + 1)
    nu = random_weights(lattice, seed * 3 + 2, zero_fraction=zero_fraction)
    band = random_band(lattice, r, seed=seed, amplitude=1.0,
                       root_amplitude=root_amplitude)
    return induce(band, mu, nu)


@pytest.fixture
def lattice_1d():
    return build_lattice(1, 0, -3)


@pytest.fixture
def lattice_2d():
    return build_lattice(2, 0, -2)
