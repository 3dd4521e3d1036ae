import numpy as np
import pytest

from axivort.fields import HalfPlaneGrid


@pytest.fixture
def grid():
    return HalfPlaneGrid(48, 96)


@pytest.fixture
def fine_grid():
    return HalfPlaneGrid(96, 192)


def gaussian_ring(grid, l1_mass=0.1, center=2.0, z_center=0.0, width=0.7):
    amp = l1_mass / (np.pi * width ** 2)
    return grid.sample(
        lambda r, z: amp * np.exp(-((r - center) ** 2 + (z - z_center) ** 2) / width ** 2)
    )


@pytest.fixture
def ring(grid):
    return gaussian_ring(grid, l1_mass=1.0)
