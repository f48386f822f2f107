"""Shared fixtures: small, fast configurations used across the test modules."""

import numpy as np
import pytest

from cobalt import ImagingSetup, make_ula
from cobalt.simulator import Scatterer, ScattererScene


@pytest.fixture
def small_setup():
    """Short receive window, carrier-centered band; cheap LUT builds."""
    return ImagingSetup(
        depth_time=26e-6,
        pulse_sigma_s=0.25e-6,
        pulse_support_sigmas=6.0,
        angles_rad=(0.08,),
        band_start=77,
        band_size=24,
        sub_band_size=12,
    )


@pytest.fixture
def small_geometry():
    return make_ula(8, 1540.0 / 3.4e6 / 2.0)


@pytest.fixture
def small_scene():
    return ScattererScene(
        (Scatterer(16e-6, 1.0, 0.08), Scatterer(20e-6, 0.5, 0.08)), 1540.0
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
