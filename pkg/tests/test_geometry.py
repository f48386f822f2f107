"""Index-set algebra: ULAs, fractal recursion, sumsets, beampatterns."""

import numpy as np
import pytest

from cobalt.geometry import (ArrayGeometry, beampattern, intrinsic_apodization,
                             make_fractal, make_ula, sumset)

PITCH = 1540.0 / 3.4e6 / 2.0


def test_ula_basics():
    a = make_ula(5, PITCH)
    assert a.elements == (0, 1, 2, 3, 4)
    assert a.center_index == 2
    assert a.aperture == 4
    np.testing.assert_allclose(a.offsets_m, (np.arange(5) - 2) * PITCH)


def test_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry((3, 1, 2), PITCH)  # unsorted
    with pytest.raises(ValueError):
        ArrayGeometry((0, 0, 1), PITCH)  # duplicate
    with pytest.raises(ValueError):
        ArrayGeometry((0, 1), 0.0)  # bad pitch
    with pytest.raises(ValueError):
        ArrayGeometry((), PITCH)


def test_geometry_dict_round_trip():
    a = make_fractal(make_ula(2, PITCH), 3)
    b = ArrayGeometry.from_dict(a.to_dict())
    assert a == b


def test_fractal_recursion_small_orders():
    # generator {0,1}: translation factor L = 3
    g = make_ula(2, PITCH)
    assert make_fractal(g, 0).elements == (0,)
    assert make_fractal(g, 1).elements == (0, 1)
    assert make_fractal(g, 2).elements == (0, 1, 3, 4)
    assert make_fractal(g, 3).elements == (0, 1, 3, 4, 9, 10, 12, 13)
    w4 = make_fractal(g, 4)
    assert len(w4) == 16
    assert w4.elements[-1] == 40


def test_fractal_requires_zero_min():
    with pytest.raises(ValueError):
        make_fractal(ArrayGeometry((1, 2), PITCH), 2)


def test_sumset_of_thinned_array_is_full_ula():
    g = make_ula(2, PITCH)
    for order in range(7):
        w = make_fractal(g, order)
        s = sumset(w)
        assert s.elements == tuple(range(2 * w.elements[-1] + 1))


def test_sumset_center_doubles():
    a = make_ula(6, PITCH)
    assert sumset(a).center_index == 2 * a.center_index


def test_intrinsic_apodization_counts_pairs():
    w2 = make_fractal(make_ula(2, PITCH), 2)  # {0,1,3,4}
    apod = intrinsic_apodization(w2)
    np.testing.assert_array_equal(apod.weights, [1, 2, 1, 2, 4, 2, 1, 2, 1])
    assert apod.support_start == 0
    assert apod.total == len(w2) ** 2


def test_intrinsic_apodization_ula_is_triangular():
    a = make_ula(4, PITCH)
    np.testing.assert_array_equal(intrinsic_apodization(a).weights,
                                  [1, 2, 3, 4, 3, 2, 1])


def test_beampattern_peak_is_element_count():
    a = make_ula(16, PITCH)
    h = beampattern(a, 2 * np.pi * 3.4e6, np.array([0.0]), 1540.0)
    np.testing.assert_allclose(h, [16.0])


def test_beampattern_squared_equals_apodized_coarray():
    omega0 = 2 * np.pi * 3.4e6
    thetas = np.linspace(-np.pi / 3, np.pi / 3, 181)
    for a in (make_ula(16, PITCH), make_fractal(make_ula(2, PITCH), 3)):
        h = beampattern(a, omega0, thetas, 1540.0)
        h2 = beampattern(a, omega0, thetas, 1540.0,
                         apod=intrinsic_apodization(a))
        assert np.max(np.abs(h2 - h**2)) <= 1e-9 * len(a) ** 2
