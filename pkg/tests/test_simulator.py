"""Pulse model, scene validation, and the two channel-synthesis modes."""

import math

import numpy as np
import pytest

from cobalt import ImagingSetup, make_ula
from cobalt.das import apply_dynamic_delay, delay_map
from cobalt.simulator import (ChannelFrame, Pulse, Scatterer, ScattererScene,
                              render_pulse, simulate_channels)

PITCH = 1540.0 / 3.4e6 / 2.0


def test_pulse_closed_form_and_truncation():
    p = Pulse.gaussian(3.4e6, 0.5e-6, 16e6, support_sigmas=6.0)
    assert p.support_s == pytest.approx(3e-6)
    # envelope peaks at the support midpoint
    mid = p.support_s / 2
    assert abs(p(np.array([mid]))[0]) == pytest.approx(
        abs(math.cos(2 * math.pi * 3.4e6 * mid)))
    assert p(np.array([-1e-9, p.support_s, 1e-3])).tolist() == [0.0, 0.0, 0.0]
    np.testing.assert_allclose(p.squared(np.array([mid])),
                               p(np.array([mid])) ** 2)


def test_pulse_validation():
    with pytest.raises(ValueError):
        Pulse(3.4e6, -1e-6, 3e-6, 16e6)
    with pytest.raises(ValueError):
        Pulse(3.4e6, 1e-6, 0.0, 16e6)


def test_render_pulse_checks_grid_step():
    p = Pulse.gaussian(3.4e6, 0.5e-6, 16e6)
    grid = np.arange(64) / 16e6
    out = render_pulse(p, grid)
    np.testing.assert_allclose(out, p(grid))
    with pytest.raises(ValueError):
        render_pulse(p, np.arange(64) / 8e6)


def test_scene_validation():
    with pytest.raises(ValueError):
        ScattererScene((Scatterer(1e-5, 1.0), Scatterer(1e-5, 0.5)), 1540.0)
    with pytest.raises(ValueError):
        ScattererScene((Scatterer(1e-5, -0.2),), 1540.0)


def test_scene_separation_guard():
    p = Pulse.gaussian(3.4e6, 0.5e-6, 16e6)  # support 3us -> guard 30us
    ScattererScene((Scatterer(31e-6, 1.0),), 1540.0).check_separation(p)
    with pytest.raises(ValueError):
        ScattererScene((Scatterer(29e-6, 1.0),), 1540.0).check_separation(p)


def test_scatterer_at_depth():
    s = Scatterer.at_depth(0.0154, 1.0, 1540.0)
    assert s.delay_s == pytest.approx(2e-5)


def test_scene_dict_round_trip():
    scene = ScattererScene((Scatterer(3e-5, 1.0, 0.1), Scatterer(4e-5, 0.5)),
                           1500.0)
    back = ScattererScene.from_dict(scene.to_dict())
    for a, b in zip(scene.scatterers, back.scatterers):
        assert a.delay_s == pytest.approx(b.delay_s)
        assert a.amplitude == pytest.approx(b.amplitude)
        assert a.angle_rad == pytest.approx(b.angle_rad)


def test_channel_frame_validation(small_geometry):
    with pytest.raises(ValueError):
        ChannelFrame(np.zeros((3, 10)), 16e6, small_geometry)
    with pytest.raises(ValueError):
        ChannelFrame(np.full((8, 10), np.nan), 16e6, small_geometry)


def test_aligned_round_trip_is_exact():
    """Dynamic delay undoes the aligned synthesis to interpolation accuracy.

    The pulse support must be wide enough that its truncation edge (the
    only non-band-limited feature) sits below the target accuracy.
    """
    theta = 0.2
    setup = ImagingSetup(depth_time=52e-6, pulse_sigma_s=0.3e-6,
                         pulse_support_sigmas=12.0, angles_rad=(theta,))
    pulse = setup.pulse()
    scene = ScattererScene((Scatterer(43e-6, 1.0, theta),
                            Scatterer(47e-6, 0.5, theta)), 1540.0)
    geom = make_ula(64, PITCH)
    frame = simulate_channels(scene, pulse, setup, geom, theta)
    delayed = apply_dynamic_delay(frame, theta, taps=32)
    t = setup.time_grid
    ideal = pulse(t - 43e-6) + math.sqrt(0.5) * pulse(t - 47e-6)
    err = np.max(np.abs(delayed.samples - ideal[None, :]))
    assert err <= 1e-6 * np.max(np.abs(ideal))


def test_physical_model_arrival_times():
    theta_s = 0.15
    setup = ImagingSetup(depth_time=52e-6, pulse_sigma_s=0.3e-6,
                         pulse_support_sigmas=6.0)
    pulse = setup.pulse()
    t_s = 40e-6
    scene = ScattererScene((Scatterer(t_s, 1.0, theta_s),), 1540.0)
    geom = make_ula(16, PITCH)
    frame = simulate_channels(scene, pulse, setup, geom, 0.0, model="physical")
    fs = setup.sample_rate_hz
    for ch, delta in enumerate(geom.offsets_m):
        expected = delay_map(np.array([t_s]), theta_s, delta, 1540.0)[0]
        onset = np.flatnonzero(np.abs(frame.samples[ch]) > 1e-6)[0] / fs
        assert onset == pytest.approx(expected, abs=1.5 / fs)


def test_model_argument_validation(small_setup, small_geometry, small_scene):
    pulse = small_setup.pulse()
    with pytest.raises(ValueError):
        simulate_channels(small_scene, pulse, small_setup, small_geometry,
                          0.0, model="nope")


def test_snr_injection_level(small_setup, small_geometry, small_scene):
    pulse = small_setup.pulse()
    clean = simulate_channels(small_scene, pulse, small_setup, small_geometry, 0.08)
    noisy = simulate_channels(small_scene, pulse, small_setup, small_geometry,
                              0.08, snr_db=20.0, rng=5)
    noise = noisy.samples - clean.samples
    snr = 20 * np.log10(np.sqrt(np.mean(clean.samples ** 2))
                        / np.sqrt(np.mean(noise ** 2)))
    assert snr == pytest.approx(20.0, abs=1.0)


def test_transmit_beam_weighting(small_setup, small_geometry):
    pulse = small_setup.pulse()
    scene = ScattererScene((Scatterer(16e-6, 1.0, 0.3),), 1540.0)
    on = simulate_channels(scene, pulse, small_setup, small_geometry, 0.3,
                           tx_beam_sigma_rad=0.05)
    off = simulate_channels(scene, pulse, small_setup, small_geometry, 0.0,
                            tx_beam_sigma_rad=0.05, model="physical")
    assert np.abs(on.samples).max() > 100 * np.abs(off.samples).max()


def test_scatterer_beyond_window_rejected(small_setup, small_geometry):
    pulse = small_setup.pulse()
    scene = ScattererScene((Scatterer(25.5e-6, 1.0),), 1540.0)
    with pytest.raises(ValueError):
        simulate_channels(scene, pulse, small_setup, small_geometry, 0.0)
