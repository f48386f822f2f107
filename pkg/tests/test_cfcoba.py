"""Coefficient-domain convolution, its oracles, and sparse line recovery."""

import numpy as np
import pytest

from cobalt import ImagingSetup, make_fractal, make_ula
from cobalt.cfcoba import (CobaSpectrum, RecoveryError, SolverConfig,
                           build_recovery_model, cfcoba_spectrum,
                           cfcoba_spectrum_direct, consistency_with_fullrate,
                           estimate_epsilon, recover_line)
from cobalt.fourier import BandSpec, SpectralFrame

PITCH = 1540.0 / 3.4e6 / 2.0


def _random_delayed_frame(rng, geom, band):
    c = rng.normal(size=(len(geom), band.size)) \
        + 1j * rng.normal(size=(len(geom), band.size))
    return SpectralFrame(c, band, geom, delayed=True)


def test_spectrum_matches_quadruple_sum():
    for trial in range(100):
        r = np.random.default_rng(trial)
        n = int(r.integers(2, 6))
        b = int(r.integers(2, 7))
        geom = make_ula(n, PITCH)
        frame = _random_delayed_frame(r, geom, BandSpec(10, b, 1e-4))
        fast = cfcoba_spectrum(frame).coefficients
        slow = cfcoba_spectrum_direct(frame).coefficients
        assert np.max(np.abs(fast - slow)) <= 1e-10 * np.max(np.abs(slow))


def test_spectrum_shape_scale_and_guards(rng, small_geometry):
    band = BandSpec(20, 6, 1e-4)
    frame = _random_delayed_frame(rng, small_geometry, band)
    spec = cfcoba_spectrum(frame)
    assert len(spec.coefficients) == 11
    assert spec.scale == 11.0
    assert (spec.sumset_band.start, spec.sumset_band.size) == (40, 11)
    scaled = cfcoba_spectrum(frame, n_time=256)
    np.testing.assert_allclose(scaled.series_coefficients,
                               spec.series_coefficients, rtol=1e-12)
    undelayed = SpectralFrame(frame.coefficients, band, small_geometry)
    with pytest.raises(ValueError):
        cfcoba_spectrum(undelayed)
    with pytest.raises(ValueError):
        cfcoba_spectrum(SpectralFrame(frame.coefficients, band, None,
                                      delayed=True))


def test_thinned_array_spectrum_uses_coarray(rng):
    geom = make_fractal(make_ula(2, PITCH), 2)
    band = BandSpec(15, 5, 1e-4)
    frame = _random_delayed_frame(rng, geom, band)
    fast = cfcoba_spectrum(frame).coefficients
    slow = cfcoba_spectrum_direct(frame).coefficients
    np.testing.assert_allclose(fast, slow, rtol=1e-10)


def test_consistency_exact_for_bandlimited_frames(rng):
    geom = make_ula(6, PITCH)
    full = BandSpec(100, 32, 1e-4)
    for frac in (1, 2, 4):
        sub = full.centered_sub(32 // frac)
        csub = rng.normal(size=(6, sub.size)) \
            + 1j * rng.normal(size=(6, sub.size))
        cfull = np.zeros((6, 32), dtype=complex)
        lo = sub.start - full.start
        cfull[:, lo:lo + sub.size] = csub
        dev = consistency_with_fullrate(
            SpectralFrame(cfull, full, geom, delayed=True),
            SpectralFrame(csub, sub, geom, delayed=True), n_full=1600)
        assert dev <= 1e-8


def test_consistency_guards(rng):
    geom = make_ula(4, PITCH)
    a = _random_delayed_frame(rng, geom, BandSpec(100, 16, 1e-4))
    b = _random_delayed_frame(rng, geom, BandSpec(90, 8, 1e-4))
    with pytest.raises(ValueError):
        consistency_with_fullrate(a, b)


def test_recovery_model_matches_quadrature_oracle():
    """A @ (unit spike) equals the continuous Fourier coefficients of the
    shifted pulse square, evaluated by dense Simpson integration."""
    from scipy.integrate import simpson

    setup = ImagingSetup(depth_time=26e-6, pulse_sigma_s=0.25e-6,
                         pulse_support_sigmas=6.0)
    pulse = setup.pulse()
    band = BandSpec(77, 16, setup.depth_time)
    model = build_recovery_model(pulse, band, setup)
    k = 250
    shift = setup.time_grid[k]
    T = setup.depth_time
    tg = np.linspace(0.0, pulse.support_s, 1 << 16)
    g = pulse.squared(tg)
    ref = np.array([
        simpson(g * np.exp(-2j * np.pi * m / T * tg), x=tg) / T
        * np.exp(-2j * np.pi * m * shift / T)
        for m in band.sum_band().indices])
    col = model.matrix[:, k]
    assert np.max(np.abs(col - ref)) <= 2e-5 * np.max(np.abs(ref))


def test_recovery_model_close_to_sampled_line_spectrum():
    """The model's columns track the DFT of the acquisition-rate rendering
    to within the alias floor of the squared carrier (~1e-3 here: the
    doubled carrier's spectral tail folds back across Nyquist)."""
    setup = ImagingSetup(depth_time=52e-6, pulse_sigma_s=0.5e-6,
                         pulse_support_sigmas=6.0)
    pulse = setup.pulse()
    band = BandSpec(160, 36, setup.depth_time)
    model = build_recovery_model(pulse, band, setup)
    n = setup.num_time_samples
    k = 400
    line = pulse.squared(setup.time_grid - setup.time_grid[k])
    ref = np.fft.fft(line)[band.sum_band().indices] / n
    col = model.matrix[:, k]
    assert np.max(np.abs(col - ref)) <= 2e-3 * np.max(np.abs(ref))


def test_recovery_model_guards(small_setup):
    pulse = small_setup.pulse()
    with pytest.raises(ValueError):
        build_recovery_model(pulse, BandSpec(200, 16, small_setup.depth_time),
                             small_setup)  # sumset past the transform length
    with pytest.raises(ValueError):
        build_recovery_model(pulse, BandSpec(77, 4, small_setup.depth_time),
                             small_setup, expected_sparsity=5)


def _spike_spectrum(setup, pulse, band, spikes, amps):
    n = setup.num_time_samples
    t = setup.time_grid
    line = np.zeros(n)
    for k, a in zip(spikes, amps):
        line += a * pulse.squared(t - t[k])
    y = np.fft.fft(line)[band.sum_band().indices] / n
    return CobaSpectrum(y, band, 1.0)


def test_recover_exact_spikes():
    setup = ImagingSetup(depth_time=52e-6, pulse_sigma_s=0.5e-6,
                         pulse_support_sigmas=6.0)
    pulse = setup.pulse()
    band = BandSpec(160, 36, setup.depth_time)
    model = build_recovery_model(pulse, band, setup)
    spikes, amps = [520, 620, 700], [1.0, 0.4, 0.7]
    spec = _spike_spectrum(setup, pulse, band, spikes, amps)
    res = recover_line(spec, model)
    assert res.support.tolist() == spikes
    # residual mismatch is the alias floor of the sampled replica train
    np.testing.assert_allclose(res.amplitudes[spikes], amps, rtol=1e-3)
    assert res.diagnostics["feasible"]
    assert res.line.samples.shape == (setup.num_time_samples,)


def test_recover_with_noise_keeps_support():
    setup = ImagingSetup(depth_time=52e-6, pulse_sigma_s=0.5e-6,
                         pulse_support_sigmas=6.0)
    pulse = setup.pulse()
    band = BandSpec(160, 36, setup.depth_time)
    model = build_recovery_model(pulse, band, setup)
    spikes, amps = [520, 640], [1.0, 0.6]
    spec = _spike_spectrum(setup, pulse, band, spikes, amps)
    r = np.random.default_rng(9)
    sigma = np.linalg.norm(spec.coefficients) / np.sqrt(
        len(spec.coefficients)) * 10 ** (-30 / 20)
    noisy = spec.coefficients + sigma / np.sqrt(2) * (
        r.normal(size=len(spec.coefficients))
        + 1j * r.normal(size=len(spec.coefficients)))
    nspec = CobaSpectrum(noisy, band, 1.0)
    eps = float(np.linalg.norm(noisy - spec.coefficients))
    res = recover_line(nspec, model, SolverConfig(epsilon=eps))
    assert set(spikes) <= set(res.support.tolist())
    np.testing.assert_allclose(res.amplitudes[spikes], amps, rtol=0.1)


def test_recovery_error_carries_diagnostics(rng):
    setup = ImagingSetup(depth_time=26e-6, pulse_sigma_s=0.25e-6,
                         pulse_support_sigmas=6.0)
    pulse = setup.pulse()
    band = BandSpec(77, 12, setup.depth_time)
    model = build_recovery_model(pulse, band, setup)
    # an iteration budget far too small to reach the residual target
    junk = rng.normal(size=23) + 1j * rng.normal(size=23)
    spec = CobaSpectrum(junk, band, 1.0)
    cfg = SolverConfig(max_iter=2, lambda_stages=1, debias=False,
                       residual_floor_rel=1e-10)
    with pytest.raises(RecoveryError) as exc:
        recover_line(spec, model, cfg)
    diag = exc.value.diagnostics
    assert diag["feasible"] is False
    assert diag["residual"] > 0
    assert diag["iterations"] > 0
    # best-effort mode returns the same solution instead of raising
    cfg_soft = SolverConfig(max_iter=2, lambda_stages=1, debias=False,
                            residual_floor_rel=1e-10, strict=False)
    res = recover_line(spec, model, cfg_soft)
    assert res.diagnostics["feasible"] is False


def test_complex_amplitude_recovery():
    setup = ImagingSetup(depth_time=52e-6, pulse_sigma_s=0.5e-6,
                         pulse_support_sigmas=6.0)
    pulse = setup.pulse()
    band = BandSpec(160, 36, setup.depth_time)
    model = build_recovery_model(pulse, band, setup)
    spikes = [520, 660]
    amps = [1.0 * np.exp(0.7j), 0.5 * np.exp(-1.9j)]
    n = setup.num_time_samples
    g = np.fft.fft(pulse.squared(setup.time_grid))[band.sum_band().indices] / n
    k_idx = band.sum_band().indices
    y = sum(a * g * np.exp(-2j * np.pi * k_idx * s / n)
            for a, s in zip(amps, spikes))
    spec = CobaSpectrum(y, band, 1.0)
    res = recover_line(spec, model,
                       SolverConfig(complex_amplitudes=True))
    assert set(spikes) <= set(res.support.tolist())
    got = res.amplitudes[spikes]
    np.testing.assert_allclose(got, amps, rtol=1e-4)


def test_zero_spectrum_recovers_zero(small_setup):
    pulse = small_setup.pulse()
    band = BandSpec(77, 12, small_setup.depth_time)
    model = build_recovery_model(pulse, band, small_setup)
    spec = CobaSpectrum(np.zeros(23, dtype=complex), band, 1.0)
    res = recover_line(spec, model)
    assert np.count_nonzero(res.amplitudes) == 0
    assert res.diagnostics["feasible"]


def test_estimate_epsilon_tracks_noise_level(rng):
    setup = ImagingSetup(depth_time=52e-6, pulse_sigma_s=0.5e-6,
                         pulse_support_sigmas=6.0)
    pulse = setup.pulse()
    band = BandSpec(160, 36, setup.depth_time)
    model = build_recovery_model(pulse, band, setup)
    sigma = 1e-4
    noise = sigma / np.sqrt(2) * (rng.normal(size=71) + 1j * rng.normal(size=71))
    spec = CobaSpectrum(noise, band, 1.0)
    est = estimate_epsilon(spec, model)
    true = sigma * np.sqrt(71)
    assert 0.3 * true < est < 3.0 * true
