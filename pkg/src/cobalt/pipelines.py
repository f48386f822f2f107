"""End-to-end per-line beamforming pipelines tying the modules together."""

import numpy as np

from . import cfcoba as _cfcoba
from .coba import NormalizedFrame, coba_beamform, normalize
from .das import BeamformedLine, apply_dynamic_delay, das_beamform
from .fourier import (BandSpec, extract_coefficients, fd_beamform, fd_delay,
                      get_or_build_lut, spectrum_to_time)

__all__ = ["METHODS", "band_for_setup", "sub_band_for_setup", "beamform_line"]

METHODS = ("das", "fdbf", "coba", "fcoba", "cfcoba")


def band_for_setup(setup):
    if setup.band_size <= 0:
        raise ValueError("setup has no acquisition band configured")
    return BandSpec(setup.band_start, setup.band_size, setup.depth_time)


def sub_band_for_setup(setup):
    if not setup.sub_band_size:
        raise ValueError("setup has no sub-Nyquist band configured")
    return band_for_setup(setup).centered_sub(setup.sub_band_size)


def beamform_line(frame, method, setup, pulse=None, *, lut_cache=None,
                  epsilon_q=1e-3, n_cap=600, taps=8, solver_cfg=None,
                  sqrt_normalization=True, cfcoba_render="recover"):
    """Produce one beamformed line from a channel frame.

    method is one of ``das`` (time-domain reference), ``fdbf``
    (frequency-domain delay-and-sum), ``coba`` (time-domain convolutional),
    ``fcoba`` (frequency-domain convolutional at the effective Nyquist rate,
    plain quadratic products) or ``cfcoba`` (sub-Nyquist coefficient-domain
    convolution; recovered sparsely unless ``cfcoba_render='direct'``).
    ``pulse`` is required for cfcoba recovery.
    """
    theta = frame.steering_angle
    n_st = frame.num_time_samples
    if method == "das":
        return das_beamform(frame, theta, taps=taps)

    if method == "coba":
        delayed = apply_dynamic_delay(frame, theta, taps=taps)
        nf = normalize(delayed, analytic=True, sqrt_magnitude=sqrt_normalization)
        return coba_beamform(nf)

    band = band_for_setup(setup)
    if method == "fdbf":
        sf = extract_coefficients(frame, band)
        lut = get_or_build_lut(theta, band, frame.geometry, setup,
                               epsilon_q=epsilon_q, n_cap=n_cap,
                               cache_dir=lut_cache)
        bf = fd_beamform(fd_delay(sf, lut))
        line = spectrum_to_time(bf, n_st, analytic=True)
        return BeamformedLine(line, theta, frame.sample_rate_hz, method_tag="FDBF")

    if method == "fcoba":
        sf = extract_coefficients(frame, band)
        lut = get_or_build_lut(theta, band, frame.geometry, setup,
                               epsilon_q=epsilon_q, n_cap=n_cap,
                               cache_dir=lut_cache)
        delayed = fd_delay(sf, lut)
        channels = spectrum_to_time(delayed, n_st, analytic=True)
        channels = np.atleast_2d(channels)
        nf = NormalizedFrame(channels, frame.geometry, theta,
                             frame.sample_rate_hz, sqrt_magnitude=False)
        line = coba_beamform(nf)
        line.method_tag = "FCOBA"
        return line

    if method == "cfcoba":
        sub = sub_band_for_setup(setup)
        sf = extract_coefficients(frame, sub)
        lut = get_or_build_lut(theta, sub, frame.geometry, setup,
                               epsilon_q=epsilon_q, n_cap=n_cap,
                               cache_dir=lut_cache)
        delayed = fd_delay(sf, lut)
        spec = _cfcoba.cfcoba_spectrum(delayed)
        if cfcoba_render == "direct":
            line = spec.render(n_st, analytic=True)
            return BeamformedLine(line, theta, frame.sample_rate_hz,
                                  method_tag="CFCOBA")
        if pulse is None:
            raise ValueError("cfcoba recovery needs the transmit pulse")
        model = _cfcoba.build_recovery_model(pulse, sub, setup)
        result = _cfcoba.recover_line(spec, model, solver_cfg)
        return result.line

    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
