"""Full-rate convolutional beamforming: per-sample lateral self-convolution
of the delayed channels, summed over the resulting co-array bins.

Channels are laid out by physical element position within the aperture
(zeros at missing elements of a thinned array) so the spatial convolution
lands on the correct sum co-array bins.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from .das import BeamformedLine

__all__ = ["NormalizedFrame", "normalize", "lateral_convolution", "coba_beamform"]


@dataclass
class NormalizedFrame:
    """Delayed channels after the magnitude/phase normalization step.

    ``values`` has shape [num_channels, num_samples] (channel order matches
    the geometry); complex.
    """

    values: np.ndarray
    geometry: object
    steering_angle: float
    sample_rate_hz: float
    sqrt_magnitude: bool = True

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)

    def embedded(self):
        """Values scattered onto aperture positions (zeros where no element)."""
        idx = self.geometry.indices
        span = self.geometry.aperture + 1
        out = np.zeros((span, self.values.shape[1]), dtype=complex)
        out[idx - idx[0]] = self.values
        return out


def normalize(frame, analytic=True, sqrt_magnitude=True):
    """Map each delayed sample to sqrt-magnitude with preserved phase.

    u = exp(1j*angle(x)) * sqrt(|x|). Real input is first converted to its
    analytic form (Hilbert quadrature) when ``analytic`` is set, since the
    phase of a raw real sample is only 0 or pi. With
    ``sqrt_magnitude=False`` the values pass through unchanged (the plain
    quadratic product path used by the coefficient-domain beamformer).
    """
    x = np.asarray(frame.samples)
    if analytic and np.isrealobj(x):
        x = hilbert(x, axis=1)
    x = x.astype(complex)
    if sqrt_magnitude:
        mag = np.abs(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            phase = np.where(mag > 0, x / mag, 0.0)
        u = phase * np.sqrt(mag)
    else:
        u = x
    return NormalizedFrame(u, frame.geometry, frame.steering_angle,
                           frame.sample_rate_hz, sqrt_magnitude)


def lateral_convolution(values):
    """Per-time-sample self-convolution along the channel axis via FFT.

    values: [num_positions, num_samples]; returns [2*num_positions-1,
    num_samples], the co-array signals s_n(p).
    """
    values = np.asarray(values, dtype=complex)
    npos = values.shape[0]
    nfft = 1
    while nfft < 2 * npos - 1:
        nfft *= 2
    f = np.fft.fft(values, n=nfft, axis=0)
    s = np.fft.ifft(f * f, axis=0)[: 2 * npos - 1]
    return s


def lateral_convolution_direct(values):
    """O(n^2) double-sum reference for the FFT path (test oracle)."""
    values = np.asarray(values, dtype=complex)
    npos, nsamp = values.shape
    s = np.zeros((2 * npos - 1, nsamp), dtype=complex)
    for i in range(npos):
        for j in range(npos):
            s[i + j] += values[i] * values[j]
    return s


def coba_beamform(nf):
    """Convolutionally beamformed line: co-array signals summed per sample."""
    emb = nf.embedded()
    s = lateral_convolution(emb)
    line = s.sum(axis=0)
    return BeamformedLine(line, nf.steering_angle, nf.sample_rate_hz,
                          method_tag="COBA")
