"""Time-domain dynamic-focusing delay-and-sum beamformer.

This is the reference path: every frequency-domain beamformer in the package
is validated against the lines produced here.
"""

import math
from dataclasses import dataclass

import numpy as np

from .simulator import ChannelFrame

__all__ = ["BeamformedLine", "delay_map", "apply_dynamic_delay", "das_beamform"]


@dataclass
class BeamformedLine:
    """One beamformed scan line on the acquisition time grid."""

    samples: np.ndarray
    steering_angle: float
    sample_rate_hz: float
    method_tag: str = "DAS"

    def __post_init__(self):
        self.samples = np.asarray(self.samples)

    @property
    def time_grid(self):
        return np.arange(len(self.samples)) / self.sample_rate_hz


def delay_map(t, theta, delta_m, c):
    """Dynamic receive delay tau_m(t; theta) for an element offset delta_m [m].

    tau = (t + sqrt(t^2 - 4*gamma*t*sin(theta) + 4*gamma^2)) / 2 with
    gamma = delta_m / c. Monotone nondecreasing in t; tau(0) = |gamma|.

    Raises
    ------
    FloatingPointError
        If the discriminant goes negative (numerically impossible for real
        inputs, but never silently clamped).
    """
    t = np.asarray(t, dtype=float)
    gamma = delta_m / c
    disc = t * t - 4.0 * gamma * t * np.sin(theta) + 4.0 * gamma * gamma
    if np.any(disc < 0):
        raise FloatingPointError("negative discriminant in delay map")
    return 0.5 * (t + np.sqrt(disc))


def _interp_weights(frac, taps, beta):
    # frac: [..., taps] offsets of the query point from each tap position
    w = np.sinc(frac)
    u = frac / (taps / 2.0)
    u = np.clip(u, -1.0, 1.0)
    w = w * np.i0(beta * np.sqrt(1.0 - u * u)) / np.i0(beta)
    return w


def interpolate_channel(samples, positions, taps=8, beta=None):
    """Band-limited read of a sampled channel at fractional sample positions.

    Windowed-sinc (Kaiser) kernel with ``taps`` points. Reads outside the
    sampled support return 0.
    """
    if beta is None:
        beta = 0.75 * taps
    samples = np.asarray(samples, dtype=float)
    x = np.asarray(positions, dtype=float)
    n0 = np.floor(x).astype(int) - taps // 2 + 1
    k = np.arange(taps)
    idx = n0[:, None] + k[None, :]
    frac = x[:, None] - idx
    w = _interp_weights(frac, taps, beta)
    valid = (idx >= 0) & (idx < len(samples))
    gathered = np.where(valid, samples[np.clip(idx, 0, len(samples) - 1)], 0.0)
    return np.sum(gathered * w, axis=1)


def apply_dynamic_delay(frame, theta, taps=8):
    """Dynamically delay every channel of a frame toward direction theta.

    Channel m of the output holds ``phi_m(tau_m(p*T_s; theta))`` via
    windowed-sinc interpolation; samples whose delay falls past the receive
    window are zero.
    """
    fs = frame.sample_rate_hz
    t = frame.time_grid
    out = np.zeros_like(frame.samples, dtype=float)
    tmax = frame.num_time_samples / fs
    for ch, delta in enumerate(frame.geometry.offsets_m):
        tau = delay_map(t, theta, delta, frame.speed_of_sound)
        inside = tau <= tmax
        vals = interpolate_channel(frame.samples[ch], tau * fs, taps=taps)
        out[ch] = np.where(inside, vals, 0.0)
    return ChannelFrame(out, fs, frame.geometry, steering_angle=theta, t0_s=frame.t0_s,
                        speed_of_sound=frame.speed_of_sound)


def das_beamform(frame, theta=None, taps=8, delayed=False):
    """Delay-and-sum line: per-sample mean of the dynamically delayed channels.

    Pass ``delayed=True`` if the frame already went through
    :func:`apply_dynamic_delay` (or was synthesized aligned).
    """
    if theta is None:
        theta = frame.steering_angle
    delayed_frame = frame if delayed else apply_dynamic_delay(frame, theta, taps=taps)
    line = delayed_frame.samples.mean(axis=0)
    return BeamformedLine(line, theta, frame.sample_rate_hz, method_tag="DAS")
