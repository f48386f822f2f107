"""Acquisition configuration shared by the simulator and the beamformers."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ImagingSetup"]


@dataclass(frozen=True)
class ImagingSetup:
    """Physical constants and acquisition grid for one scan.

    Parameters
    ----------
    speed_of_sound : float
        c [m/s].
    depth_time : float
        Receive window T [s]; the pulse penetration depth in time.
    carrier_hz : float
        Transducer center frequency f0 [Hz].
    sample_rate_hz : float
        Full-rate acquisition frequency fs [Hz].
    angles_rad : tuple of float
        Transmit/steer angles of the frame, each within (-pi/2, pi/2).
    band_start : int
        First Fourier-series index of the acquired band.
    band_size : int
        Cardinality B of the acquired band.
    sub_band_size : int or None
        Cardinality B_sN of the sub-Nyquist band (consecutive, centered
        inside the full band); None disables the compressed path.
    pulse_sigma_s : float
        Gaussian envelope width of the transmit burst [s].
    pulse_support_sigmas : float
        Hard truncation of the burst, in envelope widths.
    """

    speed_of_sound: float = 1540.0
    depth_time: float = 208e-6
    carrier_hz: float = 3.4e6
    sample_rate_hz: float = 16e6
    angles_rad: tuple = (0.0,)
    band_start: int = 0
    band_size: int = 0
    sub_band_size: int = 0
    pulse_sigma_s: float = 2e-6
    pulse_support_sigmas: float = 6.0

    def __post_init__(self):
        if self.depth_time <= 0:
            raise ValueError("depth_time must be positive")
        angles = tuple(float(a) for a in self.angles_rad)
        if any(abs(a) >= math.pi / 2 for a in angles):
            raise ValueError("angles must lie within (-90, 90) degrees")
        object.__setattr__(self, "angles_rad", angles)
        if self.sample_rate_hz <= 2 * self.carrier_hz:
            warnings.warn(
                "sample rate below 2x carrier; time-domain delay interpolation "
                "will alias",
                stacklevel=2,
            )

    @property
    def num_time_samples(self):
        """N_st = floor(T * fs)."""
        return int(math.floor(self.depth_time * self.sample_rate_hz))

    @property
    def sample_period(self):
        return 1.0 / self.sample_rate_hz

    @property
    def time_grid(self):
        return np.arange(self.num_time_samples) / self.sample_rate_hz

    @property
    def half_wavelength_pitch(self):
        """Element pitch of a half-wavelength array at the carrier."""
        return self.speed_of_sound / self.carrier_hz / 2.0

    def pulse(self):
        from .simulator import Pulse
        return Pulse.gaussian(self.carrier_hz, self.pulse_sigma_s,
                              self.sample_rate_hz, self.pulse_support_sigmas)

    def to_dict(self):
        return {
            "speed_of_sound": self.speed_of_sound,
            "depth_time": self.depth_time,
            "carrier_hz": self.carrier_hz,
            "sample_rate_hz": self.sample_rate_hz,
            "angles_rad": list(self.angles_rad),
            "band_start": self.band_start,
            "band_size": self.band_size,
            "sub_band_size": self.sub_band_size,
            "pulse_sigma_s": self.pulse_sigma_s,
            "pulse_support_sigmas": self.pulse_support_sigmas,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["angles_rad"] = tuple(d.get("angles_rad", (0.0,)))
        return cls(**d)
