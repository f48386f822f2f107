"""Point-scatterer channel-data synthesis.

Channels are synthesized so that applying the dynamic receive delay
downstream reproduces, exactly, a stream of pulse replicas at the scatterer
delays. This is done by inverting the delay map in closed form: for
``tau = (t + sqrt(t^2 - 4*gamma*t*sin(theta) + 4*gamma^2)) / 2`` the inverse
is ``t = (tau^2 - gamma^2) / (tau - gamma*sin(theta))``, with
``gamma = delta_m / c``. The undelayed channel is then evaluated as
``phi_m(tau) = sum_s a_{s,m} h(t(tau) - t_s)`` with the pulse in closed form,
so the only downstream error source is interpolation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry
from .params import ImagingSetup

__all__ = [
    "Pulse",
    "Scatterer",
    "ScattererScene",
    "ChannelFrame",
    "render_pulse",
    "simulate_channels",
]


@dataclass(frozen=True)
class Pulse:
    """Gaussian-modulated cosine burst, hard-truncated to [0, support_s).

    h(t) = exp(-(t - support_s/2)^2 / (2 * envelope_sigma_s^2)) * cos(2*pi*carrier_hz*t)
    """

    carrier_hz: float
    envelope_sigma_s: float
    support_s: float
    sample_rate_hz: float

    def __post_init__(self):
        if self.envelope_sigma_s <= 0 or self.support_s <= 0:
            raise ValueError("pulse envelope width and support must be positive")

    @classmethod
    def gaussian(cls, carrier_hz, envelope_sigma_s, sample_rate_hz, support_sigmas=6.0):
        """Pulse with support covering +-support_sigmas/2 envelope widths."""
        return cls(carrier_hz, envelope_sigma_s, support_sigmas * envelope_sigma_s, sample_rate_hz)

    def __call__(self, t):
        """Evaluate h(t) in closed form at arbitrary times."""
        t = np.asarray(t, dtype=float)
        inside = (t >= 0) & (t < self.support_s)
        arg = t - 0.5 * self.support_s
        env = np.exp(-(arg**2) / (2 * self.envelope_sigma_s**2))
        return np.where(inside, env * np.cos(2 * np.pi * self.carrier_hz * t), 0.0)

    def squared(self, t):
        """g(t) = h(t)^2, the shape of the convolutionally beamformed echoes."""
        return self(t) ** 2

    @property
    def num_support_samples(self):
        return int(math.ceil(self.support_s * self.sample_rate_hz))

    def to_dict(self):
        return {
            "carrier_hz": self.carrier_hz,
            "envelope_sigma_s": self.envelope_sigma_s,
            "support_s": self.support_s,
            "sample_rate_hz": self.sample_rate_hz,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def render_pulse(pulse, grid):
    """Sample the pulse on a uniform time grid at the pulse's sample rate."""
    grid = np.asarray(grid, dtype=float)
    if len(grid) > 1:
        step = grid[1] - grid[0]
        if not np.isclose(step, 1.0 / pulse.sample_rate_hz, rtol=1e-9):
            raise ValueError("grid step must equal 1/sample_rate_hz")
    out = pulse(grid)
    return out


@dataclass(frozen=True)
class Scatterer:
    delay_s: float
    amplitude: float
    angle_rad: float = 0.0

    @classmethod
    def at_depth(cls, depth_m, amplitude, speed_of_sound, angle_rad=0.0):
        """Round-trip delay of a reflector at the given depth."""
        return cls(2.0 * depth_m / speed_of_sound, amplitude, angle_rad)


@dataclass(frozen=True)
class ScattererScene:
    """Collection of point reflectors along with the medium sound speed."""

    scatterers: tuple
    speed_of_sound: float = 1540.0

    def __post_init__(self):
        scat = tuple(self.scatterers)
        delays = [s.delay_s for s in scat]
        if len(set(delays)) != len(delays):
            raise ValueError("scatterer delays must be distinct")
        if any(s.amplitude < 0 for s in scat):
            raise ValueError("reflectivities must be nonnegative")
        object.__setattr__(self, "scatterers", scat)

    def __len__(self):
        return len(self.scatterers)

    def check_separation(self, pulse):
        """Reject scenes that violate the non-overlap assumption t_s >= 10*support."""
        for s in self.scatterers:
            if s.delay_s < 10.0 * pulse.support_s:
                raise ValueError(
                    f"scatterer delay {s.delay_s:.3e}s violates the non-overlap "
                    f"guard (needs >= {10 * pulse.support_s:.3e}s)"
                )

    def to_dict(self):
        return {
            "speed_of_sound": self.speed_of_sound,
            "scatterers": [
                {"delay_s": s.delay_s, "amplitude": s.amplitude,
                 "angle_deg": math.degrees(s.angle_rad)}
                for s in self.scatterers
            ],
        }

    @classmethod
    def from_dict(cls, d):
        scat = []
        for rec in d["scatterers"]:
            if "delay_s" in rec:
                delay = float(rec["delay_s"])
            else:
                delay = 2.0 * float(rec["depth_m"]) / float(d["speed_of_sound"])
            scat.append(Scatterer(delay, float(rec["amplitude"]),
                                  math.radians(float(rec.get("angle_deg", 0.0)))))
        return cls(tuple(scat), float(d["speed_of_sound"]))


@dataclass
class ChannelFrame:
    """Per-channel RF samples for one transmit event.

    samples has shape [num_channels, num_time_samples] and is aligned with the
    element order of ``geometry``.
    """

    samples: np.ndarray
    sample_rate_hz: float
    geometry: ArrayGeometry
    steering_angle: float = 0.0
    t0_s: float = 0.0
    speed_of_sound: float = 1540.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 2 or self.samples.shape[0] != len(self.geometry):
            raise ValueError("samples must be [num_channels, num_time_samples]")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def num_channels(self):
        return self.samples.shape[0]

    @property
    def num_time_samples(self):
        return self.samples.shape[1]

    @property
    def duration(self):
        return self.num_time_samples / self.sample_rate_hz

    @property
    def time_grid(self):
        return self.t0_s + np.arange(self.num_time_samples) / self.sample_rate_hz


def _transmit_weight(scatterer, theta, tx_beam_sigma_rad):
    if tx_beam_sigma_rad is None:
        return 1.0
    d = scatterer.angle_rad - theta
    return math.exp(-(d * d) / (2.0 * tx_beam_sigma_rad**2))


def simulate_channels(scene, pulse, setup, geom, theta,
                      tx_beam_sigma_rad=None, snr_db=None, rng=None,
                      model="aligned"):
    """Synthesize one frame of undelayed channel data.

    With ``model='aligned'`` (the default) channels are built by warping time
    through the closed-form inverse of the dynamic delay toward ``theta``, so
    that downstream delay-and-sum reproduces the scatterer pulse train
    exactly; scatterer angles only enter through the transmit weighting. With
    ``model='physical'`` each channel receives a clean replica at the true
    element arrival time ``tau_m(t_s; angle_s)``, which is the model to use
    when the off-axis (lateral) response matters.

    Per-channel amplitudes are ``a_{s,m} = sqrt(b_s) * w_tx`` for all m, so the
    quadratic beamformed echo of scatterer s carries amplitude
    ``(sum_m a_{s,m})^2 = (|U| * sqrt(b_s) * w_tx)^2``. The optional
    ``tx_beam_sigma_rad`` applies a Gaussian transmit-beam profile over the
    scatterer angles; by default all scatterers are insonified with unit
    weight.

    Optional additive white Gaussian noise at ``snr_db`` relative to the RMS
    of the clean frame (off by default).
    """
    if model not in ("aligned", "physical"):
        raise ValueError("model must be 'aligned' or 'physical'")
    scene.check_separation(pulse)
    n = setup.num_time_samples
    tmax = setup.depth_time
    for s in scene.scatterers:
        if s.delay_s + pulse.support_s > tmax:
            raise ValueError(
                f"scatterer at {s.delay_s:.3e}s extends past the receive window "
                f"T={tmax:.3e}s"
            )

    tau = setup.time_grid  # delayed-time grid doubles as the sampling grid
    gammas = geom.offsets_m / scene.speed_of_sound
    sin_t = math.sin(theta)
    out = np.zeros((len(geom), n))
    for ch, gamma in enumerate(gammas):
        if model == "physical":
            acc = np.zeros(n)
            for s in scene.scatterers:
                a = math.sqrt(s.amplitude) * _transmit_weight(s, theta, tx_beam_sigma_rad)
                if a == 0.0:
                    continue
                t_s = s.delay_s
                arrival = 0.5 * (t_s + math.sqrt(
                    t_s * t_s - 4.0 * gamma * t_s * math.sin(s.angle_rad)
                    + 4.0 * gamma * gamma))
                acc += a * pulse(tau - arrival)
            out[ch] = acc
            continue
        if gamma == 0.0:
            t_of_tau = tau
            valid = np.ones(n, dtype=bool)
        else:
            valid = tau > abs(gamma) * (1 + 1e-12)
            denom = tau - gamma * sin_t
            with np.errstate(divide="ignore", invalid="ignore"):
                t_of_tau = (tau**2 - gamma**2) / denom
            t_of_tau = np.where(valid & (denom > 0), t_of_tau, -1.0)
        acc = np.zeros(n)
        for s in scene.scatterers:
            a = math.sqrt(s.amplitude) * _transmit_weight(s, theta, tx_beam_sigma_rad)
            if a == 0.0:
                continue
            acc += a * pulse(t_of_tau - s.delay_s)
        out[ch] = np.where(valid, acc, 0.0)

    if snr_db is not None:
        rng = np.random.default_rng(rng)
        rms = np.sqrt(np.mean(out**2))
        sigma = rms * 10 ** (-snr_db / 20.0) if rms > 0 else 0.0
        out = out + rng.normal(0.0, sigma, size=out.shape)

    return ChannelFrame(out, setup.sample_rate_hz, geom, steering_angle=theta,
                        speed_of_sound=scene.speed_of_sound)
