"""B-mode image assembly and quality/efficiency metrics."""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.signal import hilbert

__all__ = [
    "BModeImage",
    "MetricsReport",
    "envelope",
    "envelope_logcompress",
    "assemble_image",
    "scan_convert",
    "reduction_factor",
    "fwhm",
    "cnr",
    "nrmse",
]


@dataclass
class BModeImage:
    """Log-compressed polar image: rows are angles, columns depth samples."""

    intensity_db: np.ndarray
    angles_rad: np.ndarray
    depths_m: np.ndarray
    dynamic_range_db: float
    method_tag: str = ""

    def __post_init__(self):
        self.intensity_db = np.asarray(self.intensity_db, dtype=float)
        self.angles_rad = np.asarray(self.angles_rad, dtype=float)
        self.depths_m = np.asarray(self.depths_m, dtype=float)
        if self.intensity_db.shape != (len(self.angles_rad), len(self.depths_m)):
            raise ValueError("intensity must be [num_angles, num_depths]")
        if len(self.angles_rad) > 1 and not np.all(np.diff(self.angles_rad) > 0):
            raise ValueError("angle grid must be strictly increasing")
        if len(self.depths_m) > 1 and not np.all(np.diff(self.depths_m) > 0):
            raise ValueError("depth grid must be strictly increasing")


@dataclass
class MetricsReport:
    reduction_factor: Fraction = None
    fwhm_mm: dict = field(default_factory=dict)
    cnr_db: dict = field(default_factory=dict)
    nrmse: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "reduction_factor": float(self.reduction_factor)
            if self.reduction_factor is not None else None,
            "reduction_factor_exact": [self.reduction_factor.numerator,
                                       self.reduction_factor.denominator]
            if self.reduction_factor is not None else None,
            "fwhm_mm": self.fwhm_mm,
            "cnr_db": self.cnr_db,
            "nrmse": self.nrmse,
        }


def envelope(line):
    """Linear-scale envelope of a beamformed line (real lines via Hilbert)."""
    x = np.asarray(line.samples if hasattr(line, "samples") else line)
    if np.isrealobj(x):
        x = hilbert(x)
    return np.abs(x)


def envelope_logcompress(line, dynamic_range_db=60.0, reference=None):
    """Envelope in dB, normalized to ``reference`` (default: own max), clipped
    to [-dynamic_range_db, 0]. An all-zero line maps to the floor."""
    env = envelope(line)
    ref = reference if reference is not None else env.max()
    if ref <= 0:
        return np.full_like(env, -dynamic_range_db)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(env / ref)
    return np.clip(db, -dynamic_range_db, 0.0)


def assemble_image(lines, angles_rad, speed_of_sound, sample_rate_hz,
                   dynamic_range_db=60.0, method_tag=""):
    """Polar B-mode image from per-angle lines, normalized to the frame max."""
    envs = np.stack([envelope(ln) for ln in lines])
    ref = envs.max()
    if ref <= 0:
        db = np.full(envs.shape, -dynamic_range_db)
    else:
        with np.errstate(divide="ignore"):
            db = np.clip(20.0 * np.log10(envs / ref), -dynamic_range_db, 0.0)
    n = envs.shape[1]
    depths = np.arange(n) / sample_rate_hz * speed_of_sound / 2.0
    return BModeImage(db, np.asarray(angles_rad), depths, dynamic_range_db,
                      method_tag=method_tag)


def scan_convert(img, num_x=256, num_z=256):
    """Bilinear polar-to-Cartesian conversion; out-of-sector pixels are NaN."""
    if len(img.angles_rad) == 0 or len(img.depths_m) == 0:
        raise ValueError("empty grids")
    rmax = img.depths_m[-1]
    amax = max(abs(img.angles_rad[0]), abs(img.angles_rad[-1]), 1e-6)
    x = np.linspace(-rmax * math.sin(amax), rmax * math.sin(amax), num_x)
    z = np.linspace(0.0, rmax, num_z)
    xx, zz = np.meshgrid(x, z, indexing="ij")
    rr = np.hypot(xx, zz)
    tt = np.arctan2(xx, zz)
    out = np.full((num_x, num_z), np.nan)
    inside = (rr >= img.depths_m[0]) & (rr <= rmax) & \
             (tt >= img.angles_rad[0]) & (tt <= img.angles_rad[-1])
    ti = np.interp(tt[inside], img.angles_rad, np.arange(len(img.angles_rad)))
    ri = np.interp(rr[inside], img.depths_m, np.arange(len(img.depths_m)))
    t0 = np.clip(np.floor(ti).astype(int), 0, len(img.angles_rad) - 2) \
        if len(img.angles_rad) > 1 else np.zeros(len(ti), dtype=int)
    r0 = np.clip(np.floor(ri).astype(int), 0, len(img.depths_m) - 2) \
        if len(img.depths_m) > 1 else np.zeros(len(ri), dtype=int)
    ft = ti - t0
    fr = ri - r0
    v = img.intensity_db
    if len(img.angles_rad) == 1:
        t1 = t0
        ft = np.zeros_like(ft)
    else:
        t1 = t0 + 1
    if len(img.depths_m) == 1:
        r1 = r0
        fr = np.zeros_like(fr)
    else:
        r1 = r0 + 1
    vals = (v[t0, r0] * (1 - ft) * (1 - fr) + v[t1, r0] * ft * (1 - fr)
            + v[t0, r1] * (1 - ft) * fr + v[t1, r1] * ft * fr)
    out[inside] = vals
    return out


def reduction_factor(full_count, thinned_count, n_traditional, n_used):
    """Exact rational data-size reduction (|M|/|U|) * (N_st/N_used)."""
    if min(full_count, thinned_count, n_traditional, n_used) <= 0:
        raise ValueError("all counts must be positive")
    return Fraction(int(full_count), int(thinned_count)) * \
        Fraction(int(n_traditional), int(n_used))


def fwhm(values, positions, level_db=-6.0):
    """Full width of the dominant peak at ``level_db`` below it.

    ``values`` is a linear-scale envelope cut; crossings are located by
    linear interpolation on either side of the peak.

    Raises
    ------
    ValueError
        If there is no peak above zero.
    """
    v = np.asarray(values, dtype=float)
    x = np.asarray(positions, dtype=float)
    ipk = int(np.argmax(v))
    pk = v[ipk]
    if pk <= 0:
        raise ValueError("no peak above the floor")
    level = pk * 10 ** (level_db / 20.0)

    def cross(side):
        idxs = range(ipk, 0, -1) if side < 0 else range(ipk, len(v) - 1)
        for i in idxs:
            j = i - 1 if side < 0 else i + 1
            if v[j] <= level:
                f = (v[i] - level) / (v[i] - v[j])
                return x[i] + f * (x[j] - x[i])
        return x[0] if side < 0 else x[-1]

    return abs(cross(+1) - cross(-1))


def cnr(image_linear, mask_a, mask_b):
    """Contrast-to-noise ratio between two regions, in dB.

    |mu_a - mu_b| / sqrt(var_a + var_b) on the linear-scale envelope.
    Identical statistics return -inf; zero variance in both regions with
    different means is rejected.
    """
    va = np.asarray(image_linear)[np.asarray(mask_a)]
    vb = np.asarray(image_linear)[np.asarray(mask_b)]
    if va.size == 0 or vb.size == 0:
        raise ValueError("regions must be non-empty")
    denom = math.sqrt(va.var() + vb.var())
    num = abs(va.mean() - vb.mean())
    if denom == 0:
        if num == 0:
            return -math.inf
        raise ValueError("zero variance in both regions")
    ratio = num / denom
    return -math.inf if ratio == 0 else 20.0 * math.log10(ratio)


def nrmse(a, b):
    """Root-mean-square difference normalized by the RMS of the reference a."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ref = np.sqrt(np.mean(a**2))
    if ref == 0:
        return 0.0 if np.allclose(b, 0) else math.inf
    return float(np.sqrt(np.mean((a - b) ** 2)) / ref)
