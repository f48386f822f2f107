"""On-disk contracts: acquisition files, scene files, image/metric outputs.

An acquisition file is a JSON header line, a little-endian float32 payload
laid out channel-major per angle (angles concatenated), and a trailer
carrying the SHA-256 of the header for integrity.
"""

import hashlib
import json
import os
import struct
import tempfile

import numpy as np

from .geometry import ArrayGeometry
from .params import ImagingSetup
from .simulator import ChannelFrame, ScattererScene

__all__ = [
    "write_acquisition",
    "read_acquisition_header",
    "read_acquisition_frame",
    "load_scene",
    "save_scene",
    "write_pgm",
    "write_csv_matrix",
]

FORMAT_VERSION = 1


def _atomic_write(path, writer):
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "wb") as f:
            writer(f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_acquisition(path, setup, geometry, frames, scene=None, extra=None):
    """Write a full frame set (one [channels x samples] block per angle)."""
    frames = [np.asarray(f.samples if isinstance(f, ChannelFrame) else f)
              for f in frames]
    if len(frames) != len(setup.angles_rad):
        raise ValueError("one frame per configured angle required")
    nch, nsamp = frames[0].shape
    for f in frames:
        if f.shape != (nch, nsamp):
            raise ValueError("all frames must share [channels, samples] shape")
    header = {
        "format_version": FORMAT_VERSION,
        "setup": setup.to_dict(),
        "geometry": geometry.to_dict(),
        "scene": scene.to_dict() if isinstance(scene, ScattererScene) else scene,
        "num_angles": len(frames),
        "num_channels": int(nch),
        "num_samples": int(nsamp),
    }
    if extra:
        header["extra"] = extra
    header_bytes = json.dumps(header, sort_keys=True).encode()
    digest = hashlib.sha256(header_bytes).hexdigest().encode()

    def writer(f):
        f.write(header_bytes + b"\n")
        for block in frames:
            f.write(block.astype("<f4").tobytes())
        f.write(digest)

    _atomic_write(path, writer)


def read_acquisition_header(path):
    with open(path, "rb") as f:
        header_line = f.readline()
    header = json.loads(header_line.decode())
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError("unsupported acquisition format version")
    return header


def _verify_trailer(path, header_line_len, header_bytes, payload_size):
    with open(path, "rb") as f:
        f.seek(header_line_len + payload_size)
        digest = f.read(64)
    if digest != hashlib.sha256(header_bytes).hexdigest().encode():
        raise ValueError("acquisition file integrity check failed")


def read_acquisition_frame(path, angle_index, verify=True):
    """Lazily read one angle's channel block as a ChannelFrame."""
    with open(path, "rb") as f:
        header_line = f.readline()
    header = json.loads(header_line.decode())
    nch = header["num_channels"]
    nsamp = header["num_samples"]
    nang = header["num_angles"]
    if not 0 <= angle_index < nang:
        raise IndexError("angle index out of range")
    block_bytes = nch * nsamp * 4
    if verify:
        _verify_trailer(path, len(header_line),
                        json.dumps(header, sort_keys=True).encode(),
                        block_bytes * nang)
    with open(path, "rb") as f:
        f.seek(len(header_line) + angle_index * block_bytes)
        data = np.frombuffer(f.read(block_bytes), dtype="<f4")
    samples = data.reshape(nch, nsamp).astype(float)
    setup = ImagingSetup.from_dict(header["setup"])
    geom = ArrayGeometry.from_dict(header["geometry"])
    return ChannelFrame(samples, setup.sample_rate_hz, geom,
                        steering_angle=setup.angles_rad[angle_index],
                        speed_of_sound=setup.speed_of_sound), setup


def load_scene(path):
    with open(path) as f:
        return ScattererScene.from_dict(json.load(f))


def save_scene(path, scene):
    with open(path, "w") as f:
        json.dump(scene.to_dict(), f, indent=2)


def write_pgm(path, intensity_db, dynamic_range_db):
    """8-bit PGM of a dB matrix; NaN renders black."""
    img = np.asarray(intensity_db, dtype=float)
    scaled = (img + dynamic_range_db) / dynamic_range_db * 255.0
    scaled = np.where(np.isnan(scaled), 0.0, np.clip(scaled, 0, 255))
    data = scaled.astype(np.uint8)

    def writer(f):
        f.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode())
        f.write(data.tobytes())

    _atomic_write(path, writer)


def write_csv_matrix(path, matrix):
    np.savetxt(path, np.asarray(matrix), delimiter=",", fmt="%.6g")
