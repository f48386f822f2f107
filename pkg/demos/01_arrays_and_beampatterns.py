"""Fractal array thinning and the sum co-array.

A uniform 64-element array can be thinned to a fractal pattern with far
fewer elements whose *sum co-array* — the set of pairwise index sums — is
still a full contiguous aperture. Squaring the beamformer output turns the
thinned array's physical beampattern into the co-array's, so a handful of
elements image with (almost) the lateral resolution of the full array.

Run:  python3 demos/01_arrays_and_beampatterns.py [--out demo_output]
"""

import argparse
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cobalt import make_fractal, make_ula
from cobalt.geometry import beampattern, intrinsic_apodization, sumset

C = 1540.0
F0 = 3.4e6
PITCH = C / F0 / 2.0  # half-wavelength pitch


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_output")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    full = make_ula(64, PITCH)
    thinned = make_fractal(make_ula(2, PITCH), 4)
    co = sumset(thinned)
    print(f"full array: {len(full)} elements, aperture {full.aperture}")
    print(f"thinned array: {len(thinned)} elements at indices "
          f"{thinned.elements}")
    print(f"sum co-array: {len(co)} positions, aperture {co.aperture}, "
          f"contiguous: {co.elements == tuple(range(co.aperture + 1))}")

    omega0 = 2 * np.pi * F0
    thetas = np.linspace(-0.5, 0.5, 2001)
    h_full = np.abs(beampattern(full, omega0, thetas, C))
    h_thin = np.abs(beampattern(thinned, omega0, thetas, C))
    apod = intrinsic_apodization(thinned)
    h_quad = np.abs(beampattern(thinned, omega0, thetas, C, apod=apod))

    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(8, 7))
    ax0.eventplot([np.array(full.elements) * PITCH * 1e3,
                   np.array(thinned.elements) * PITCH * 1e3],
                  lineoffsets=[1, 0], linelengths=0.8, colors=["C0", "C3"])
    ax0.set_yticks([1, 0], ["uniform (64)", f"fractal ({len(thinned)})"])
    ax0.set_xlabel("element position [mm]")
    ax0.set_title("element layouts")

    for h, label in ((h_full, "uniform, linear sum"),
                     (h_thin, "fractal, linear sum"),
                     (h_quad, "fractal, squared sum (co-array)")):
        ax1.plot(np.degrees(thetas), 20 * np.log10(h / h.max() + 1e-12),
                 label=label)
    ax1.set_ylim(-60, 2)
    ax1.set_xlabel("angle [deg]")
    ax1.set_ylabel("beampattern [dB]")
    ax1.legend(loc="upper right", fontsize=8)
    ax1.set_title("squaring restores the co-array mainlobe")
    fig.tight_layout()
    path = out / "01_beampatterns.png"
    fig.savefig(path, dpi=120)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
