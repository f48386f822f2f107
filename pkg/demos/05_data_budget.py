"""Channel-data budget of sub-Nyquist sparse-array imaging.

Two savings multiply: element thinning (64 -> 15 channels for a fractal
array with a full sum co-array over the same aperture) and sub-Nyquist
sampling (a line is reconstructed from a few hundred coefficients instead
of thousands of time samples). The product is the factor by which the data
leaving the probe shrinks — the figure that decides whether a wireless link
can carry it. Computed exactly as rationals, then rounded for display.

Run:  python3 demos/05_data_budget.py
"""

from fractions import Fraction

from cobalt.imaging import reduction_factor

CASES = [
    # (full elements, kept elements, full-rate samples, kept values, label)
    (64, 15, 3328, 100, "deep imaging, aggressive sub-band"),
    (64, 15, 1920, 230, "shallow imaging, safe sub-band"),
    (64, 15, 3328, 400, "deep imaging, safe sub-band"),
    (64, 15, 1920, 480, "shallow imaging, wide sub-band"),
]


def main():
    print(f"{'configuration':38s} {'per-channel':>12s} {'elements':>9s} "
          f"{'total':>8s}")
    for full, kept, n_full, n_used, label in CASES:
        rf = reduction_factor(full, kept, n_full, n_used)
        per_channel = Fraction(n_full, n_used)
        elements = Fraction(full, kept)
        print(f"{label:38s} {float(per_channel):11.2f}x "
              f"{float(elements):8.2f}x {float(rf):7.1f}x")
    print("\ntotal = per-channel x element reduction; e.g. "
          f"{reduction_factor(64, 15, 3328, 100)} = "
          f"{float(reduction_factor(64, 15, 3328, 100)):.1f}")


if __name__ == "__main__":
    main()
