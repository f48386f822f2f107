"""Array index-set algebra: ULAs, fractal thinned arrays, sumsets and beampatterns.

Element locations are integer indices on the pitch grid, so sumsets and
apodization convolutions are exact. Physical positions derive as
(m - center_index) * pitch_m.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArrayGeometry",
    "Apodization",
    "make_ula",
    "make_fractal",
    "sumset",
    "intrinsic_apodization",
    "beampattern",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Linear array described by integer element indices on the pitch grid.

    Parameters
    ----------
    elements : tuple of int
        Distinct element indices, sorted ascending.
    pitch_m : float
        Inter-index spacing in meters.
    center_index : int
        Index of the reference element; its physical position is 0.
    """

    elements: tuple
    pitch_m: float
    center_index: int = 0

    def __post_init__(self):
        elems = tuple(int(e) for e in self.elements)
        if len(elems) == 0:
            raise ValueError("geometry needs at least one element")
        if sorted(set(elems)) != list(elems):
            raise ValueError("element indices must be distinct and sorted ascending")
        if not self.pitch_m > 0:
            raise ValueError("pitch_m must be positive")
        object.__setattr__(self, "elements", elems)

    def __len__(self):
        return len(self.elements)

    @property
    def indices(self):
        """Element indices as an int array."""
        return np.asarray(self.elements, dtype=int)

    @property
    def offsets_m(self):
        """Physical element positions relative to the reference element [m]."""
        return (self.indices - self.center_index) * self.pitch_m

    @property
    def aperture(self):
        """Index span (max - min) of the array."""
        return self.elements[-1] - self.elements[0]

    def with_center(self, center_index):
        return ArrayGeometry(self.elements, self.pitch_m, int(center_index))

    def to_dict(self):
        return {
            "elements": list(self.elements),
            "pitch_m": self.pitch_m,
            "center_index": self.center_index,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["elements"]), float(d["pitch_m"]), int(d["center_index"]))


@dataclass(frozen=True)
class Apodization:
    """Integer weights on the sum co-array support.

    ``weights[j]`` is the pair-count at co-array index ``support_start + j``.
    """

    weights: np.ndarray
    support_start: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=int)
        object.__setattr__(self, "weights", w)

    @property
    def support_indices(self):
        return self.support_start + np.arange(len(self.weights))

    @property
    def total(self):
        return int(self.weights.sum())


def make_ula(num_elements, pitch_m):
    """Uniform linear array {0..num_elements-1} with the center as reference."""
    n = int(num_elements)
    if n < 1:
        raise ValueError("num_elements must be >= 1")
    return ArrayGeometry(tuple(range(n)), float(pitch_m), n // 2)


def make_fractal(generator, order):
    """Thinned array from the recursion W_{r+1} = union over g of (W_r + g * L^r).

    The translation factor is L = 2*max(generator)+1 and W_0 = {0}. The
    generator must contain 0 as its minimum. The reference index is set to
    the middle of the resulting aperture so that the sum co-array center is
    an integer multiple of it.
    """
    gen = np.asarray(generator.indices if isinstance(generator, ArrayGeometry) else generator, dtype=int)
    pitch = generator.pitch_m if isinstance(generator, ArrayGeometry) else 1.0
    if int(order) < 0:
        raise ValueError("order must be nonnegative")
    if gen.min() != 0:
        raise ValueError("generator minimum must be 0")
    L = 2 * int(gen.max()) + 1
    w = np.array([0], dtype=int)
    for r in range(int(order)):
        w = np.unique(np.concatenate([w + g * L**r for g in gen]))
    return ArrayGeometry(tuple(int(v) for v in w), pitch, int((w.min() + w.max()) // 2))


def sumset(a):
    """Sum co-array of a geometry: distinct pairwise index sums.

    The reference index of the result is twice the input's, so that DAS on
    the co-array shares the phase origin of squared beampatterns.
    """
    idx = a.indices
    sums = np.unique(idx[:, None] + idx[None, :])
    return ArrayGeometry(tuple(int(v) for v in sums), a.pitch_m, 2 * a.center_index)


def intrinsic_apodization(a):
    """Pair-count weights a = I_M * I_M induced on the sum co-array."""
    idx = a.indices
    span = a.aperture
    indicator = np.zeros(span + 1, dtype=int)
    indicator[idx - idx[0]] = 1
    w = np.convolve(indicator, indicator)
    return Apodization(w, 2 * a.elements[0])


def beampattern(a, omega0, thetas, c, apod=None):
    """Narrowband receive beampattern H(theta) on a steering-angle grid.

    Without apodization this is the plain DAS pattern
    ``H(theta) = sum_n exp(-1j * omega0 * delta_n * sin(theta) / c)`` over the
    array elements. With an :class:`Apodization`, ``a`` is interpreted as the
    physical array and the sum runs over the apodization support on its sum
    co-array, whose phase reference sits at twice the array center.

    Parameters
    ----------
    a : ArrayGeometry
    omega0 : float
        Carrier angular frequency [rad/s].
    thetas : array_like
        Steering angles [rad], within (-pi/2, pi/2).
    c : float
        Speed of sound [m/s].
    apod : Apodization, optional

    Returns
    -------
    ndarray of complex, same shape as thetas.
    """
    thetas = np.asarray(thetas, dtype=float)
    if apod is None:
        positions = (a.indices - a.center_index) * a.pitch_m
        weights = np.ones(len(positions))
    else:
        positions = (apod.support_indices - 2 * a.center_index) * a.pitch_m
        weights = apod.weights.astype(float)
    phase = -1j * omega0 / c * np.outer(np.sin(thetas).ravel(), positions)
    h = np.exp(phase) @ weights
    return h.reshape(thetas.shape)
