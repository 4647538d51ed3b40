"""RIS element grid geometry and plane-wave vectors.

The surface is a square grid of N elements (N a perfect square) centered at
the origin of the xy-plane, with nearest-neighbor spacing sqrt(A) so the
elements tile the aperture edge-to-edge. Elements are indexed row by row,
left to right, top row first.
"""

from dataclasses import dataclass, field
import math

import numpy as np


@dataclass(frozen=True)
class RisGeometry:
    """Element layout of a square RIS panel.

    Attributes
    ----------
    n_elements : int
        Number of elements N, a perfect square.
    element_area : float
        Area A of one element in m^2; spacing is sqrt(A).
    wavelength : float
        Carrier wavelength in m.
    positions : ndarray, shape (N, 3)
        Element centers u_n in m; z is identically 0.
    """

    n_elements: int
    element_area: float
    wavelength: float
    positions: np.ndarray = field(repr=False)

    @property
    def spacing(self):
        return math.sqrt(self.element_area)

    @property
    def side(self):
        return int(round(math.sqrt(self.n_elements)))


def is_perfect_square(n):
    if n < 1:
        return False
    r = math.isqrt(n)
    return r * r == n


def element_positions(n_elements, element_area, wavelength):
    """Build the centered square-grid geometry.

    Element n (1-based) sits at
        x = -(sqrt(N)-1)*sqrt(A)/2 + sqrt(A)*((n-1) mod sqrt(N))
        y = +(sqrt(N)-1)*sqrt(A)/2 - sqrt(A)*floor((n-1)/sqrt(N))
        z = 0

    Raises
    ------
    ValueError
        If n_elements is not a positive perfect square, or if
        element_area or wavelength is not positive.
    """
    if not is_perfect_square(n_elements):
        raise ValueError(
            f"n_elements must be a positive perfect square, got {n_elements}"
        )
    if element_area <= 0:
        raise ValueError(f"element_area must be positive, got {element_area}")
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")

    side = math.isqrt(n_elements)
    spacing = math.sqrt(element_area)
    idx = np.arange(n_elements)
    half = (side - 1) * spacing / 2.0
    pos = np.zeros((n_elements, 3))
    pos[:, 0] = -half + spacing * (idx % side)
    pos[:, 1] = half - spacing * (idx // side)
    pos.setflags(write=False)
    return RisGeometry(
        n_elements=n_elements,
        element_area=element_area,
        wavelength=wavelength,
        positions=pos,
    )


def wave_vector(azimuth, elevation, wavelength):
    """Wave vector k(phi, theta) of a plane wave from (azimuth, elevation).

    Returns (2*pi/lambda) * [cos(theta)cos(phi), cos(theta)sin(phi), sin(theta)],
    the gradient of the plane-wave phase; its norm is exactly 2*pi/lambda.
    Angles are radians in [-pi/2, pi/2). Scalar or array inputs broadcast.
    """
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.asarray(elevation, dtype=float)
    if np.any(azimuth < -np.pi / 2) or np.any(azimuth >= np.pi / 2):
        raise ValueError("azimuth outside [-pi/2, pi/2)")
    if np.any(elevation < -np.pi / 2) or np.any(elevation >= np.pi / 2):
        raise ValueError("elevation outside [-pi/2, pi/2)")
    k = 2.0 * np.pi / wavelength
    ct = np.cos(elevation)
    out = np.stack(
        np.broadcast_arrays(ct * np.cos(azimuth), ct * np.sin(azimuth), np.sin(elevation)),
        axis=-1,
    )
    return k * out
