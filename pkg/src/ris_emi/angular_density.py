"""Angular power densities over the frontal half-space and their quadrature.

A density f(phi, theta) lives on [-pi/2, pi/2)^2 and integrates to 1. Two
kinds are supported: the isotropic half-space density cos(theta)/(2*pi) and a
truncated Gaussian concentrated around a nominal angle pair. Integrals are
evaluated with a tensor-product Gauss-Legendre rule; Gauss nodes never touch
the domain boundary, so the half-open interval needs no special casing.
"""

from dataclasses import dataclass, field

import numpy as np

DEFAULT_NODES_PER_AXIS = 96

HALF_PI = np.pi / 2


@dataclass(frozen=True)
class QuadratureRule:
    """Flattened tensor-product rule on [-pi/2, pi/2]^2.

    weights sum to pi^2, the domain area.
    """

    nodes_per_axis: int
    azimuth: np.ndarray = field(repr=False)
    elevation: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)


def gauss_legendre_rule(nodes_per_axis=DEFAULT_NODES_PER_AXIS):
    """Tensor-product Gauss-Legendre rule with the given nodes per axis."""
    if nodes_per_axis < 1:
        raise ValueError(f"nodes_per_axis must be positive, got {nodes_per_axis}")
    x, w = np.polynomial.legendre.leggauss(nodes_per_axis)
    x = x * HALF_PI
    w = w * HALF_PI
    az, el = np.meshgrid(x, x, indexing="ij")
    ww = np.outer(w, w)
    for arr in (az, el, ww):
        arr.setflags(write=False)
    return QuadratureRule(
        nodes_per_axis=nodes_per_axis,
        azimuth=az.ravel(),
        elevation=el.ravel(),
        weight=ww.ravel(),
    )


@dataclass(frozen=True)
class AngularDensity:
    """Normalized angular power density f(phi, theta).

    kind is "isotropic" or "truncated-gaussian". The Gaussian parameters are
    ignored for the isotropic kind. norm_constant is the constant c that makes
    the truncated Gaussian integrate to 1 (1.0 for isotropic).
    """

    kind: str
    mean_azimuth: float = 0.0
    mean_elevation: float = 0.0
    std_azimuth: float = 1.0
    std_elevation: float = 1.0
    norm_constant: float = 1.0

    def pdf(self, azimuth, elevation):
        """Evaluate f at (azimuth, elevation); broadcasts over arrays."""
        azimuth = np.asarray(azimuth, dtype=float)
        elevation = np.asarray(elevation, dtype=float)
        if self.kind == "isotropic":
            return np.cos(elevation) / (2.0 * np.pi) + 0.0 * azimuth
        ga = np.exp(-((azimuth - self.mean_azimuth) ** 2) / (2.0 * self.std_azimuth**2))
        ge = np.exp(
            -((elevation - self.mean_elevation) ** 2) / (2.0 * self.std_elevation**2)
        )
        scale = self.norm_constant / (2.0 * np.pi * self.std_azimuth * self.std_elevation)
        return scale * ga * ge * np.cos(elevation)

    def cache_key(self):
        """Hashable identity used for correlation-matrix caching."""
        if self.kind == "isotropic":
            return ("isotropic",)
        return (
            self.kind,
            float(self.mean_azimuth),
            float(self.mean_elevation),
            float(self.std_azimuth),
            float(self.std_elevation),
        )


def isotropic_density():
    """The half-space isotropic density f(phi, theta) = cos(theta)/(2*pi)."""
    return AngularDensity(kind="isotropic")


def gaussian_density(mean_azimuth, mean_elevation, std_azimuth, std_elevation, rule):
    """Truncated-Gaussian density around (mean_azimuth, mean_elevation).

    The unnormalized shape is

        exp(-(phi-phi0)^2 / (2 sa^2)) * exp(-(theta-theta0)^2 / (2 se^2))
            * cos(theta) / (2 pi sa se)

    and the returned density carries the constant c that normalizes its
    integral over the domain to 1, computed with the supplied rule. Choose the
    rule resolution to match the density width: nodes must sample the Gaussian
    core (node spacing near the center is about pi/nodes_per_axis).
    """
    if std_azimuth <= 0 or std_elevation <= 0:
        raise ValueError("standard deviations must be positive")
    for name, v in (("mean_azimuth", mean_azimuth), ("mean_elevation", mean_elevation)):
        if not (-HALF_PI <= v < HALF_PI):
            raise ValueError(f"{name} outside [-pi/2, pi/2): {v}")
    raw = AngularDensity(
        kind="truncated-gaussian",
        mean_azimuth=mean_azimuth,
        mean_elevation=mean_elevation,
        std_azimuth=std_azimuth,
        std_elevation=std_elevation,
        norm_constant=1.0,
    )
    mass = np.sum(rule.weight * raw.pdf(rule.azimuth, rule.elevation))
    if not np.isfinite(mass) or mass <= 0:
        raise ArithmeticError(
            f"density normalization failed: quadrature mass {mass!r}"
        )
    return AngularDensity(
        kind="truncated-gaussian",
        mean_azimuth=mean_azimuth,
        mean_elevation=mean_elevation,
        std_azimuth=std_azimuth,
        std_elevation=std_elevation,
        norm_constant=1.0 / mass,
    )


def integrate(density, fn, rule):
    """Integrate fn(phi, theta) against the density with the given rule.

    fn must accept arrays of angles and return array values (complex ok).
    Raises ArithmeticError identifying the first offending node if the
    integrand is nonfinite there.
    """
    values = np.asarray(fn(rule.azimuth, rule.elevation))
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ArithmeticError(
            "nonfinite integrand at node "
            f"(phi={rule.azimuth[i]:.6f}, theta={rule.elevation[i]:.6f})"
        )
    return np.sum(rule.weight * density.pdf(rule.azimuth, rule.elevation) * values)
