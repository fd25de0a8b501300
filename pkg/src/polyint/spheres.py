"""Deterministic point sets and quadrature rules on spheres."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, qmc

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fibonacci_sphere(count):
    """Fibonacci lattice on S^2, ``count`` points, no randomisation."""
    i = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(1.0 - z * z)
    phi = i * GOLDEN_ANGLE
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def circle_points(count, phase=0.5):
    """Equispaced points on S^1, offset by ``phase`` of a step so no point sits on an axis."""
    a = 2.0 * np.pi * (np.arange(count) + phase) / count
    return np.column_stack([np.cos(a), np.sin(a)])


def sobol_sphere(dim, count, seed=0):
    """Scrambled Sobol points pushed to S^{dim-1} through the Gaussian quantile map."""
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    # draw a full power-of-two block, then truncate (keeps prefixes nested)
    u = sampler.random_base2(max(int(np.ceil(np.log2(max(count, 1)))), 0))[:count]
    u = np.clip(u, 1e-12, 1 - 1e-12)
    g = norm.ppf(u)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_points(dim, count, seed=0):
    """Low-discrepancy sample of ``count`` unit vectors in R^dim.

    Circle for dim 2, Fibonacci lattice for dim 3, seeded Sobol otherwise.
    """
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    if dim == 2:
        return circle_points(count)
    if dim == 3:
        return fibonacci_sphere(count)
    return sobol_sphere(dim, count, seed)


@dataclass(frozen=True)
class SphereRule:
    """Nodes and weights integrating functions on S^{dim-1} (embedded in R^dim)."""

    points: np.ndarray
    weights: np.ndarray
    settings: dict

    @property
    def dim(self):
        return self.points.shape[1]

    def integrate(self, values):
        return float(np.dot(self.weights, values))


def sphere_rule(dim, n_trap=None, n_gauss=32, n_azimuth=64):
    """Product quadrature on S^{dim-1}.

    dim 1 is the two-point "sphere" {-1, +1}; dim 2 uses the periodic
    trapezoid rule (default 256 nodes); higher dims use hyperspherical angles
    with Gauss-Legendre in every polar angle and a trapezoid in the azimuth.
    """
    if dim == 1:
        return SphereRule(np.array([[1.0], [-1.0]]), np.ones(2), {"kind": "points"})
    if dim == 2:
        m = 256 if n_trap is None else int(n_trap)
        a = 2.0 * np.pi * np.arange(m) / m
        pts = np.column_stack([np.cos(a), np.sin(a)])
        return SphereRule(pts, np.full(m, 2.0 * np.pi / m), {"kind": "trapezoid", "nodes": m})

    x, w = np.polynomial.legendre.leggauss(n_gauss)
    polar = 0.5 * np.pi * (x + 1.0)
    polar_w = 0.5 * np.pi * w
    az = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    az_w = np.full(n_azimuth, 2.0 * np.pi / n_azimuth)

    n_polar = dim - 2
    grids = np.meshgrid(*([polar] * n_polar + [az]), indexing="ij")
    wgrids = np.meshgrid(*([polar_w] * n_polar + [az_w]), indexing="ij")
    angles = [g.ravel() for g in grids]
    weights = np.prod([g.ravel() for g in wgrids], axis=0)

    pts = np.empty((angles[0].size, dim))
    sin_prod = np.ones(angles[0].size)
    for k in range(n_polar):
        pts[:, k] = sin_prod * np.cos(angles[k])
        # surface element carries sin^(dim-2-k) of the k-th polar angle
        weights = weights * np.sin(angles[k]) ** (dim - 2 - k)
        sin_prod = sin_prod * np.sin(angles[k])
    pts[:, dim - 2] = sin_prod * np.cos(angles[-1])
    pts[:, dim - 1] = sin_prod * np.sin(angles[-1])
    settings = {"kind": "product-gauss", "gauss": n_gauss, "azimuth": n_azimuth}
    return SphereRule(pts, weights, settings)


def sphere_area(dim):
    """Surface area of S^{dim-1}."""
    from scipy.special import gamma

    return 2.0 * np.pi ** (dim / 2) / gamma(dim / 2)


def unit_ball_volume(dim):
    """Volume of the unit ball in R^dim."""
    from scipy.special import gamma

    return np.pi ** (dim / 2) / gamma(dim / 2 + 1)
