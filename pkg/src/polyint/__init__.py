"""Numerical toolkit for sections, derivatives and polynomial integrability of convex bodies."""

__version__ = "0.1.0"

from ._backend import NAME as backend
from .errors import *  # noqa: F401,F403
from .fracderiv import derivative_at_zero, fractional_derivative_at_zero, fractional_limit_check
from .geometry import (
    Ball,
    Ellipsoid,
    ProductBody,
    Shifted,
    Superellipsoid,
    chord,
    load_body,
    minkowski,
    radial,
    support,
)
from .integrability import derivative_vanishing_report, integrability_report, min_poly_degree
from .polynomials import MultiPoly, fit_homogeneous
from .reconstruct import reconstruct_ellipsoid
from .sections import half_volume, local_profile, section_area, section_profile, volume
from .spectral import ft_radial_power_constant, verify_even_identity

__all__ = [
    "Ball", "Ellipsoid", "MultiPoly", "ProductBody", "Shifted", "Superellipsoid",
    "backend", "chord", "derivative_at_zero", "derivative_vanishing_report",
    "fit_homogeneous", "fractional_derivative_at_zero", "fractional_limit_check",
    "ft_radial_power_constant", "half_volume", "integrability_report", "load_body",
    "local_profile", "min_poly_degree", "minkowski", "radial", "reconstruct_ellipsoid",
    "section_area", "section_profile", "support", "verify_even_identity", "volume",
]
