"""Fourier transforms of Minkowski-functional powers and the derivative identities.

Fourier convention: ``phi^(x) = ∫ phi(y) exp(-i (x, y)) dy``.  For
``-n < p < 0``, ``(|x|^p)^ = c(n, p) |xi|^(-n-p)`` and for the quadratic
norm ``||x||_M = sqrt(x^T M x)``,
``(||x||_M^p)^(xi) = det(M)^(-1/2) c(n, p) (xi^T M^-1 xi)^((-n-p)/2)``.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, special

from .errors import ExcludedOrderError, SingularityError, UnsupportedOperation
from .fracderiv import derivative_at_zero
from .geometry import Ellipsoid, as_direction
from .sections import section_profile
from .spheres import sphere_rule

POLE_GUARD = 1e-8


def ft_radial_power_constant(n, p):
    """``c(n, p)`` with ``(|x|^p)^ = c(n, p) |xi|^(-n-p)`` in R^n, for ``-n < p < 0``."""
    if not -n < p < 0:
        raise ValueError(f"need -n < p < 0, got n={n}, p={p}")
    for z in ((n + p) / 2, -p / 2):
        if z <= 0 and abs(z - round(z)) < POLE_GUARD:
            raise SingularityError(f"Gamma argument {z} is at a pole")
    if abs(p) < POLE_GUARD or abs(n + p) < POLE_GUARD:
        raise SingularityError("p is too close to an endpoint of the admissible range")
    return 2.0 ** (n + p) * math.pi ** (n / 2) * special.gamma((n + p) / 2) / special.gamma(-p / 2)


def _radial_moment(power, a):
    """``∫_0^∞ r^power exp(-a r^2) dr`` by adaptive quadrature."""
    f = lambda r: r**power * math.exp(-a * r * r)
    cut = 1.0 / math.sqrt(a)
    i1, _ = integrate.quad(f, 0.0, cut, epsabs=0, epsrel=1e-13, limit=200)
    i2, _ = integrate.quad(f, cut, math.inf, epsabs=0, epsrel=1e-13, limit=200)
    return i1 + i2


def gaussian_pairing(n, p, scale, matrix=None, rule=None):
    """Both sides of ``<f, g^> = <f^, g>`` for ``f = ||x||_M^p`` and a Gaussian ``g``.

    ``g(x) = exp(-|x|^2 / (2 s^2))`` has ``g^(xi) = (2 pi s^2)^(n/2) exp(-s^2 |xi|^2 / 2)``.
    Integrals over R^n are done in polar coordinates: adaptive quadrature in
    the radius times a product rule on the sphere.  The right-hand side uses
    the closed-form transform divided by ``c(n, p)``, so ``lhs / rhs`` is an
    independent estimate of the constant.
    """
    M = np.eye(n) if matrix is None else np.asarray(matrix, dtype=float)
    rule = sphere_rule(n) if rule is None else rule
    s2 = scale * scale
    th = rule.points
    ang_f = rule.integrate(np.einsum("ij,jk,ik->i", th, M, th) ** (p / 2))
    Minv = np.linalg.inv(M)
    ang_ft = rule.integrate(np.einsum("ij,jk,ik->i", th, Minv, th) ** ((-n - p) / 2))
    lhs = (2 * math.pi * s2) ** (n / 2) * ang_f * _radial_moment(p + n - 1, s2 / 2)
    rhs = np.linalg.det(M) ** -0.5 * ang_ft * _radial_moment(-p - 1, 1 / (2 * s2))
    return lhs, rhs


def pairing_constant(n, p, scale):
    """Estimate of ``c(n, p)`` from the Gaussian pairing at one scale."""
    lhs, rhs = gaussian_pairing(n, p, scale)
    return lhs / rhs


def ft_minkowski_power(body, p, xi):
    """``(||x||_K^p)^(xi)`` for a ball or centered ellipsoid."""
    if not isinstance(body, Ellipsoid) or not body.centered:
        raise UnsupportedOperation("closed-form transform needs a ball or centered ellipsoid")
    xi = np.asarray(xi, dtype=float)
    n = body.dim
    c = ft_radial_power_constant(n, p)
    q = float(xi @ body._inv @ xi)
    return float(np.linalg.det(body.matrix) ** -0.5 * c * q ** ((-n - p) / 2))


@dataclass
class IdentityCheck:
    body: str
    n: int
    k: int
    xi: list
    lhs: float
    rhs: float
    abs_residual: float
    kind: str

    def to_json(self):
        return asdict(self)


def _centered_ellipsoid(body):
    if not isinstance(body, Ellipsoid) or not body.centered:
        raise UnsupportedOperation("identity check needs a ball or centered ellipsoid")


def closed_form_lhs(body, xi, k):
    """Paper-convention ``A^{(k)}(0)`` for a centered ellipsoid from its closed-form profile.

    ``A(t) = C (h^2 - t^2)^m`` with ``m = (n-1)/2``; the ``t^k`` Taylor
    coefficient is ``C binom(m, k/2) (-1)^(k/2) h^(2m-k)`` for even ``k``.
    """
    _centered_ellipsoid(body)
    if k % 2:
        return 0.0
    from .spheres import unit_ball_volume

    n = body.dim
    h = math.sqrt(float(xi @ body._inv @ xi))
    C = unit_ball_volume(n - 1) / math.sqrt(np.linalg.det(body.matrix)) / h**n
    m = (n - 1) / 2
    j = k // 2
    coeff = C * special.binom(m, j) * (-1) ** j * h ** (2 * m - k)
    return float(math.factorial(k) * coeff)


def verify_even_identity(body, k, xi, lhs_method="numeric", node_count=33,
                         profile_method="auto"):
    """Check ``A^{(k)}(0) = (-1)^{k/2} / (2 pi (n-k-1)) (||x||^{-n+1+k} + ||-x||^{-n+1+k})^(xi)``.

    ``lhs_method`` is ``"numeric"`` (derivative of a sampled profile) or
    ``"closed"`` (closed-form profile).  Only ``0 <= k < n-1`` is supported,
    where the transform is a locally integrable function with a closed form.
    """
    _centered_ellipsoid(body)
    xi = as_direction(xi)
    n = body.dim
    if k % 2:
        raise ValueError("even identity needs an even order")
    if k == n - 1:
        raise ExcludedOrderError(f"order k = n - 1 = {k} is excluded")
    if not 0 <= k < n - 1:
        raise ValueError(f"closed-form path needs 0 <= k < n-1, got k={k}, n={n}")
    if lhs_method == "closed":
        lhs = closed_form_lhs(body, xi, k)
    else:
        prof = section_profile(body, xi, node_count, profile_method)
        lhs = derivative_at_zero(prof, k).value
    p = -n + 1 + k
    # symmetric body: both transform terms coincide
    rhs = (-1) ** (k // 2) / (2 * math.pi * (n - k - 1)) * 2.0 * ft_minkowski_power(body, p, xi)
    return IdentityCheck(body.label, n, k, xi.tolist(), float(lhs), float(rhs),
                         abs(float(lhs) - float(rhs)), "independent")


def verify_odd_identity_symmetric(body, k, xi, node_count=33, profile_method="auto"):
    """Odd-order identity for origin-symmetric bodies: both sides vanish.

    The right-hand side is identically zero, so this is a consistency check
    on the computed ``A^{(k)}(0)``, not an independent comparison.
    """
    if not body.symmetric:
        raise UnsupportedOperation("odd identity is only checked for origin-symmetric bodies")
    if k % 2 == 0 or k <= 0:
        raise ValueError("odd identity needs a positive odd order")
    xi = as_direction(xi)
    if k == body.dim - 1:
        raise ExcludedOrderError(f"order k = n - 1 = {k} is excluded")
    prof = section_profile(body, xi, node_count, profile_method)
    lhs = derivative_at_zero(prof, k).value
    return IdentityCheck(body.label, body.dim, k, xi.tolist(), float(lhs), 0.0,
                         abs(float(lhs)), "consistency")


def identity_sweep(body, orders, directions, **kw):
    """Identity checks for every (order, direction); even orders use the independent check."""
    out = []
    for k in orders:
        for xi in directions:
            if k % 2 == 0:
                out.append(verify_even_identity(body, k, xi, **kw))
            else:
                out.append(verify_odd_identity_symmetric(body, k, xi))
    return out


def checks_to_json(checks):
    return json.dumps([c.to_json() for c in checks], indent=2)


def checks_summary_csv(checks, path=None):
    """One row per (body, n, k) with the maximum residual over directions."""
    summary = {}
    for c in checks:
        key = (c.body, c.n, c.k)
        summary[key] = max(summary.get(key, 0.0), c.abs_residual)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["body", "n", "k", "max_residual"])
    for (body, n, k), r in summary.items():
        w.writerow([body, n, k, repr(r)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
