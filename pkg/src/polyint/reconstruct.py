"""Recover the polynomial structure of a body's Minkowski functional from samples.

Stages, each a least-squares fit on sphere samples:

* ``P = ||x|| - ||-x||`` (degree 1) and ``Q = ||x||^2 + ||-x||^2`` (degree 2);
* ``||x|| = (P + sqrt(2Q - P^2)) / 2`` and the boundary quadric obtained by
  squaring ``2 - P = sqrt(2Q - P^2)``;
* ``B = ||x|| ||-x||`` (degree 2) and the odd-power radical identity
  ``||x||^(2k+1) = (T + sqrt(T^2 + 4 B^(2k+1))) / 2``.

Ellipsoids pass every stage; other bodies fail at a definite one.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InconsistencyError, PreconditionError
from .geometry import Ellipsoid, ellipsoid_parameters, require_symmetric
from .polynomials import (
    MultiPoly,
    evaluate,
    fit_homogeneous,
    quadratic_form_matrix,
    sqrt_poly,
)
from .spheres import circle_points, sphere_points

LOW_DEGREE_SAMPLES = 200
HIGH_DEGREE_SAMPLES = 500
FIT_TOL = 1e-4
IDENTITY_TOL = 1e-6
DEFINITE_TOL = 1e-10
SQUARE_TOL = 1e-4


def _sphere(dim, count, seed):
    return sphere_points(dim, count, seed)


def _norms(body, X):
    return body._minkowski(X), body._minkowski(-X)


# ---------------------------------------------------------------------------
# P, Q and the boundary quadric


@dataclass
class PQFit:
    P: MultiPoly
    Q: MultiPoly
    residual_P: float
    residual_Q: float

    @property
    def residual(self):
        return max(self.residual_P, self.residual_Q)

    @property
    def ok(self):
        return self.residual <= FIT_TOL


def fit_P_Q(body, sphere_samples=LOW_DEGREE_SAMPLES, seed=0):
    """Homogeneous fits of ``||x|| - ||-x||`` (degree 1) and ``||x||^2 + ||-x||^2`` (degree 2).

    Residuals are sup-norm misfits relative to ``max ||x||`` (for ``P``, which
    may vanish) and ``max Q`` on the samples.  A residual above ``FIT_TOL``
    means the body does not have this structure; ``PQFit.ok`` is then False.
    """
    if not body.convex:
        raise PreconditionError("fit_P_Q needs a convex body")
    X = _sphere(body.dim, sphere_samples, seed)
    a, b = _norms(body, X)
    fP = fit_homogeneous(X, a - b, 1, scale=float(np.max(a)))
    fQ = fit_homogeneous(X, a * a + b * b, 2)
    return PQFit(fP.poly, fQ.poly, fP.residual, fQ.residual)


def minkowski_from_PQ(body, P, Q, samples=LOW_DEGREE_SAMPLES, seed=1):
    """Sup-norm misfit of ``||x|| = (P + sqrt(2Q - P^2)) / 2`` on the unit sphere."""
    X = _sphere(body.dim, samples, seed)
    p = evaluate(P, X)
    rad = 2.0 * evaluate(Q, X) - p * p
    if np.min(rad) <= 0:
        raise InconsistencyError(
            f"2Q - P^2 is not positive on the sphere (min {np.min(rad):.3e}); "
            "P and Q do not come from a body with this structure")
    return float(np.max(np.abs(body._minkowski(X) - 0.5 * (p + np.sqrt(rad)))))


@dataclass
class QuadricFit:
    """Quadric ``x^T E x + b.x + c = 0`` with ``trace E >= 0``.

    For an ellipsoid, ``center`` and ``shape`` give ``(x - center)^T shape (x - center) = 1``.
    """

    E: np.ndarray
    b: np.ndarray
    c: float
    classification: str
    residual: float = None
    center: np.ndarray = None
    shape: np.ndarray = None
    eigenvalues: np.ndarray = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_ellipsoid(self):
        return self.classification == "ellipsoid"

    def as_body(self):
        if not self.is_ellipsoid:
            raise DomainError("quadric is not an ellipsoid")
        return Ellipsoid(self.shape, self.center)

    def to_json(self):
        out = {
            "E": self.E.tolist(),
            "b": self.b.tolist(),
            "c": self.c,
            "classification": self.classification,
            "residual": self.residual,
            "eigenvalues": self.eigenvalues.tolist(),
        }
        if self.is_ellipsoid:
            out["center"] = self.center.tolist()
            out["shape"] = self.shape.tolist()
        out.update(self.diagnostics)
        return out


def boundary_quadric(P, Q, body=None, samples=LOW_DEGREE_SAMPLES, seed=2):
    """Expand ``(2 - P)^2 = 2Q - P^2`` into a quadric and classify it.

    The expansion is exact polynomial arithmetic.  With ``body`` given, the
    residual is the sup over sphere directions of the relative difference
    between the body's and the quadric's radial functions.
    """
    if P.dim != Q.dim:
        raise DomainError("P and Q live in different dimensions")
    if P.degree > 1 or Q.degree > 2:
        raise DomainError("P must be linear and Q quadratic")
    n = P.dim
    two = MultiPoly.constant(n, 2.0)
    R = (two - P) ** 2 - (2.0 * Q - P * P)
    E = quadratic_form_matrix(R.homogeneous_part(2)) if R.degree >= 2 else np.zeros((n, n))
    b = np.array([R.coefficient(tuple(int(j == i) for j in range(n))) for i in range(n)])
    c = R.coefficient((0,) * n)
    if np.trace(E) < 0:
        E, b, c = -E, -b, -c
    eig = np.linalg.eigvalsh(E)
    big = float(np.max(np.abs(eig))) if eig.size else 0.0
    fit = QuadricFit(E, b, float(c), "other", eigenvalues=eig)
    if big == 0 or eig[0] <= DEFINITE_TOL * big:
        fit.diagnostics["reason"] = "E is not positive definite"
        return fit
    center = -0.5 * np.linalg.solve(E, b)
    k = float(center @ E @ center - c)
    if k <= 0:
        fit.diagnostics["reason"] = "quadric has no real points (empty)"
        return fit
    fit.classification = "ellipsoid"
    fit.center = center
    fit.shape = E / k
    if body is not None:
        fit.residual = boundary_distance(body, fit.as_body(), samples, seed)
    return fit


def boundary_distance(body, other, samples=LOW_DEGREE_SAMPLES, seed=2):
    """Sup over sampled directions of ``|r_K - r_L| / r_K`` for radial functions."""
    X = _sphere(body.dim, samples, seed)
    r1 = 1.0 / body._minkowski(X)
    r2 = 1.0 / other._minkowski(X)
    return float(np.max(np.abs(r1 - r2) / r1))


# ---------------------------------------------------------------------------
# product body and the odd-power radical identity


def product_body_B(body, samples=LOW_DEGREE_SAMPLES, seed=0):
    """Homogeneous quadratic fit of ``||x|| ||-x||``; returns ``(B, residual)``."""
    X = _sphere(body.dim, samples, seed)
    a, b = _norms(body, X)
    fit = fit_homogeneous(X, a * b, 2)
    return fit.poly, fit.residual


def odd_power_radical_check(body, k, samples=HIGH_DEGREE_SAMPLES, seed=0):
    """Sup-norm misfit of ``||x||^m = (T + sqrt(T^2 + 4 B^m)) / 2`` with ``m = 2k + 1``.

    ``T`` is a homogeneous degree-``m`` fit of ``||x||^m - ||-x||^m``; the
    radicand is assembled as a polynomial and evaluated on fresh samples.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    B, resB = product_body_B(body, seed=seed)
    if resB >= IDENTITY_TOL:
        raise PreconditionError(
            f"||x|| ||-x|| is not a quadratic form (residual {resB:.3e}); "
            "the radical identity does not apply")
    m = 2 * k + 1
    basis = math.comb(body.dim + m - 1, m)
    X = _sphere(body.dim, max(samples, 2 * basis + 16), seed)
    a, b = _norms(body, X)
    T = fit_homogeneous(X, a**m - b**m, m, scale=float(np.max(a**m))).poly
    radicand = T * T + 4.0 * B ** m
    Y = _sphere(body.dim, samples, seed + 1)
    rv = evaluate(radicand, Y)
    if np.min(rv) < 0:
        raise InconsistencyError(f"negative radicand {np.min(rv):.3e} in the radical identity")
    rhs = 0.5 * (evaluate(T, Y) + np.sqrt(rv))
    return float(np.max(np.abs(body._minkowski(Y) ** m - rhs)))


@dataclass
class RadicalExpr:
    """``x -> P(x) + sqrt(Q(x))`` with ``P`` odd and ``sqrt(Q)`` even (normal form)."""

    P: MultiPoly
    Q: MultiPoly

    def __call__(self, x):
        return evaluate(self.P, x) + np.sqrt(np.maximum(evaluate(self.Q, x), 0.0))

    @classmethod
    def fit(cls, f, dim, degree, samples=HIGH_DEGREE_SAMPLES, seed=0):
        """Normal form of a degree-``degree`` (odd) homogeneous function given by ``f``.

        ``P`` is the odd part of ``f`` and ``Q`` the square of its even part,
        fitted with degrees ``degree`` and ``2 degree``.
        """
        if degree % 2 == 0:
            raise ValueError("normal form needs odd degree")
        basis = math.comb(dim + 2 * degree - 1, 2 * degree)
        X = _sphere(dim, max(samples, 2 * basis + 16), seed)
        fp, fm = f(X), f(-X)
        odd, even = 0.5 * (fp - fm), 0.5 * (fp + fm)
        P = fit_homogeneous(X, odd, degree, scale=float(np.max(np.abs(fp)))).poly
        Q = fit_homogeneous(X, even * even, 2 * degree).poly
        return cls(P, Q)

    def is_perfect_square(self, samples=LOW_DEGREE_SAMPLES, seed=4, tol=SQUARE_TOL):
        _, res = sqrt_poly(self.Q, _sphere(self.Q.dim, samples, seed))
        return res <= tol

    def agreement(self, other, samples=LOW_DEGREE_SAMPLES, seed=5):
        X = _sphere(self.P.dim, samples, seed)
        return float(np.max(np.abs(self(X) - other(X))))

    def to_json(self):
        return {"P": self.P.to_json(), "Q": self.Q.to_json()}


# ---------------------------------------------------------------------------
# characterisations of ellipsoids


def parallelogram_test(body, trials=256, seed=0, pairs=None):
    """Max relative parallelogram-law violation over random (or given) pairs ``(u, v)``."""
    require_symmetric(body)
    if pairs is None:
        rng = np.random.default_rng(seed)
        U = rng.standard_normal((trials, body.dim))
        V = rng.standard_normal((trials, body.dim))
    else:
        U = np.array([p[0] for p in pairs], dtype=float)
        V = np.array([p[1] for p in pairs], dtype=float)
    nu = body._minkowski(U) ** 2
    nv = body._minkowski(V) ** 2
    lhs = body._minkowski(U + V) ** 2 + body._minkowski(U - V) ** 2
    return float(np.max(np.abs(lhs - 2 * nu - 2 * nv) / (2 * nu + 2 * nv)))


@dataclass
class EllipseCheck:
    residual: float
    gram: np.ndarray
    roots: list

    @property
    def definite(self):
        return bool(np.all(np.linalg.eigvalsh(self.gram) > 0))


def section_ellipse_check(body, e1, e2, points=64):
    """Fit a binary quadratic form to ``||u e1 + v e2||^2`` on the unit circle.

    Also returns the roots of ``q(u, 1)``; for an ellipse they form a complex
    conjugate pair.
    """
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    G = np.array([[e1 @ e1, e1 @ e2], [e2 @ e1, e2 @ e2]])
    if np.max(np.abs(G - np.eye(2))) > 1e-10:
        raise DomainError("plane basis must be orthonormal")
    C = circle_points(points)
    W = C @ np.vstack([e1, e2])
    fit = fit_homogeneous(C, body._minkowski(W) ** 2, 2)
    gram = quadratic_form_matrix(fit.poly)
    # q(u, 1) = g11 u^2 + 2 g12 u + g22
    roots = np.roots([gram[0, 0], 2 * gram[0, 1], gram[1, 1]]).tolist()
    return EllipseCheck(fit.residual, gram, roots)


# ---------------------------------------------------------------------------
# full pipeline


@dataclass
class ReconstructionReport:
    verdict: str
    failing_stage: str = None
    stages: dict = field(default_factory=dict)
    quadric: QuadricFit = None
    matrix_error: float = None
    center_error: float = None
    boundary_distance: float = None

    def to_json(self):
        return {
            "verdict": self.verdict,
            "failing_stage": self.failing_stage,
            "stages": self.stages,
            "quadric": None if self.quadric is None else self.quadric.to_json(),
            "matrix_error": self.matrix_error,
            "center_error": self.center_error,
            "boundary_distance": self.boundary_distance,
        }


def reconstruct_ellipsoid(body, samples=LOW_DEGREE_SAMPLES, seed=0):
    """Run ``fit_P_Q -> minkowski_from_PQ -> boundary_quadric`` and compare with the truth."""
    report = ReconstructionReport("non-ellipsoid")
    pq = fit_P_Q(body, samples, seed)
    report.stages["fit_P_Q"] = {"residual_P": pq.residual_P, "residual_Q": pq.residual_Q,
                                "P": pq.P.to_json(), "Q": pq.Q.to_json()}
    if not pq.ok:
        report.failing_stage = "fit_P_Q"
        return report
    try:
        res = minkowski_from_PQ(body, pq.P, pq.Q, samples, seed + 1)
    except InconsistencyError as exc:
        report.stages["minkowski_from_PQ"] = {"error": str(exc)}
        report.failing_stage = "minkowski_from_PQ"
        return report
    report.stages["minkowski_from_PQ"] = {"residual": res}
    if res > IDENTITY_TOL:
        report.failing_stage = "minkowski_from_PQ"
        return report
    quad = boundary_quadric(pq.P, pq.Q, body, samples, seed + 2)
    report.quadric = quad
    report.stages["boundary_quadric"] = {"classification": quad.classification,
                                         "residual": quad.residual}
    if not quad.is_ellipsoid:
        report.failing_stage = "boundary_quadric"
        return report
    report.verdict = "ellipsoid"
    report.boundary_distance = quad.residual
    truth = ellipsoid_parameters(body)
    if truth is not None:
        M, c = truth
        report.matrix_error = float(np.linalg.norm(quad.shape - M) / np.linalg.norm(M))
        report.center_error = float(np.max(np.abs(quad.center - c)))
    return report
