"""Polynomial integrability verdicts and derivative-vanishing diagnostics."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from .fracderiv import derivative_at_zero
from .geometry import as_direction
from .sections import local_profile, section_profile
from .spheres import sphere_points

DEFAULT_TOL = 1e-7
NEGATIVE_CONTROL_TOL = 1e-3


@dataclass
class DegreeFit:
    """Outcome of fitting polynomials of degree 0..N_max to one profile.

    ``residuals[d]`` is the smallest relative sup-norm misfit achieved by the
    least-squares fits of degree <= d, so the curve is non-increasing.
    """

    min_degree: int
    residuals: list
    raw_residuals: list
    fit: object = None


def min_poly_degree(profile, N_max=10, tol=DEFAULT_TOL):
    """Smallest degree ``d <= N_max`` whose Chebyshev least-squares fit meets ``tol``."""
    if N_max >= profile.node_count - 2:
        raise ValueError("N_max must be smaller than node_count - 2")
    t, a = profile.nodes, profile.values
    scale = float(np.max(np.abs(a)))
    domain = [profile.chord.t_min, profile.chord.t_max]
    raw, best, fits = [], [], []
    for d in range(N_max + 1):
        f = Chebyshev.fit(t, a, d, domain=domain)
        r = float(np.max(np.abs(f(t) - a)) / scale) if scale > 0 else 0.0
        raw.append(r)
        fits.append(f)
        best.append(min(r, best[-1]) if best else r)
    hit = next((d for d, r in enumerate(best) if r <= tol), None)
    fit = None
    if hit is not None:
        # the degree-`hit` entry of `best` may come from a lower-degree fit
        fit = fits[int(np.argmin(raw[: hit + 1]))]
    return DegreeFit(hit, best, raw, fit)


def monomial_coefficients(fit):
    """Coefficients ``a_k`` of the fitted profile in powers of ``t``."""
    return fit.convert(kind=Polynomial, domain=[-1, 1], window=[-1, 1]).coef


@dataclass
class CoefficientField:
    k: int
    samples: list = field(default_factory=list)


@dataclass
class DirectionResult:
    xi: list
    min_degree: int
    residuals: list


@dataclass
class IntegrabilityVerdict:
    body: dict
    tol: float
    N_max: int
    per_direction: list
    global_N: int = None
    fields: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "body": self.body,
            "tol": self.tol,
            "N_max": self.N_max,
            "global_N": self.global_N,
            "per_direction": [
                {"xi": r.xi, "min_degree": r.min_degree, "residuals": r.residuals}
                for r in self.per_direction
            ],
            "coefficients": {
                str(k): [{"xi": xi, "a": a} for xi, a in f.samples] for k, f in self.fields.items()
            },
        }

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["direction", "xi", "degree", "residual", "min_degree"])
        for i, r in enumerate(self.per_direction):
            for d, res in enumerate(r.residuals):
                w.writerow([i, " ".join(repr(x) for x in r.xi), d, repr(res),
                            "" if r.min_degree is None else r.min_degree])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def direction_set(dim, count, seed=0):
    """Deterministic direction set: Fibonacci sphere in R^3, seeded Sobol otherwise."""
    return sphere_points(dim, count, seed)


def integrability_report(body, directions=64, N_max=10, tol=DEFAULT_TOL, node_count=33,
                         method="auto", seed=0):
    """Per-direction minimal degrees and the global degree ``N`` (if every direction has one)."""
    if np.ndim(directions) == 0:
        directions = direction_set(body.dim, int(directions), seed)
    directions = [as_direction(x) for x in directions]
    if len(directions) < 8:
        raise ValueError("integrability report needs at least 8 directions")
    rows, coeffs = [], []
    for xi in directions:
        prof = section_profile(body, xi, node_count, method)
        fit = min_poly_degree(prof, N_max, tol)
        rows.append(DirectionResult(xi.tolist(), fit.min_degree, fit.residuals))
        coeffs.append(None if fit.fit is None else monomial_coefficients(fit.fit))
    verdict = IntegrabilityVerdict(body.to_json(), tol, N_max, rows)
    if all(r.min_degree is not None for r in rows):
        verdict.global_N = max(r.min_degree for r in rows)
        for k in range(verdict.global_N + 1):
            f = CoefficientField(k)
            for r, c in zip(rows, coeffs):
                f.samples.append((r.xi, float(c[k]) if k < c.size else 0.0))
            verdict.fields[k] = f
    return verdict


def derivative_vanishing_report(body, m_list, directions=64, node_count=33, method="auto",
                                seed=0):
    """``max_xi |A^{(m)}(0)|`` (paper convention) for each ``m`` in ``m_list``.

    Derivatives come from local profiles on half the chord, which stay
    accurate when the section function is singular at the chord ends.
    """
    if np.ndim(directions) == 0:
        directions = direction_set(body.dim, int(directions), seed)
    if any(m > 6 for m in m_list):
        raise ValueError("derivative orders above 6 are not supported")
    table = {m: {"max": 0.0, "xi": None} for m in m_list}
    for xi in directions:
        prof = local_profile(body, xi, node_count, 0.5, method)
        for m in m_list:
            v = abs(derivative_at_zero(prof, m).value)
            if table[m]["xi"] is None or v > table[m]["max"]:
                table[m] = {"max": v, "xi": as_direction(xi).tolist()}
    return table
