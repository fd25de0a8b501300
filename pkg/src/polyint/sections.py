"""Parallel section functions ``A_{K,xi}(t)``, profiles, half-volumes and volume."""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.fft import dct

from . import _backend
from .errors import RangeError, UnsupportedOperation
from .geometry import (
    Chord,
    Ellipsoid,
    Shifted,
    Superellipsoid,
    as_direction,
    chord,
    contact_point,
    orthonormal_frame,
)
from .spheres import sphere_points, sphere_rule, unit_ball_volume

ENDPOINT_FRACTION = 1e-8
RANGE_FRACTION = 1e-9
METHODS = ("auto", "closed", "quadrature")


def default_rule(dim):
    """Quadrature on the (dim-2)-sphere used for sections of a body in R^dim."""
    return sphere_rule(dim - 1)


def section_area(body, xi, t, method="auto", frame=None, rule=None, strict=False):
    """(n-1)-volume of ``K ∩ {(x, xi) = t}``.

    Parameters
    ----------
    method : {"auto", "closed", "quadrature"}
        ``"auto"`` uses the closed form for balls and ellipsoids and polar
        quadrature otherwise; ``"quadrature"`` forces the generic path.
    frame : (n, n-1) array, optional
        Orthonormal basis of the hyperplane; defaults to the Householder frame.
    rule : SphereRule, optional
        Quadrature on S^{n-2}.
    strict : bool
        Raise :class:`RangeError` for ``t`` outside the chord instead of returning 0.
    """
    return float(section_areas(body, xi, [t], method, frame, rule, strict)[0])


def section_areas(body, xi, ts, method="auto", frame=None, rule=None, strict=False):
    """Vectorised :func:`section_area` over an array of offsets."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    xi = as_direction(xi)
    body._check_dim(xi.size)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    ch = chord(body, xi)
    if strict:
        slack = RANGE_FRACTION * ch.length
        bad = (ts < ch.t_min - slack) | (ts > ch.t_max + slack)
        if bad.any():
            raise RangeError(f"t={ts[bad][0]!r} outside chord [{ch.t_min}, {ch.t_max}]")
    return _areas(body, xi, ts, method, frame, rule)


def _areas(body, xi, ts, method, frame, rule):
    if isinstance(body, Shifted):
        return _areas(body.inner, xi, ts - float(body.offset @ xi), method, frame, rule)
    if isinstance(body, Ellipsoid) and method in ("auto", "closed"):
        return _ellipsoid_areas(body, xi, ts)
    if method == "closed":
        raise UnsupportedOperation(f"no closed-form sections for {body.label}")
    return _quadrature_areas(body, xi, ts, frame, rule)


def _ellipsoid_areas(body, xi, ts):
    n = body.dim
    h = np.sqrt(xi @ body._inv @ xi)
    s = ts - float(body.center @ xi)
    inside = np.clip(h * h - s * s, 0.0, None)
    const = unit_ball_volume(n - 1) / np.sqrt(np.linalg.det(body.matrix)) / h**n
    return const * inside ** ((n - 1) / 2)


def _quadrature_areas(body, xi, ts, frame, rule):
    if not body.convex:
        raise UnsupportedOperation(f"section quadrature needs a convex body, got {body.label}")
    n = body.dim
    ch = chord(body, xi)
    F = orthonormal_frame(xi) if frame is None else np.asarray(frame, dtype=float)
    rule = default_rule(n) if rule is None else rule
    thetas = rule.points @ F.T
    # polar centres on the segment joining the two contact points: it meets every
    # section and stays inside K
    lo_pt = contact_point(body, -xi)
    hi_pt = contact_point(body, xi)
    out = np.zeros(ts.size)
    tol = ENDPOINT_FRACTION * ch.length
    live = (ts > ch.t_min + tol) & (ts < ch.t_max - tol)
    if not live.any():
        return out
    lam = (ts[live] - ch.t_min) / ch.length
    centres = lo_pt[None, :] + lam[:, None] * (hi_pt - lo_pt)[None, :]
    if isinstance(body, Superellipsoid):
        sums = _backend.lp_section_sums(centres, thetas, rule.weights, body.p, n - 1)
    else:
        sums = np.array([rule.weights @ body._ray(c[None, :], thetas) ** (n - 1) for c in centres])
    out[live] = sums / (n - 1)
    return out


# ---------------------------------------------------------------------------
# profiles


def lobatto_nodes(chord_, count):
    """Chebyshev-Lobatto points of the chord, ascending, endpoints included."""
    j = np.arange(count)
    mid = 0.5 * (chord_.t_min + chord_.t_max)
    half = 0.5 * chord_.length
    nodes = mid - half * np.cos(np.pi * j / (count - 1))
    nodes[0], nodes[-1] = chord_.t_min, chord_.t_max
    return nodes


def lobatto_coefficients(values):
    """Chebyshev coefficients of the interpolant through values at ascending Lobatto nodes."""
    f = np.asarray(values, dtype=float)[::-1]  # order of cos(pi j / N) descending
    N = f.size - 1
    c = dct(f, type=1) / N
    c[0] /= 2
    c[-1] /= 2
    return c


@dataclass
class SectionProfile:
    """Samples of ``A_{K,xi}`` at Chebyshev-Lobatto nodes of the chord."""

    direction: np.ndarray
    chord: Chord
    nodes: np.ndarray
    values: np.ndarray
    body_dim: int
    meta: dict = field(default_factory=dict)
    window: Chord = None

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("profile needs at least two nodes")
        self._interp = None

    @property
    def node_count(self):
        return len(self.nodes)

    @property
    def span(self):
        """Sampled interval: the window for local profiles, else the chord."""
        return self.chord if self.window is None else self.window

    @property
    def local(self):
        return self.window is not None

    def interpolant(self):
        """Chebyshev series of the Lobatto interpolant, on the sampled interval."""
        if self._interp is None:
            self._interp = Chebyshev(lobatto_coefficients(self.values),
                                     domain=[self.span.t_min, self.span.t_max])
        return self._interp

    def __call__(self, t):
        """Interpolated profile, zero outside the chord (NaN outside a local window)."""
        t = np.asarray(t, dtype=float)
        inside = (t >= self.chord.t_min) & (t <= self.chord.t_max)
        out = np.where(inside, self.interpolant()(t), 0.0)
        if self.local:
            out = np.where((t < self.span.t_min) | (t > self.span.t_max), np.nan, out)
        return out

    def linear_combination(self, a, other, b):
        """Profile of ``a * self + b * other``; both must share nodes."""
        if self.span != other.span or not np.array_equal(self.nodes, other.nodes):
            raise ValueError("profiles must share chord and nodes")
        chord_ = Chord(min(self.chord.t_min, other.chord.t_min),
                       max(self.chord.t_max, other.chord.t_max))
        return SectionProfile(self.direction, chord_, self.nodes,
                              a * self.values + b * other.values, self.body_dim,
                              {"combination": [a, b]}, self.window)

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "A"])
        for t, a in zip(self.nodes, self.values):
            w.writerow([repr(float(t)), repr(float(a))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_json(self):
        return {
            "direction": self.direction.tolist(),
            "chord": [self.chord.t_min, self.chord.t_max],
            "window": None if self.window is None else [self.window.t_min, self.window.t_max],
            "body_dim": self.body_dim,
            "nodes": self.nodes.tolist(),
            "values": self.values.tolist(),
            **self.meta,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


def section_profile(body, xi, node_count=33, method="auto", rule=None):
    """Sample ``A_{K,xi}`` on ``node_count`` Chebyshev-Lobatto nodes of the chord."""
    if node_count < 16:
        raise ValueError("node_count must be at least 16")
    xi = as_direction(xi)
    ch = chord(body, xi)
    nodes = lobatto_nodes(ch, node_count)
    rule_used = default_rule(body.dim) if rule is None else rule
    values = section_areas(body, xi, nodes, method=method, rule=rule_used)
    values[0] = values[-1] = 0.0
    meta = {"body": body.to_json(), "method": method,
            "quadrature": rule_used.settings, "node_count": node_count}
    return SectionProfile(xi, ch, nodes, values, body.dim, meta)


def local_profile(body, xi, node_count=33, fraction=0.5, method="auto", rule=None):
    """Profile sampled on ``fraction`` times the chord, around ``t = 0``.

    Section functions are typically singular only at the chord ends, so a
    window away from them gives geometrically convergent derivatives at 0
    even when the full-chord interpolant converges slowly (e.g. the disk).
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    if node_count < 16:
        raise ValueError("node_count must be at least 16")
    xi = as_direction(xi)
    ch = chord(body, xi)
    if not ch.t_min < 0 < ch.t_max:
        raise RangeError("origin must be interior to the chord")
    win = Chord(fraction * ch.t_min, fraction * ch.t_max)
    nodes = lobatto_nodes(win, node_count)
    rule_used = default_rule(body.dim) if rule is None else rule
    values = section_areas(body, xi, nodes, method=method, rule=rule_used)
    meta = {"body": body.to_json(), "method": method,
            "quadrature": rule_used.settings, "node_count": node_count, "fraction": fraction}
    return SectionProfile(xi, ch, nodes, values, body.dim, meta, win)


def half_volume(body, xi, t, side="+", node_count=65, method="auto", profile=None):
    """Volume of ``K ∩ {(x, xi) >= t}`` (side "+") or ``<= t`` (side "-").

    Integrates the Chebyshev interpolant of the profile exactly.
    """
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    if profile is None:
        profile = section_profile(body, xi, node_count, method)
    if profile.local:
        raise ValueError("half-volume needs a full-chord profile")
    ch = profile.chord
    t = min(max(float(t), ch.t_min), ch.t_max)
    F = profile.interpolant().integ(lbnd=ch.t_min)
    if side == "+":
        return float(F(ch.t_max) - F(t))
    return float(F(t))


@dataclass
class VolumeResult:
    value: float
    spread: float
    per_direction: list
    consistent: bool


def volume_directions(dim, count=8):
    """Fixed direction set used for volume consistency (generic, no zero coordinates)."""
    if dim == 2:
        a = 0.3 + 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(a), np.sin(a)])
    return sphere_points(dim, count, seed=11)


def volume(body, n_directions=8, node_count=129, method="auto", spread_tol=1e-6):
    """Volume as the integral of the profile, averaged over a fixed direction set.

    ``spread`` is the relative max-min spread across directions; ``consistent``
    is False when it exceeds ``spread_tol``.
    """
    vals = []
    for xi in volume_directions(body.dim, n_directions):
        prof = section_profile(body, xi, node_count, method)
        vals.append(half_volume(body, xi, prof.chord.t_min, "+", profile=prof))
    vals = np.array(vals)
    mean = float(vals.mean())
    spread = float((vals.max() - vals.min()) / abs(mean))
    return VolumeResult(mean, spread, vals.tolist(), spread <= spread_tol)


def concavity_defect(profile):
    """Largest violation of concavity of ``A^{1/(n-1)}`` over consecutive node triples.

    Zero for convex bodies (Brunn's principle); positive values measure how
    far the sampled profile is from that.
    """
    n = profile.body_dim
    t = profile.nodes
    g = np.clip(profile.values, 0.0, None) ** (1.0 / (n - 1))
    # second divided differences are <= 0 for concave functions
    d1 = np.diff(g) / np.diff(t)
    d2 = np.diff(d1) / (0.5 * (t[2:] - t[:-2]))
    return float(max(np.max(d2), 0.0))
