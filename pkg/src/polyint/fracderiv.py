r"""Integer and fractional derivatives of section profiles at ``t = 0``.

The fractional derivative of order ``q`` (``q > -1``, not an integer) is the
pairing of ``h`` with ``t_+^{-1-q} / Gamma(-q)``; with ``m > q`` Taylor terms

.. math::

    h^{(q)}(0) = \frac{1}{\Gamma(-q)} \Big[ \int_0^1 t^{-1-q}
        \big(h(t) - \sum_{k<m} h_k t^k / k!\big)\,dt
        + \int_1^\infty t^{-1-q} h(t)\,dt
        + \sum_{k<m} \frac{h_k}{k!\,(k-q)} \Big]

where ``h_k`` are ordinary derivatives at 0.  At integer ``q = k`` the value
is ``(-1)^k h_k``; every public value in this module uses that sign
convention, and :class:`DerivativeReport` also carries the ordinary derivative.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import NearIntegerOrderError, RangeError, ResolutionError

MAX_ORDER = 8
INTEGER_GUARD = 1e-6
QUAD_TOL = 1e-10
CHOP = 64 * np.finfo(float).eps


@dataclass
class DerivativeReport:
    """One derivative value at 0 (paper sign convention) with provenance."""

    order: float
    value: float
    method: str
    error_estimate: float
    ordinary: float = None

    def row(self):
        return [self.order, self.value, self.error_estimate, self.method]


def _check_profile(h, k):
    if not h.span.t_min < 0 < h.span.t_max:
        raise RangeError("profile interval must contain 0 in its interior")
    if k > MAX_ORDER:
        raise ResolutionError(f"derivative order {k} exceeds the supported maximum {MAX_ORDER}")
    if k > (h.node_count - 1) // 2:
        raise ResolutionError(f"order {k} needs at least {2 * k + 1} profile nodes, "
                              f"profile has {h.node_count}")


def chopped(h):
    """Interpolant with the trailing rounding-level coefficients removed.

    Differentiation amplifies coefficient ``j`` by roughly ``j^(2k)``, so
    coefficients at the noise floor would otherwise dominate high-order
    derivatives of (near-)polynomial profiles.
    """
    series = h.interpolant()
    coef = series.coef
    big = np.flatnonzero(np.abs(coef) > CHOP * np.max(np.abs(coef)))
    keep = big[-1] + 1 if big.size else 1
    out = series.copy()
    out.coef = coef[:keep].copy()
    return out


def _spectral_derivative(h, k):
    full = h.interpolant()
    series = chopped(h)
    value = float(series.deriv(k)(0.0)) if k else float(series(0.0))
    coef = full.coef
    cut = max(3 * coef.size // 4, k + 1)
    tail = full.copy()
    tail.coef = np.where((np.arange(coef.size) >= cut) & (np.arange(coef.size) < series.coef.size),
                         np.abs(coef), 0.0)
    est = abs(float(tail.deriv(k)(0.0))) if k else float(np.sum(tail.coef))
    scale = np.max(np.abs(h.values)) * (2.0 / h.span.length) ** k
    return value, est + CHOP * scale


def _central_difference(f, k, step):
    offsets = np.arange(k + 1) - k / 2.0
    weights = np.array([(-1) ** j * math.comb(k, j) for j in range(k + 1)])[::-1]
    return float(weights @ f(offsets * step)) / step**k


def _richardson_derivative(h, k, levels=4):
    reach = min(-h.span.t_min, h.span.t_max)
    step = 0.8 * reach / max(k, 1)
    f = h.interpolant()
    table = [[_central_difference(f, k, step / 2**i)] for i in range(levels)]
    for j in range(1, levels):
        for i in range(j, levels):
            prev, cur = table[i - 1][j - 1], table[i][j - 1]
            table[i].append(cur + (cur - prev) / (4**j - 1))
    best = table[-1][-1]
    est = abs(best - table[-1][-2])
    return best, est


def derivative_at_zero(h, k, method="spectral"):
    """Ordinary and paper-convention derivative of order ``k`` of a profile at 0.

    ``method="spectral"`` differentiates the Chebyshev interpolant exactly;
    ``method="finite-difference"`` applies Richardson-extrapolated central
    differences to the interpolant.  ``value`` is ``(-1)**k`` times the
    ordinary derivative.
    """
    k = int(k)
    if k < 0:
        raise ValueError("order must be non-negative")
    _check_profile(h, k)
    if method == "spectral":
        d, est = _spectral_derivative(h, k)
    elif method == "finite-difference":
        d, est = _richardson_derivative(h, k) if k else (float(h.interpolant()(0.0)), 0.0)
    else:
        raise ValueError("method must be 'spectral' or 'finite-difference'")
    return DerivativeReport(k, (-1) ** k * d, method, est, ordinary=d)


def _taylor(h, count):
    series = chopped(h)
    return np.array([float(series.deriv(j)(0.0)) if j else float(series(0.0))
                     for j in range(count)])


def fractional_derivative_at_zero(h, q, taylor_terms=None):
    """Fractional derivative of order ``q`` (real, ``q > -1``, non-integer) at 0."""
    q = float(q)
    if q <= -1:
        raise RangeError("fractional order must exceed -1")
    if h.local:
        raise ValueError("fractional derivatives need a full-chord profile")
    if abs(q - round(q)) < INTEGER_GUARD:
        raise NearIntegerOrderError(
            f"order {q} is within {INTEGER_GUARD} of an integer; use fractional_limit_check "
            "or derivative_at_zero")
    available = min(MAX_ORDER, (h.node_count - 1) // 2)
    m = math.ceil(q) + 1 if taylor_terms is None else int(taylor_terms)
    m = max(1, min(m, available))
    if q >= m:
        raise ResolutionError(f"order {q} needs more than {available} Taylor terms")
    _check_profile(h, m - 1)

    # extra terms keep the remainder accurate near 0 where subtraction cancels
    n_series = min(h.node_count, m + 16)
    d = _taylor(h, n_series)
    fact = np.array([math.factorial(j) for j in range(n_series)], dtype=float)
    series = h.interpolant()
    t_max = h.chord.t_max
    upper = min(1.0, t_max)
    split = 0.05 * upper

    def remainder(t):
        if t < split:
            j = np.arange(m, n_series)
            return float(np.sum(d[j] * t ** j / fact[j]))
        return float(series(t)) - float(np.sum(d[:m] * t ** np.arange(m) / fact[:m]))

    def integrand(t):
        return t ** (-1.0 - q) * remainder(t)

    i1, e1 = integrate.quad(integrand, 0.0, split, epsabs=QUAD_TOL, epsrel=1e-12, limit=200)
    i2, e2 = integrate.quad(integrand, split, upper, epsabs=QUAD_TOL, epsrel=1e-12, limit=200)
    regular = i1 + i2
    err = e1 + e2
    if t_max < 1.0:
        # h vanishes on (t_max, 1]: integrate -Taylor * t^{-1-q} in closed form
        j = np.arange(m)
        regular -= float(np.sum(d[:m] / fact[:m] * (1.0 - t_max ** (j - q)) / (j - q)))
        tail = 0.0
    else:
        tail, e3 = integrate.quad(lambda t: t ** (-1.0 - q) * float(series(t)), 1.0, t_max,
                                  epsabs=QUAD_TOL, epsrel=1e-12, limit=200)
        err += e3
    j = np.arange(m)
    correction = float(np.sum(d[:m] / (fact[:m] * (j - q))))
    rg = special.rgamma(-q)
    value = rg * (regular + tail + correction)
    return DerivativeReport(q, float(value), "regularized-integral", float(abs(rg) * err))


@dataclass
class LimitCheck:
    """Approach of ``h^{(k +- delta)}(0)`` to the integer-order value."""

    k: int
    reference: float
    deviations: dict = field(default_factory=dict)
    central: dict = field(default_factory=dict)

    @property
    def residual(self):
        """Max one-sided deviation at the smallest delta."""
        return self.deviations[min(self.deviations)]

    @property
    def shrinking(self):
        ds = sorted(self.deviations, reverse=True)
        return all(self.deviations[b] < self.deviations[a] for a, b in zip(ds, ds[1:]))


def fractional_limit_check(h, k, deltas=(1e-2, 1e-3)):
    """Compare ``h^{(k +- delta)}(0)`` with the integer value ``(-1)^k h^{(k)}(0)``.

    ``deviations[delta]`` is the larger of the two one-sided deviations;
    ``central[delta]`` is the deviation of their average, which cancels the
    first-order term of the (smooth) dependence on the order.
    """
    k = int(k)
    if k > 6:
        raise ResolutionError("limit check supports k <= 6")
    ref = derivative_at_zero(h, k).value
    out = LimitCheck(k, ref)
    for delta in deltas:
        up = fractional_derivative_at_zero(h, k + delta).value
        down = fractional_derivative_at_zero(h, k - delta).value
        out.deviations[delta] = max(abs(up - ref), abs(down - ref))
        out.central[delta] = abs(0.5 * (up + down) - ref)
    return out


def derivative_sweep(h, orders):
    """Reports for a list of orders, integer orders via :func:`derivative_at_zero`."""
    out = []
    for q in orders:
        if abs(q - round(q)) < INTEGER_GUARD:
            out.append(derivative_at_zero(h, int(round(q))))
        else:
            out.append(fractional_derivative_at_zero(h, q))
    return out


def sweep_to_csv(reports, path=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "value", "error_estimate", "method"])
    for r in reports:
        w.writerow([repr(float(r.order)), repr(float(r.value)), repr(float(r.error_estimate)),
                    r.method])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
