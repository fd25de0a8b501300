"""Pure NumPy implementations of the ray kernels.

These mirror ``_kernels.pyx`` function for function and are used when the
compiled extension is unavailable (or ``POLYINT_PURE_PYTHON=1``).
"""

import numpy as np

_BISECT_STEPS = 4
_MAXITER = 100


def _lp_norm_and_slope(b, d, r, p):
    y = b + r[:, None] * d
    s = np.sum(y**p, axis=1)
    norm = s ** (1.0 / p)
    slope = np.sum(y ** (p - 1) * d, axis=1) / norm ** (p - 1)
    return norm, slope


def lp_ray_lengths(base, dirs, p, tol=1e-12):
    """Solve ``||b + r d||_p = 1`` for ``r > 0`` row by row.

    ``base`` is (m, n) or (1, n) and must lie strictly inside the unit
    l_p ball; rows violating that come back as NaN. ``p`` is an even integer.
    """
    base = np.ascontiguousarray(base, dtype=float)
    dirs = np.ascontiguousarray(dirs, dtype=float)
    m = dirs.shape[0]
    b = np.broadcast_to(base, dirs.shape)
    p = int(p)

    bnorm = np.sum(b**p, axis=1) ** (1.0 / p)
    dnorm = np.sum(dirs**p, axis=1) ** (1.0 / p)
    bad = (bnorm >= 1.0) | (dnorm == 0.0)
    dnorm = np.where(bad, 1.0, dnorm)
    # triangle inequality brackets the root
    lo = (1.0 - bnorm) / dnorm
    hi = (1.0 + bnorm) / dnorm
    lo = np.where(bad, 0.0, lo)
    hi = np.where(bad, 1.0, hi)

    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        g, _s = _lp_norm_and_slope(b, dirs, mid, p)
        above = g > 1.0
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)

    r = hi.copy()
    active = ~bad
    for _ in range(_MAXITER):
        if not active.any():
            break
        g, slope = _lp_norm_and_slope(b, dirs, r, p)
        g = g - 1.0
        hi = np.where(active & (g > 0), r, hi)
        lo = np.where(active & (g <= 0), r, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(slope > 0, g / slope, np.inf)
        new = r - step
        done = np.abs(step) <= tol * np.abs(r)
        outside = ~((new > lo) & (new < hi)) & ~done
        new = np.where(outside, 0.5 * (lo + hi), new)
        r = np.where(active, new, r)
        active &= ~done
    out = np.where(bad, np.nan, r)
    return out.reshape(m)


def lp_section_sums(centers, thetas, weights, p, power, tol=1e-12):
    """Return ``sum_j w_j rho_j**power`` for each center row.

    ``rho_j`` is the distance from the center to the unit l_p sphere along
    ``thetas[j]``.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    thetas = np.asarray(thetas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    out = np.empty(centers.shape[0])
    for i, c in enumerate(centers):
        rho = lp_ray_lengths(c[None, :], thetas, p, tol)
        out[i] = np.dot(weights, rho**power)
    return out
