# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled ray kernels for l_p (superellipsoid) bodies.

Same contract as ``polyint._fallback``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, NAN

cnp.import_array()

cdef enum:
    BISECT_STEPS = 4
    MAXITER = 100


cdef inline double _ipow(double x, int k) nogil:
    cdef double r = 1.0
    while k > 0:
        if k & 1:
            r *= x
        x *= x
        k >>= 1
    return r


cdef inline double _norm(const double* b, const double* d, double r,
                         Py_ssize_t n, int p, double* slope) nogil:
    cdef Py_ssize_t i
    cdef double y, s = 0.0, g = 0.0, nrm
    for i in range(n):
        y = b[i] + r * d[i]
        s += _ipow(y, p)
        g += _ipow(y, p - 1) * d[i]
    nrm = pow(s, 1.0 / p)
    slope[0] = g / _ipow(nrm, p - 1)
    return nrm


cdef double _ray(const double* b, const double* d, Py_ssize_t n, int p,
                 double tol) nogil:
    cdef Py_ssize_t i
    cdef int it
    cdef double bs = 0.0, ds = 0.0, bnorm, dnorm, lo, hi, mid, r, g, slope, new
    for i in range(n):
        bs += _ipow(b[i], p)
        ds += _ipow(d[i], p)
    bnorm = pow(bs, 1.0 / p)
    dnorm = pow(ds, 1.0 / p)
    if bnorm >= 1.0 or dnorm == 0.0:
        return NAN
    lo = (1.0 - bnorm) / dnorm
    hi = (1.0 + bnorm) / dnorm
    for it in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if _norm(b, d, mid, n, p, &slope) > 1.0:
            hi = mid
        else:
            lo = mid
    r = hi
    for it in range(MAXITER):
        g = _norm(b, d, r, n, p, &slope) - 1.0
        if g > 0:
            hi = r
        else:
            lo = r
        new = lo
        if slope > 0:
            new = r - g / slope
            if fabs(new - r) <= tol * fabs(r):
                return new
        if not (new > lo and new < hi):
            new = 0.5 * (lo + hi)
        r = new
    return r


def lp_ray_lengths(base, dirs, int p, double tol=1e-12):
    cdef cnp.ndarray[double, ndim=2, mode="c"] B = np.ascontiguousarray(np.atleast_2d(base), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] D = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef Py_ssize_t m = D.shape[0], n = D.shape[1], j
    cdef bint shared = B.shape[0] == 1
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m)
    cdef double* bp = &B[0, 0]
    cdef double* dp = &D[0, 0]
    with nogil:
        for j in range(m):
            out[j] = _ray(bp if shared else bp + j * n, dp + j * n, n, p, tol)
    return out


def lp_section_sums(centers, thetas, weights, int p, int power, double tol=1e-12):
    cdef cnp.ndarray[double, ndim=2, mode="c"] C = np.ascontiguousarray(np.atleast_2d(centers), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] T = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] W = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t nc = C.shape[0], m = T.shape[0], n = T.shape[1], i, j
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nc)
    cdef double acc, rho
    with nogil:
        for i in range(nc):
            acc = 0.0
            for j in range(m):
                rho = _ray(&C[i, 0], &T[j, 0], n, p, tol)
                acc += W[j] * _ipow(rho, power)
            out[i] = acc
    return out
