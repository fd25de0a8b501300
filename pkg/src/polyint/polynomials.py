"""Multivariate polynomials with real coefficients.

Polynomials are stored as a mapping ``multi-index -> coefficient`` covering
every index of total degree up to the polynomial's degree that has a
non-zero coefficient.  Serialised term order is graded lexicographic.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DomainError, NumericError

MAX_CONDITION = 1e10


def monomial_exponents(dim, degree):
    """Exponent tuples with ``|alpha| = degree`` in graded-lex order (x1 highest first)."""
    out = []
    for combo in itertools.combinations_with_replacement(range(dim), degree):
        alpha = [0] * dim
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return sorted(set(out), key=_grlex_key)


def _grlex_key(alpha):
    return (sum(alpha), tuple(-a for a in alpha))


def monomial_matrix(points, exponents):
    """Values of the monomials ``x**alpha`` at the rows of ``points``."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    exponents = list(exponents)
    if not exponents:
        return np.zeros((X.shape[0], 0))
    dmax = max(max(a) for a in exponents)
    # power table: pw[k, :, i] = X[:, i]**k
    pw = np.ones((dmax + 1,) + X.shape)
    for k in range(1, dmax + 1):
        pw[k] = pw[k - 1] * X
    cols = np.ones((X.shape[0], len(exponents)))
    for j, alpha in enumerate(exponents):
        for i, a in enumerate(alpha):
            if a:
                cols[:, j] *= pw[a, :, i]
    return cols


class MultiPoly:
    """Polynomial in ``dim`` variables.

    >>> p = MultiPoly.from_terms(2, {(2, 0): 1.0, (0, 2): 4.0})
    >>> p([1.0, 1.0])
    5.0
    """

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim, coeffs=None):
        self.dim = int(dim)
        clean = {}
        for alpha, c in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.dim or min(alpha) < 0:
                raise DomainError(f"bad multi-index {alpha} for dim {self.dim}")
            c = float(c)
            if not math.isfinite(c):
                raise NumericError(f"non-finite coefficient at {alpha}")
            if c != 0.0:
                clean[alpha] = clean.get(alpha, 0.0) + c
        self.coeffs = clean

    @classmethod
    def from_terms(cls, dim, terms):
        return cls(dim, terms)

    @classmethod
    def zero(cls, dim):
        return cls(dim)

    @classmethod
    def variable(cls, dim, i):
        alpha = [0] * dim
        alpha[i] = 1
        return cls(dim, {tuple(alpha): 1.0})

    @classmethod
    def constant(cls, dim, c):
        return cls(dim, {(0,) * dim: c})

    @property
    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(a) for a in self.coeffs), default=-1)

    def is_zero(self):
        return not self.coeffs

    def is_homogeneous(self):
        return len({sum(a) for a in self.coeffs}) <= 1

    def coefficient(self, alpha):
        return self.coeffs.get(tuple(alpha), 0.0)

    def terms(self):
        """``(alpha, c)`` pairs in graded-lex order."""
        return [(a, self.coeffs[a]) for a in sorted(self.coeffs, key=_grlex_key)]

    def dense(self, degree=None):
        """Coefficient vector over all monomials of total degree ``degree`` (homogeneous part)."""
        degree = self.degree if degree is None else degree
        exps = monomial_exponents(self.dim, degree)
        return np.array([self.coefficient(a) for a in exps])

    def homogeneous_part(self, degree):
        return MultiPoly(self.dim, {a: c for a, c in self.coeffs.items() if sum(a) == degree})

    def __call__(self, x):
        return evaluate(self, x)

    def _check(self, other):
        if other.dim != self.dim:
            raise DomainError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.dim, other)
        self._check(other)
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0.0) + c
        return MultiPoly(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.dim, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return MultiPoly(self.dim, {a: c * other for a, c in self.coeffs.items()})
        self._check(other)
        out = {}
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = out.get(k, 0.0) + ca * cb
        return MultiPoly(self.dim, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            raise DomainError("negative powers are not polynomials")
        result = MultiPoly.constant(self.dim, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def allclose(self, other, atol=1e-12):
        self._check(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coefficient(a) - other.coefficient(a)) <= atol for a in keys)

    def max_coeff_diff(self, other):
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self.coefficient(a) - other.coefficient(a)) for a in keys), default=0.0)

    def to_json(self):
        return {"dim": self.dim, "terms": [{"alpha": list(a), "c": c} for a, c in self.terms()]}

    @classmethod
    def from_json(cls, d):
        return cls(d["dim"], {tuple(t["alpha"]): t["c"] for t in d["terms"]})

    def __repr__(self):
        if not self.coeffs:
            return f"MultiPoly(dim={self.dim}, 0)"
        parts = []
        for a, c in self.terms():
            mono = "*".join(f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(a) if e)
            parts.append(f"{c:+.6g}" + ("*" + mono if mono else ""))
        return f"MultiPoly(dim={self.dim}, {' '.join(parts)})"


def evaluate(p, x):
    """Evaluate ``p`` at a point (shape (n,)) or at the rows of an (m, n) array."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != p.dim:
        raise DomainError(f"dimension mismatch: polynomial in {p.dim} variables, point has {X.shape[1]}")
    if p.is_zero():
        out = np.zeros(X.shape[0])
    else:
        exps, cs = zip(*p.terms())
        out = monomial_matrix(X, exps) @ np.array(cs)
    return float(out[0]) if single else out


def compose_linear(p, L):
    """``q(y) = p(L y)`` for an (n, m) matrix ``L``; returns a polynomial in ``m`` variables."""
    L = np.asarray(L, dtype=float)
    n, m = L.shape
    if n != p.dim:
        raise DomainError("substitution matrix does not match polynomial dimension")
    lin = [MultiPoly(m, {tuple(int(j == k) for j in range(m)): L[i, k] for k in range(m)})
           for i in range(n)]
    cache = {}
    out = MultiPoly.zero(m)
    for alpha, c in p.coeffs.items():
        term = MultiPoly.constant(m, c)
        for i, e in enumerate(alpha):
            if e:
                if (i, e) not in cache:
                    cache[(i, e)] = lin[i] ** e
                term = term * cache[(i, e)]
        out = out + term
    return out


def restrict_to_plane(p, e1, e2, tol=1e-10):
    """Restriction ``q(u, v) = p(u e1 + v e2)`` to the plane spanned by orthonormal ``e1, e2``."""
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    G = np.array([[e1 @ e1, e1 @ e2], [e2 @ e1, e2 @ e2]])
    if np.max(np.abs(G - np.eye(2))) > tol:
        raise DomainError("plane basis must be orthonormal")
    return compose_linear(p, np.column_stack([e1, e2]))


@dataclass
class FitResult:
    """Least-squares fit with its relative sup-norm residual and condition estimate."""

    poly: MultiPoly
    residual: float
    condition: float


def fit_homogeneous(points, values, degree, scale=None):
    """Fit a homogeneous polynomial of the given degree to samples on the unit sphere.

    Parameters
    ----------
    points : (m, n) array
        Sample locations, rows on the unit sphere.
    values : (m,) array
        Sampled function values.
    degree : int
        Total degree of the homogeneous fit.
    scale : float, optional
        Floor for the residual normalisation; the residual is
        ``max|misfit| / max(max|values|, scale)``.  Useful when the data is
        identically (near) zero.

    Raises
    ------
    ConditioningError
        If the monomial design matrix is numerically rank deficient.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(values, dtype=float)
    n = X.shape[1]
    exps = monomial_exponents(n, degree)
    if X.shape[0] < 2 * len(exps):
        raise ValueError(f"need at least {2 * len(exps)} samples for degree {degree} in {n} "
                         f"variables, got {X.shape[0]}")
    V = monomial_matrix(X, exps)
    coef, _, rank, sv = np.linalg.lstsq(V, y, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if rank < len(exps) or cond > MAX_CONDITION:
        raise ConditioningError("sample set does not determine a homogeneous fit", cond)
    misfit = np.max(np.abs(V @ coef - y))
    denom = max(float(np.max(np.abs(y))), scale or 0.0)
    residual = float(misfit / denom) if denom > 0 else float(misfit)
    return FitResult(MultiPoly(n, dict(zip(exps, coef))), residual, cond)


def sqrt_poly(q, points, degree=None):
    """Least-squares polynomial square root of a homogeneous ``q``.

    Matches ``S**2`` to ``q`` on the sample points by Gauss-Newton on the
    coefficients of ``S`` (degree ``deg q / 2``), started from a homogeneous fit
    to ``sqrt(max(q, 0))``.  Returns ``(S, residual)`` with the residual
    relative to ``max|q|``; odd degree gives ``(None, inf)``.
    """
    from scipy.optimize import least_squares

    d = q.degree if degree is None else degree
    if d < 0 or d % 2:
        return None, math.inf
    X = np.atleast_2d(points)
    qv = evaluate(q, X)
    exps = monomial_exponents(q.dim, d // 2)
    V = monomial_matrix(X, exps)
    scale = float(np.max(np.abs(qv))) or 1.0
    starts = [np.linalg.lstsq(V, np.sqrt(np.maximum(qv, 0.0)), rcond=None)[0]]
    if d == 2:
        # rank-one quadratic form: leading eigenvector
        G = _quadratic_form_matrix(q)
        w, U = np.linalg.eigh(G)
        starts.append(np.sqrt(max(w[-1], 0.0)) * U[:, -1])
        starts[-1] = np.array([starts[-1][list(a).index(1)] for a in exps])
    best = (None, math.inf)
    for s0 in starts:
        sol = least_squares(lambda c: ((V @ c) ** 2 - qv) / scale, s0,
                            jac=lambda c: 2.0 * (V @ c)[:, None] * V / scale, method="lm")
        res = float(np.max(np.abs((V @ sol.x) ** 2 - qv)) / scale)
        if res < best[1]:
            best = (MultiPoly(q.dim, dict(zip(exps, sol.x))), res)
    return best


def _quadratic_form_matrix(q):
    """Symmetric matrix G with ``q(x) = x^T G x`` for a homogeneous quadratic ``q``."""
    n = q.dim
    G = np.zeros((n, n))
    for alpha, c in q.coeffs.items():
        idx = [i for i, e in enumerate(alpha) for _ in range(e)]
        if len(idx) != 2:
            raise DomainError("polynomial is not a homogeneous quadratic")
        i, j = idx
        if i == j:
            G[i, i] += c
        else:
            G[i, j] += c / 2
            G[j, i] += c / 2
    return G


quadratic_form_matrix = _quadratic_form_matrix


def quadratic_form_poly(G):
    """Homogeneous quadratic ``x^T G x`` as a :class:`MultiPoly`."""
    G = np.asarray(G, dtype=float)
    n = G.shape[0]
    terms = {}
    for i in range(n):
        for j in range(n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            terms[tuple(alpha)] = terms.get(tuple(alpha), 0.0) + G[i, j]
    return MultiPoly(n, terms)


def linear_form_poly(b):
    b = np.asarray(b, dtype=float)
    n = b.size
    return MultiPoly(n, {tuple(int(j == i) for j in range(n)): b[i] for i in range(n)})


# ---------------------------------------------------------------------------
# univariate roots


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int


def roots_univariate(coeffs, cluster_radius=1e-6):
    """Complex roots of ``sum_k coeffs[k] u**k`` (ascending order) with multiplicities.

    Roots are eigenvalues of the companion matrix; eigenvalues closer than
    ``cluster_radius`` (single linkage) are merged into one root whose
    multiplicity is the cluster size.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0 or not np.any(c):
        raise DomainError("the zero polynomial has no finite root set")
    scale = np.max(np.abs(c))
    nz = np.nonzero(np.abs(c) > 1e-14 * scale)[0]
    c = c[: nz[-1] + 1]
    deg = c.size - 1
    if deg == 0:
        return []
    C = np.zeros((deg, deg))
    C[1:, :-1] = np.eye(deg - 1)
    C[:, -1] = -c[:-1] / c[-1]
    eig = np.linalg.eigvals(C)

    # single-linkage clustering
    labels = list(range(deg))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(deg):
        for j in range(i + 1, deg):
            if abs(eig[i] - eig[j]) < cluster_radius:
                labels[find(i)] = find(j)
    groups = {}
    for i in range(deg):
        groups.setdefault(find(i), []).append(eig[i])
    roots = []
    for members in groups.values():
        z = complex(np.mean(members))
        if abs(z.imag) < cluster_radius:
            z = complex(z.real, 0.0)
        roots.append(Root(z, len(members)))
    roots.sort(key=lambda r: (round(r.value.real, 8), r.value.imag))
    return roots


def expand_roots(roots):
    """Flat list with each root repeated by its multiplicity."""
    return [r.value for r in roots for _ in range(r.multiplicity)]
