"""Bodies, Minkowski functionals, support functions, chords and hyperplane frames.

Every body is described by its Minkowski functional
``||x||_K = min{a >= 0 : x in aK}``.  The shared primitive is the *ray
length*: for a base point ``b`` strictly inside ``K`` and a direction ``d``,
``ray(b, d)`` is the unique ``r > 0`` with ``||b + r d||_K = 1``.  The
Minkowski functional is ``1 / ray(0, x)`` and section radii are ray lengths
from a point inside the section.
"""

import json
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from . import _backend
from .errors import DomainError, GeometryError, PreconditionError, UnsupportedOperation

DIRECTION_TOL = 1e-14


class BodySpecError(ValueError):
    """Malformed JSON body description."""


def as_direction(v):
    """Return ``v`` normalised to a unit vector of dimension >= 2."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise DomainError(f"direction must be a vector of dimension >= 2, got shape {v.shape}")
    nrm = np.linalg.norm(v)
    if not np.isfinite(nrm) or nrm == 0.0:
        raise DomainError("direction must be a non-zero finite vector")
    return v / nrm


@dataclass(frozen=True)
class Chord:
    """Interval ``[t_min, t_max]`` of offsets with non-empty sections."""

    t_min: float
    t_max: float

    @property
    def length(self):
        return self.t_max - self.t_min

    def contains(self, t):
        return self.t_min <= t <= self.t_max


class Body:
    """Base class. Subclasses implement ``_ray`` and the closed forms they have."""

    dim: int
    convex = True
    symmetric = False

    def _ray(self, base, dirs):
        raise NotImplementedError

    def ray(self, base, dirs):
        """Ray lengths from ``base`` (shape (n,) or (m, n)) along rows of ``dirs``."""
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        base = np.atleast_2d(np.asarray(base, dtype=float))
        self._check_dim(dirs.shape[1])
        return self._ray(base, dirs)

    def _minkowski(self, x):
        return 1.0 / self._ray(np.zeros((1, self.dim)), x)

    def _support(self, xi):
        raise UnsupportedOperation(f"no support function for {self.label}")

    def _contact(self, xi):
        raise UnsupportedOperation(f"no contact point for {self.label}")

    def _check_dim(self, n):
        if n != self.dim:
            raise DomainError(f"dimension mismatch: body has dim {self.dim}, got {n}")

    @property
    def label(self):
        return json.dumps(self.to_json(), separators=(",", ":"))

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ellipsoid(Body):
    """``{x : (x - c)^T M (x - c) <= 1}``."""

    matrix: np.ndarray
    center: np.ndarray = None

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
            raise DomainError("ellipsoid matrix must be square with dimension >= 2")
        if not np.allclose(M, M.T, rtol=1e-12, atol=1e-14 * np.abs(M).max()):
            raise DomainError("ellipsoid matrix must be symmetric")
        M = 0.5 * (M + M.T)
        if np.linalg.eigvalsh(M)[0] <= 0:
            raise DomainError("ellipsoid matrix must be positive definite")
        c = np.zeros(M.shape[0]) if self.center is None else np.array(self.center, dtype=float)
        if c.shape != (M.shape[0],):
            raise DomainError("ellipsoid center has the wrong dimension")
        if c @ M @ c >= 1.0:
            raise DomainError("origin must lie strictly inside the ellipsoid")
        M.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "_inv", np.linalg.inv(M))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def centered(self):
        return not np.any(self.center)

    @property
    def symmetric(self):
        return self.centered

    def _ray(self, base, dirs):
        y = base - self.center
        M = self.matrix
        a2 = np.einsum("ij,jk,ik->i", dirs, M, dirs)
        My = y @ M
        a1 = np.sum(My * dirs, axis=1)
        a0 = np.sum(My * y, axis=1) - 1.0
        if np.any(a0 >= 0):
            raise GeometryError("ray base point is not interior to the ellipsoid")
        disc = np.sqrt(a1 * a1 - a2 * a0)
        # r = (-a1 + disc) / a2, rewritten to avoid cancellation when a1 > 0
        return np.where(a1 > 0, -a0 / (a1 + disc), (disc - a1) / a2)

    def _minkowski(self, x):
        if self.centered:
            return np.sqrt(np.einsum("ij,jk,ik->i", x, self.matrix, x))
        return super()._minkowski(x)

    def _support(self, xi):
        return float(np.sqrt(xi @ self._inv @ xi) + self.center @ xi)

    def _contact(self, xi):
        w = self._inv @ xi
        return self.center + w / np.sqrt(xi @ w)

    def to_json(self):
        d = {"type": "ellipsoid", "matrix": self.matrix.tolist()}
        if not self.centered:
            d["center"] = self.center.tolist()
        return d


class Ball(Ellipsoid):
    """Euclidean ball of the given radius centred at the origin."""

    def __init__(self, radius=1.0, dim=3):
        if not radius > 0:
            raise DomainError("ball radius must be positive")
        if int(dim) < 2:
            raise DomainError("ball dimension must be >= 2")
        object.__setattr__(self, "radius", float(radius))
        object.__setattr__(self, "matrix", np.eye(int(dim)) / float(radius) ** 2)
        object.__setattr__(self, "center", None)
        self.__post_init__()

    def __repr__(self):
        return f"Ball(radius={self.radius!r}, dim={self.dim})"

    def _minkowski(self, x):
        return np.linalg.norm(x, axis=1) / self.radius

    def _support(self, xi):
        return self.radius

    def _contact(self, xi):
        return self.radius * xi

    def to_json(self):
        return {"type": "ball", "radius": self.radius, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Superellipsoid(Body):
    """Unit ball of the l_p norm, ``p`` an even integer >= 4."""

    p: int
    n: int = 3
    symmetric = True

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 4 or self.p % 2:
            raise DomainError("superellipsoid exponent must be an even integer >= 4")
        if int(self.n) < 2:
            raise DomainError("superellipsoid dimension must be >= 2")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self):
        return self.n

    def _ray(self, base, dirs):
        r = _backend.lp_ray_lengths(base, dirs, self.p)
        if np.any(np.isnan(r)):
            raise GeometryError("ray base point is not interior to the l_p ball")
        return r

    def _minkowski(self, x):
        scale = np.max(np.abs(x), axis=1)
        safe = np.where(scale > 0, scale, 1.0)
        return scale * np.sum((x / safe[:, None]) ** self.p, axis=1) ** (1.0 / self.p)

    def _support(self, xi):
        # dual norm l_{p/(p-1)}
        q = self.p / (self.p - 1.0)
        return float(np.sum(np.abs(xi) ** q) ** (1.0 / q))

    def _contact(self, xi):
        x = np.sign(xi) * np.abs(xi) ** (1.0 / (self.p - 1))
        return x / np.sum(x**self.p) ** (1.0 / self.p)

    def to_json(self):
        return {"type": "superellipsoid", "p": self.p, "dim": self.n}


@dataclass(frozen=True, eq=False)
class Shifted(Body):
    """``inner + offset``; the origin must remain an interior point."""

    inner: Body
    offset: np.ndarray

    def __post_init__(self):
        d = np.array(self.offset, dtype=float)
        if d.shape != (self.inner.dim,):
            raise DomainError("offset has the wrong dimension")
        if np.any(d) and float(self.inner._minkowski(-d[None, :])[0]) >= 1.0:
            raise DomainError("origin must lie strictly inside the shifted body")
        d.setflags(write=False)
        object.__setattr__(self, "offset", d)

    @property
    def dim(self):
        return self.inner.dim

    @property
    def convex(self):
        return self.inner.convex

    @property
    def symmetric(self):
        return self.inner.symmetric and not np.any(self.offset)

    def _ray(self, base, dirs):
        return self.inner._ray(base - self.offset, dirs)

    def _support(self, xi):
        return self.inner._support(xi) + float(self.offset @ xi)

    def _contact(self, xi):
        return self.inner._contact(xi) + self.offset

    def to_json(self):
        return {"type": "shifted", "offset": self.offset.tolist(), "inner": self.inner.to_json()}


@dataclass(frozen=True, eq=False)
class ProductBody(Body):
    """Star body with ``||x||_L = sqrt(||x||_K ||-x||_K)``; origin-symmetric by construction."""

    inner: Body
    convex = False
    symmetric = True

    @property
    def dim(self):
        return self.inner.dim

    def _minkowski(self, x):
        return np.sqrt(self.inner._minkowski(x) * self.inner._minkowski(-x))

    def _ray(self, base, dirs):
        if not np.any(base):
            return 1.0 / self._minkowski(dirs)
        return _ray_by_bisection(self, base, dirs)

    def to_json(self):
        return {"type": "product", "inner": self.inner.to_json()}


def _ray_by_bisection(body, base, dirs, iters=80):
    """Ray lengths for bodies known only through their Minkowski functional."""
    b = np.broadcast_to(base, dirs.shape)
    if np.any(body._minkowski(b) >= 1.0):
        raise GeometryError("ray base point is not interior")
    lo = np.zeros(dirs.shape[0])
    hi = np.ones(dirs.shape[0])
    for _ in range(200):
        out = body._minkowski(b + hi[:, None] * dirs) < 1.0
        if not out.any():
            break
        hi = np.where(out, 2.0 * hi, hi)
    else:
        raise GeometryError("could not bracket ray length")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = body._minkowski(b + mid[:, None] * dirs) < 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# public operations


def minkowski(body, x):
    """Minkowski functional ``||x||_K``; ``x`` of shape (n,) or (m, n)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    body._check_dim(X.shape[1])
    if np.any(~np.any(X, axis=1)):
        raise DomainError("Minkowski functional is undefined at the zero vector")
    out = body._minkowski(X)
    return float(out[0]) if single else out


def radial(body, theta):
    """Radial function ``1 / ||theta||_K`` for unit ``theta``; boundary point is ``radial * theta``."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        return 1.0 / minkowski(body, as_direction(theta))
    theta = theta / np.linalg.norm(theta, axis=1, keepdims=True)
    return 1.0 / minkowski(body, theta)


def support(body, xi, method="auto"):
    """Support function ``h_K(xi) = max_{x in K} (x, xi)``.

    ``method="search"`` ignores closed forms and maximises the radial
    parametrisation numerically (coarse scan + golden-section refinement).
    """
    xi = as_direction(xi)
    body._check_dim(xi.size)
    if not body.convex:
        raise UnsupportedOperation(f"support function requires a convex body, got {body.label}")
    if method == "search":
        return support_search(body, xi)
    return float(body._support(xi))


def contact_point(body, xi):
    """Boundary point where ``(x, xi)`` attains the support value."""
    xi = as_direction(xi)
    body._check_dim(xi.size)
    if not body.convex:
        raise UnsupportedOperation(f"contact point requires a convex body, got {body.label}")
    return body._contact(xi)


def chord(body, xi):
    """``Chord(-h(-xi), h(xi))``."""
    xi = as_direction(xi)
    return Chord(-support(body, -xi), support(body, xi))


def orthonormal_frame(xi):
    """Orthonormal basis of ``xi``-perp as the columns of an (n, n-1) array.

    Built from the Householder reflection that sends ``e_1`` to ``-sign(xi_1) xi``;
    the sign choice keeps the reflection vector away from cancellation.
    """
    xi = as_direction(xi)
    v = xi.copy()
    v[0] += 1.0 if xi[0] >= 0 else -1.0
    H = np.eye(xi.size) - (2.0 / (v @ v)) * np.outer(v, v)
    return H[:, 1:]


def support_search(body, xi, coarse=2000, tol=1e-12, max_sweeps=200):
    """Numerical support value: scan the sphere, then refine by cyclic golden-section."""
    from .spheres import sphere_points

    xi = as_direction(xi)
    n = xi.size

    def value(theta):
        theta = np.atleast_2d(theta)
        theta = theta / np.linalg.norm(theta, axis=1, keepdims=True)
        return (1.0 / body._minkowski(theta)) * (theta @ xi)

    pts = sphere_points(n, coarse, seed=7)
    vals = value(pts)
    best = pts[np.argmax(vals)]
    fbest = float(vals.max())
    width = 0.2
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    for _ in range(max_sweeps):
        start = fbest
        tangents = orthonormal_frame(best).T
        for e in tangents:

            def along(a, best=best, e=e):
                return float(value(np.cos(a) * best + np.sin(a) * e)[0])

            lo, hi = -width, width
            c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
            fc, fd = along(c), along(d)
            while hi - lo > 1e-9:
                if fc > fd:
                    hi, d, fd = d, c, fc
                    c = hi - invphi * (hi - lo)
                    fc = along(c)
                else:
                    lo, c, fc = c, d, fd
                    d = lo + invphi * (hi - lo)
                    fd = along(d)
            a = 0.5 * (lo + hi)
            fa = along(a)
            if fa > fbest:
                best = np.cos(a) * best + np.sin(a) * e
                best /= np.linalg.norm(best)
                fbest = fa
        if fbest - start <= tol * abs(fbest):
            width *= 0.5
            if width < 1e-6:
                break
    return fbest


# ---------------------------------------------------------------------------
# construction helpers


def random_rotation(dim, rng):
    """Haar-distributed rotation (det +1)."""
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_ellipsoid(dim, rng, cond=10.0, center=None):
    """Centered (or shifted) ellipsoid whose matrix has condition number <= ``cond``."""
    R = random_rotation(dim, rng)
    eig = np.exp(rng.uniform(0.0, np.log(cond), dim))
    eig[0], eig[-1] = 1.0, cond
    return Ellipsoid(R @ np.diag(eig) @ R.T, center)


def rotate_body(body, R):
    """Image ``R K`` of an ellipsoidal body (ball, ellipsoid, shifts of those)."""
    R = np.asarray(R, dtype=float)
    if isinstance(body, Shifted):
        return Shifted(rotate_body(body.inner, R), R @ body.offset)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(R @ body.matrix @ R.T, R @ body.center)
    raise UnsupportedOperation(f"rotation not implemented for {body.label}")


def ellipsoid_parameters(body):
    """``(M, c)`` with ``K = {(x-c)^T M (x-c) <= 1}`` when known in closed form, else ``None``."""
    if isinstance(body, Ellipsoid):
        return np.array(body.matrix), np.array(body.center)
    if isinstance(body, Shifted):
        inner = ellipsoid_parameters(body.inner)
        if inner is None:
            return None
        return inner[0], inner[1] + body.offset
    return None


# ---------------------------------------------------------------------------
# JSON descriptions

CATALOG = {
    "ball3": {"type": "ball", "radius": 1.0, "dim": 3},
    "ball5": {"type": "ball", "radius": 1.0, "dim": 5},
    "disk": {"type": "ball", "radius": 1.0, "dim": 2},
    "ellipsoid149": {"type": "ellipsoid", "matrix": [[1, 0, 0], [0, 4, 0], [0, 0, 9]]},
    "l4ball3": {"type": "superellipsoid", "p": 4, "dim": 3},
    "shifted-ball3": {
        "type": "shifted",
        "offset": [0.3, 0.0, 0.0],
        "inner": {"type": "ball", "radius": 1.0, "dim": 3},
    },
    "shifted-ellipsoid3": {
        "type": "shifted",
        "offset": [0.2, 0.1, 0.05],
        "inner": {"type": "ellipsoid", "matrix": [[1, 0, 0], [0, 4, 0], [0, 0, 9]]},
    },
    "product-shifted-ball3": {
        "type": "product",
        "inner": {
            "type": "shifted",
            "offset": [0.3, 0.0, 0.0],
            "inner": {"type": "ball", "radius": 1.0, "dim": 3},
        },
    },
}

_SCHEMA = None


def body_schema():
    """The JSON schema for body descriptions (shipped with the package)."""
    global _SCHEMA
    if _SCHEMA is None:
        text = resources.files("polyint").joinpath("schemas/body.schema.json").read_text()
        _SCHEMA = json.loads(text)
    return _SCHEMA


def _validate(spec, path):
    if not isinstance(spec, dict):
        raise BodySpecError(f"{path}: body must be a JSON object, got {type(spec).__name__}")
    kind = spec.get("type")
    defs = body_schema()["$defs"]
    if kind not in defs or kind == "vector":
        allowed = ", ".join(k for k in defs if k != "vector")
        raise BodySpecError(f"{path}: unknown body type {kind!r} (expected one of: {allowed})")
    schema = dict(defs[kind], **{"$defs": defs})
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(spec), key=str)
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in err.absolute_path)
        raise BodySpecError(f"{path}{'/' + where if where else ''}: {err.message}")


def body_from_json(spec, path="body"):
    """Build a :class:`Body` from a parsed JSON description (strictly validated)."""
    _validate(spec, path)
    kind = spec["type"]
    try:
        if kind == "ball":
            return Ball(spec["radius"], spec["dim"])
        if kind == "ellipsoid":
            return Ellipsoid(np.array(spec["matrix"], dtype=float), spec.get("center"))
        if kind == "superellipsoid":
            return Superellipsoid(spec["p"], spec["dim"])
        if kind == "shifted":
            return Shifted(body_from_json(spec["inner"], path + "/inner"), spec["offset"])
        if kind == "product":
            return ProductBody(body_from_json(spec["inner"], path + "/inner"))
        if kind == "catalog":
            if spec["id"] not in CATALOG:
                raise BodySpecError(f"{path}/id: unknown catalog id {spec['id']!r} "
                                    f"(known: {', '.join(sorted(CATALOG))})")
            return body_from_json(CATALOG[spec["id"]], path)
    except DomainError as exc:
        raise BodySpecError(f"{path}: {exc}") from exc
    raise AssertionError(kind)


def load_body(source):
    """Body from a dict, a JSON string, a path to a JSON file or a catalog id."""
    if isinstance(source, Body):
        return source
    if isinstance(source, dict):
        return body_from_json(source)
    text = str(source).strip()
    if text in CATALOG:
        return body_from_json(CATALOG[text])
    if not text.startswith("{"):
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError as exc:
            raise BodySpecError(f"cannot read body description {source!r}: {exc}") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BodySpecError(f"body description is not valid JSON: {exc}") from exc
    return body_from_json(spec)


def require_symmetric(body, tol=1e-10, samples=64):
    """Raise :class:`PreconditionError` unless ``||x|| = ||-x||`` on a sphere sample."""
    from .spheres import sphere_points

    X = sphere_points(body.dim, samples, seed=3)
    a = body._minkowski(X)
    b = body._minkowski(-X)
    dev = float(np.max(np.abs(a - b) / a))
    if dev > tol:
        raise PreconditionError(f"body is not origin-symmetric (relative asymmetry {dev:.2e})")
    return dev
