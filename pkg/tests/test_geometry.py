import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyint import geometry as g
from polyint.errors import DomainError, PreconditionError, UnsupportedOperation
from polyint.spheres import sphere_points

unit3 = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 0.1)


def test_as_direction_normalises_and_rejects_zero():
    d = g.as_direction([3.0, 4.0])
    assert abs(np.linalg.norm(d) - 1) < 1e-14
    with pytest.raises(DomainError):
        g.as_direction([0.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        g.as_direction([1.0])


def test_minkowski_examples(ball3, ell149, shifted_ball):
    assert g.minkowski(ball3, [0, 0, 2]) == pytest.approx(2.0, abs=1e-15)
    assert g.minkowski(ell149, [1, 0, 0]) == pytest.approx(1.0, abs=1e-15)
    assert g.minkowski(shifted_ball, [1, 0, 0]) == pytest.approx(1 / 1.3, abs=1e-12)
    with pytest.raises(DomainError):
        g.minkowski(ball3, [0, 0, 0])


def test_radial_examples(ell149, l4):
    assert g.radial(g.Ball(2.0, 3), [0.3, -0.2, 0.9]) == pytest.approx(2.0, abs=1e-14)
    assert g.radial(ell149, [0, 1, 0]) == pytest.approx(0.5, abs=1e-15)
    assert g.radial(l4, np.array([1, 1, 0]) / math.sqrt(2)) == pytest.approx(0.5 ** -0.25, abs=1e-12)
    assert 0.5 ** -0.25 == pytest.approx(1.18921, abs=1e-5)


def test_support_and_chord_examples(ball3, ell149, shifted_ball):
    for xi in sphere_points(3, 10):
        assert g.support(ball3, xi) == pytest.approx(1.0, abs=1e-14)
    assert g.support(ell149, [0, 0, 1]) == pytest.approx(1 / 3, abs=1e-14)
    assert g.support(shifted_ball, [1, 0, 0]) == pytest.approx(1.3, abs=1e-14)
    assert (g.chord(ball3, [0, 1, 0]).t_min, g.chord(ball3, [0, 1, 0]).t_max) == pytest.approx((-1, 1))
    c = g.chord(shifted_ball, [1, 0, 0])
    assert (c.t_min, c.t_max) == pytest.approx((-0.7, 1.3), abs=1e-14)
    c = g.chord(ell149, [0, 1, 0])
    assert (c.t_min, c.t_max) == pytest.approx((-0.5, 0.5), abs=1e-14)


def test_support_matches_search_oracle(l4, ell149, shifted_ell):
    # independent oracle: scan + golden-section maximisation of (x, xi) over the boundary
    for body in (l4, ell149, shifted_ell):
        for xi in ([1, 2, 3], [-0.3, 0.1, 0.9], [0, 0, 1]):
            assert g.support(body, xi) == pytest.approx(g.support(body, xi, method="search"),
                                                        abs=1e-9)


def test_ellipsoid_support_dense_boundary_oracle(ell149):
    # dense boundary sampling: max of (x, xi) over boundary points r(theta) theta
    u, v = np.meshgrid(np.linspace(0, np.pi, 600), np.linspace(0, 2 * np.pi, 1200))
    th = np.column_stack([(np.sin(u) * np.cos(v)).ravel(), (np.sin(u) * np.sin(v)).ravel(),
                          np.cos(u).ravel()])
    pts = g.radial(ell149, th)[:, None] * th
    xi = g.as_direction([0.2, 0.5, 0.8])
    assert np.max(pts @ xi) == pytest.approx(g.support(ell149, xi), abs=1e-4)


@pytest.mark.parametrize("xi", [[1, 0, 0], [0, 0, 1], [-1, 1e-9, 0], [0.3, -0.4, 0.5]])
def test_orthonormal_frame(xi):
    F = g.orthonormal_frame(np.array(xi, dtype=float))
    assert F.shape == (3, 2)
    assert np.max(np.abs(F.T @ F - np.eye(2))) < 1e-13
    assert np.max(np.abs(F.T @ g.as_direction(xi))) < 1e-13


def test_frame_for_e1_is_e2_e3_up_to_sign():
    F = g.orthonormal_frame(np.array([1.0, 0, 0]))
    assert np.allclose(np.abs(F), np.array([[0, 0], [1, 0], [0, 1]]), atol=1e-15)


@given(unit3, st.floats(0.01, 10.0))
def test_homogeneity(x, lam):
    x = np.array(x)
    for key in ("l4ball3", "shifted-ellipsoid3", "ellipsoid149", "shifted-ball3"):
        body = g.load_body(key)
        a = g.minkowski(body, lam * x)
        b = lam * g.minkowski(body, x)
        assert abs(a - b) <= 1e-12 * b


@given(unit3)
def test_boundary_consistency_and_support_dominates(x):
    th = g.as_direction(x)
    for key in ("l4ball3", "shifted-ellipsoid3", "shifted-ball3"):
        body = g.load_body(key)
        r = g.radial(body, th)
        assert abs(g.minkowski(body, r * th) - 1) < 1e-10
        assert g.support(body, th) >= r - 1e-12


@given(unit3, unit3)
def test_translation_of_support(xi, off):
    inner = g.load_body("l4ball3")
    off = 0.3 * np.array(off) / np.linalg.norm(off)
    xi = g.as_direction(xi)
    body = g.Shifted(inner, off)
    assert abs(g.support(body, xi) - g.support(inner, xi) - off @ xi) < 1e-10


def test_contact_point_attains_support(l4, rand_ell3):
    for body in (l4, rand_ell3):
        for xi in np.eye(3).tolist() + [[1, 2, 3]]:
            xi = g.as_direction(xi)
            x = g.contact_point(body, xi)
            assert x @ xi == pytest.approx(g.support(body, xi), abs=1e-12)
            assert g.minkowski(body, x) == pytest.approx(1.0, abs=1e-12)


def test_invalid_bodies_rejected():
    with pytest.raises(DomainError):
        g.Ellipsoid(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(DomainError):
        g.Ellipsoid(np.array([[1.0, 0.1], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        g.Shifted(g.Ball(1.0, 3), [1.5, 0, 0])
    with pytest.raises(DomainError):
        g.Superellipsoid(3, 3)


def test_product_body_is_star_not_convex():
    pb = g.load_body("product-shifted-ball3")
    assert not pb.convex and pb.symmetric
    with pytest.raises(UnsupportedOperation):
        g.support(pb, [1, 0, 0])
    # ||x||_L = sqrt(B) = |x| / sqrt(1 - |d|^2) for the shifted unit ball
    x = np.array([0.2, -0.7, 0.4])
    assert g.minkowski(pb, x) == pytest.approx(np.linalg.norm(x) / math.sqrt(1 - 0.09), abs=1e-14)


def test_rotation_helpers(rng):
    R = g.random_rotation(3, rng)
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-13)
    assert np.linalg.det(R) == pytest.approx(1.0)
    e = g.random_ellipsoid(3, rng, cond=10)
    w = np.linalg.eigvalsh(e.matrix)
    assert w[-1] / w[0] == pytest.approx(10.0)
    x = rng.standard_normal(3)
    rb = g.rotate_body(e, R)
    assert g.minkowski(rb, R @ x) == pytest.approx(g.minkowski(e, x), rel=1e-13)


def test_require_symmetric(shifted_ball, ball3):
    assert g.require_symmetric(ball3) < 1e-14
    with pytest.raises(PreconditionError):
        g.require_symmetric(shifted_ball)


# --- body schema -------------------------------------------------------------


def test_catalog_round_trip():
    for key, spec in g.CATALOG.items():
        body = g.load_body(key)
        again = g.body_from_json(json.loads(json.dumps(body.to_json())))
        x = np.array([0.3, -0.5, 0.8, 0.1, 0.2][: body.dim])
        assert g.minkowski(again, x) == pytest.approx(g.minkowski(body, x), rel=1e-14)


@pytest.mark.parametrize("spec, fragment", [
    ({"type": "blob"}, "unknown body type"),
    ({"type": "ball", "radius": -1, "dim": 3}, "radius"),
    ({"type": "ball", "radius": 1}, "dim"),
    ({"type": "superellipsoid", "p": 5, "dim": 3}, "p"),
    ({"type": "superellipsoid", "p": 4, "dim": 3, "extra": 1}, "extra"),
    ({"type": "ellipsoid", "matrix": [[1, 0], [0, -1]]}, "positive definite"),
    ({"type": "shifted", "offset": [0, 0], "inner": {"type": "ball", "radius": 1, "dim": 3}},
     "dimension"),
    ({"type": "catalog", "id": "nope"}, "unknown catalog id"),
    ([1, 2], "JSON object"),
])
def test_schema_errors_are_specific(spec, fragment):
    with pytest.raises(g.BodySpecError, match=fragment):
        g.body_from_json(spec)


def test_load_body_sources(tmp_path):
    p = tmp_path / "b.json"
    p.write_text(json.dumps({"type": "ball", "radius": 2.0, "dim": 3}))
    assert g.load_body(str(p)).radius == 2.0
    assert g.load_body('{"type": "catalog", "id": "disk"}').dim == 2
    with pytest.raises(g.BodySpecError, match="not valid JSON"):
        g.load_body("{nope")
    with pytest.raises(g.BodySpecError, match="cannot read"):
        g.load_body(str(tmp_path / "missing.json"))
