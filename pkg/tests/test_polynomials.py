import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyint import geometry as g
from polyint.errors import ConditioningError, DomainError
from polyint.polynomials import (
    MultiPoly,
    compose_linear,
    evaluate,
    expand_roots,
    fit_homogeneous,
    monomial_exponents,
    quadratic_form_matrix,
    quadratic_form_poly,
    restrict_to_plane,
    roots_univariate,
    sqrt_poly,
)
from polyint.spheres import fibonacci_sphere, sphere_points

x1, x2, x3 = (MultiPoly.variable(3, i) for i in range(3))


def test_eval_examples():
    p = MultiPoly(2, {(2, 0): 1, (0, 2): 4})
    assert p([1.0, 1.0]) == 5.0
    assert MultiPoly.zero(3)([0.3, 0.1, 2.0]) == 0.0
    with pytest.raises(DomainError):
        p([1.0, 2.0, 3.0])


def test_eval_fit_of_ellipsoid_norm_squared(ell149):
    X = fibonacci_sphere(100)
    fit = fit_homogeneous(X, g.minkowski(ell149, X) ** 2, 2)
    assert fit.poly([1.0, 1.0, 1.0]) == pytest.approx(14.0, abs=1e-9)


def test_arithmetic_examples():
    y1, y2 = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
    sq = (y1 + y2) ** 2
    assert sq.allclose(MultiPoly(2, {(2, 0): 1, (1, 1): 2, (0, 2): 1}))
    B = y1 * y1 + y2 * y2
    assert (B ** 3).coefficient((4, 2)) == 3.0
    t = MultiPoly(1, {(3,): 2.0})
    b = MultiPoly(1, {(2,): 1.0})
    assert (t * t + 4 * b ** 3).allclose(MultiPoly(1, {(6,): 8.0}))


def test_structure_and_json():
    p = 3 * x1 * x2 - x3 ** 2 + 0.5
    assert p.degree == 2 and not p.is_homogeneous()
    assert p.homogeneous_part(2).is_homogeneous()
    assert MultiPoly.from_json(p.to_json()).allclose(p, atol=0)
    assert (p - p).is_zero() and (p - p).degree == -1
    assert [a for a, _ in p.terms()] == [(0, 0, 0), (1, 1, 0), (0, 0, 2)]
    with pytest.raises(DomainError):
        x1 ** -1


def test_monomial_exponents_count():
    for n, d in [(3, 2), (3, 7), (5, 3)]:
        assert len(monomial_exponents(n, d)) == math.comb(n + d - 1, d)


def test_fit_examples(l4, ell149):
    X = fibonacci_sphere(100)
    fit = fit_homogeneous(X, X[:, 0], 1)
    assert fit.poly.allclose(x1, atol=1e-12) and fit.residual < 1e-12
    fit = fit_homogeneous(X, g.minkowski(ell149, X) ** 2, 2)
    assert fit.residual < 1e-10
    assert fit.poly.allclose(quadratic_form_poly(np.diag([1.0, 4.0, 9.0])), atol=1e-10)
    assert fit_homogeneous(X, g.minkowski(l4, X), 1).residual > 1e-2


def test_fit_needs_enough_well_spread_samples():
    with pytest.raises(ValueError):
        fit_homogeneous(fibonacci_sphere(10), np.ones(10), 2)
    X = np.tile([[1.0, 0.0, 0.0]], (20, 1))
    with pytest.raises(ConditioningError):
        fit_homogeneous(X, np.ones(20), 1)


coef = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.integers(1, 4), st.data())
def test_fit_exact_for_homogeneous_polynomials(d, data):
    exps = monomial_exponents(3, d)
    cs = data.draw(st.lists(coef, min_size=len(exps), max_size=len(exps)))
    p = MultiPoly(3, dict(zip(exps, cs)))
    X = sphere_points(3, 4 * len(exps) + 20)
    fit = fit_homogeneous(X, evaluate(p, X), d, scale=1.0)
    assert fit.residual < 1e-12


@given(st.integers(0, 10_000))
def test_fit_rotation_equivalence(seed):
    rng = np.random.default_rng(seed)
    p = MultiPoly(3, dict(zip(monomial_exponents(3, 3), rng.uniform(-1, 1, 10))))
    R = g.random_rotation(3, rng)
    X = sphere_points(3, 80)
    fit = fit_homogeneous(X, evaluate(p, X @ R.T), 3)
    Y = sphere_points(3, 50, seed=9)
    assert np.max(np.abs(evaluate(fit.poly, Y) - evaluate(p, Y @ R.T))) <= 1e-9
    # same thing via exact substitution
    assert compose_linear(p, R).allclose(fit.poly, atol=1e-9)


def test_restrict_to_plane_examples(rng):
    p = x1 ** 2 + x2 ** 2 + x3 ** 2
    R = g.random_rotation(3, rng)
    q = restrict_to_plane(p, R[:, 0], R[:, 1])
    assert q.allclose(MultiPoly(2, {(2, 0): 1, (0, 2): 1}), atol=1e-12)
    assert restrict_to_plane(x1 ** 2, [0, 1, 0], [0, 0, 1]).is_zero()
    with pytest.raises(DomainError):
        restrict_to_plane(p, [1, 0, 0], [1, 0, 0])


def test_restrict_matches_direct_plane_fit(rng):
    # ||x||_L^4 for the product body of a shifted ball is |x|^4 / (1-|d|^2)^2
    L = g.load_body("product-shifted-ball3")
    X = sphere_points(3, 200)
    fit = fit_homogeneous(X, g.minkowski(L, X) ** 4, 4)
    R = g.random_rotation(3, rng)
    e1, e2 = R[:, 0], R[:, 1]
    restricted = restrict_to_plane(fit.poly, e1, e2)
    C = np.column_stack([np.cos(np.linspace(0, 2 * np.pi, 40, endpoint=False)),
                         np.sin(np.linspace(0, 2 * np.pi, 40, endpoint=False))])
    direct = fit_homogeneous(C, g.minkowski(L, C @ np.vstack([e1, e2])) ** 4, 4)
    assert restricted.max_coeff_diff(direct.poly) < 1e-9


def test_roots_examples():
    r = roots_univariate([1, 0, 1])
    assert sorted(expand_roots(r), key=lambda z: z.imag) == pytest.approx([-1j, 1j])
    r = roots_univariate([1, 0, 2, 0, 1])
    assert sorted((x.multiplicity for x in r)) == [2, 2]
    assert sorted((x.value for x in r), key=lambda z: z.imag) == pytest.approx([-1j, 1j], abs=1e-6)
    # ellipse x^2 + 4 y^2 restricted to (u, 1): u^2 + 4
    r = roots_univariate([4, 0, 1])
    assert sorted(expand_roots(r), key=lambda z: z.imag) == pytest.approx([-2j, 2j])
    with pytest.raises(DomainError):
        roots_univariate([0, 0])
    assert roots_univariate([3.0]) == []


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=8)
       .filter(lambda c: abs(c[-1]) > 1e-3))
def test_roots_closed_under_conjugation(c):
    zs = expand_roots(roots_univariate(c))
    assert len(zs) == len(c) - 1
    for z in zs:
        assert min(abs(np.conj(z) - w) for w in zs) < 1e-8


def test_sqrt_poly_perfect_square_predicate():
    X = sphere_points(3, 100)
    s = x1 + 2 * x2 - x3
    S, res = sqrt_poly(s * s, X)
    assert res < 1e-10
    assert (S * S).allclose(s * s, atol=1e-8)
    _, res = sqrt_poly(x1 ** 2 + x2 ** 2 + x3 ** 2, X)
    assert res > 1e-4
    assert sqrt_poly(x1 ** 3, X) == (None, math.inf)


def test_quadratic_form_round_trip(rng):
    A = rng.standard_normal((4, 4))
    G = A + A.T
    assert np.allclose(quadratic_form_matrix(quadratic_form_poly(G)), G, atol=1e-14)
    with pytest.raises(DomainError):
        quadratic_form_matrix(x1 ** 3)
