import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyint import _backend, _fallback
from polyint.sections import default_rule
from polyint.spheres import sphere_points

needs_compiled = pytest.mark.skipif(_backend.compiled is None, reason="extension not built")


def _ray_residual(base, dirs, r, p):
    pts = base + r[:, None] * dirs
    return np.abs(np.sum(np.abs(pts) ** p, axis=1) ** (1 / p) - 1)


@pytest.mark.parametrize("dim, p", [(3, 4), (3, 8), (5, 4), (2, 6)])
def test_fallback_ray_lengths_solve_boundary_equation(dim, p):
    rng = np.random.default_rng(dim * p)
    base = 0.4 * rng.uniform(-1, 1, (200, dim)) / dim
    dirs = sphere_points(dim, 200, seed=2)
    r = _fallback.lp_ray_lengths(base, dirs, p)
    assert np.all(r > 0)
    assert np.max(_ray_residual(base, dirs, r, p)) < 1e-13


def test_fallback_outside_base_is_nan():
    r = _fallback.lp_ray_lengths(np.array([[2.0, 0, 0]]), np.array([[1.0, 0, 0]]), 4)
    assert np.isnan(r[0])


@needs_compiled
@given(st.integers(0, 10_000), st.sampled_from([4, 6, 8]), st.sampled_from([2, 3, 5]))
def test_compiled_matches_fallback_rays(seed, p, dim):
    rng = np.random.default_rng(seed)
    base = 0.5 * rng.uniform(-1, 1, (64, dim)) / dim
    dirs = rng.standard_normal((64, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    a = _backend.compiled.lp_ray_lengths(base, dirs, p)
    b = _fallback.lp_ray_lengths(base, dirs, p)
    assert np.max(np.abs(a - b)) < 1e-13


@needs_compiled
@pytest.mark.parametrize("dim", [3, 5])
def test_compiled_matches_fallback_section_sums(dim):
    rule = default_rule(dim)
    frame = np.linalg.qr(np.random.default_rng(1).standard_normal((dim, dim)))[0][:, 1:]
    thetas = rule.points @ frame.T
    centres = np.outer(np.linspace(-0.8, 0.8, 7), np.ones(dim) / dim)
    a = _backend.compiled.lp_section_sums(centres, thetas, rule.weights, 4, dim - 1)
    b = _fallback.lp_section_sums(centres, thetas, rule.weights, 4, dim - 1)
    assert np.max(np.abs(a - b) / np.abs(b)) < 1e-13


def test_backend_selection_flag():
    assert _backend.NAME in ("cython", "numpy")
    assert (_backend.NAME == "cython") == (_backend.active is _backend.compiled)


def test_env_forces_fallback():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from polyint import _backend; print(_backend.NAME)"],
        env={"POLYINT_PURE_PYTHON": "1", "PATH": ""}, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"
