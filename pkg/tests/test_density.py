import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coverage_control._kernels import log_density
from coverage_control.density import (Disk, Ellipse, Gaussian, Line, Uniform, custom, power, quadratic,
                                       smooth_ramp)
from coverage_control.geometry import ConvexPolygon, polygon_moments_uniform
from coverage_control.quadrature import cell_moments, flat_moments
from coverage_control.geometry import FlatCells

R = math.sqrt(0.3)


def test_line_on_line_is_one():
    phi = Line(1, 0, 0, 500)
    assert [phi((0.0, y)) for y in (-1.0, 0.0, 0.7)] == pytest.approx([1.0, 1.0, 1.0])


def test_ellipse_on_curve_is_one():
    phi = Ellipse(1.4, 0.6, 0, 0, R, 500)
    for t in np.linspace(0, 2 * math.pi, 7):
        q = (R * math.cos(t) / math.sqrt(1.4), R * math.sin(t) / math.sqrt(0.6))
        assert phi(q) == pytest.approx(1.0)


def test_disk_center_value_matches_formula():
    phi = Disk(1.4, 0.6, 0, 0, R, 500, 10)
    expected = math.exp(-500 * smooth_ramp(10, -0.3))
    assert phi((0.0, 0.0)) == pytest.approx(expected)
    # inside values are flat relative to the falloff outside
    assert phi((0.1, 0.1)) / phi((0.0, 0.0)) < 10
    assert phi((0.9, 0.9)) < 1e-100


def test_smooth_ramp_examples():
    assert smooth_ramp(3.0, 0.0) == 0.0
    assert smooth_ramp(10, 5) == pytest.approx(4.968, abs=1e-3)
    assert smooth_ramp(10, -5) == pytest.approx(-0.0318, abs=1e-4)
    with pytest.raises(ValueError):
        smooth_ramp(0.0, 1.0)


@given(st.floats(-3, 3), st.floats(0.1, 50))
def test_smooth_ramp_bounds(x, ell):
    v = smooth_ramp(ell, x)
    assert v >= min(x, 0.0) - 1e-12 and v <= max(x, 0.0) + 1e-12


def test_line_rejects_zero_normal():
    with pytest.raises(ValueError):
        Line(0, 0, 1, 1)


@pytest.mark.parametrize("phi", [Uniform(), Gaussian((0.2, -0.1), 5.0), Line(1, -2, 0.3, 20),
                                 Ellipse(1.4, 0.6, 0.1, 0, R, 500), Disk(1.4, 0.6, 0, 0, R, 500, 10)])
def test_compiled_log_density_matches(phi):
    code, prm = phi.kernel_params()
    rng = np.random.default_rng(0)
    for x, y in rng.uniform(-1, 1, (50, 2)):
        assert log_density(code, prm, x, y) == pytest.approx(float(phi.log_eval(x, y)), rel=1e-12, abs=1e-12)


def test_performance_functions():
    f = quadratic()
    assert f.is_quadratic and f.f(3.0) == 9.0 and f.fprime(3.0) == 6.0
    g = power(3)
    assert not g.is_quadratic and g.f(2.0) == pytest.approx(8.0)
    assert power(2).is_quadratic
    with pytest.raises(ValueError):
        power(0.5)
    with pytest.raises(ValueError):
        custom(lambda d: -d, lambda d: -1.0 + 0 * d)


def test_uniform_quadrature_matches_closed_form():
    sq = ConvexPolygon.box(0, 0, 1, 1)
    m, c = cell_moments(sq, Uniform()), polygon_moments_uniform(sq)
    assert m.mass == pytest.approx(c.mass, abs=1e-9)
    assert m.centroid == pytest.approx(c.centroid, abs=1e-9)
    assert m.polar_moment_centroid == pytest.approx(c.polar_moment_centroid, abs=1e-9)


def test_gaussian_pulls_centroid_toward_peak():
    m = cell_moments(ConvexPolygon.box(0, 0, 1, 1), Gaussian((0, 0), 5.0))
    assert m.centroid[0] < 0.5 and m.centroid[1] < 0.5


def _monte_carlo_centroid(phi, n=10**6, seed=0):
    rng = np.random.default_rng(seed)
    q = rng.uniform(-1, 1, (n, 2))
    w = phi.eval_xy(q[:, 0], q[:, 1])
    return (w[:, None] * q).sum(0) / w.sum(), w.mean() * 4


class _Bump:
    """Sharp bump without compiled parameters, exercising the fixed rule."""

    is_uniform = False

    def log_eval(self, x, y):
        return -((x - 0.3) ** 2 + y ** 2) / 0.02

    def eval_xy(self, x, y):
        return np.exp(self.log_eval(x, y))

    def kernel_params(self):
        return None


def test_sharp_bump_centroid_against_monte_carlo():
    sq = ConvexPolygon.box(-1, -1, 1, 1)
    phi = _Bump()
    mc, _ = _monte_carlo_centroid(phi)
    m = cell_moments(sq, phi)
    assert math.hypot(m.centroid[0] - 0.3, m.centroid[1]) < 0.02
    assert math.hypot(m.centroid[0] - mc[0], m.centroid[1] - mc[1]) < 0.01


@pytest.mark.parametrize("phi", [Gaussian((0.3, 0.0), 50.0), Ellipse(1.4, 0.6, 0, 0, R, 500),
                                 Disk(1.4, 0.6, 0, 0, R, 500, 10)])
def test_adaptive_moments_against_monte_carlo(phi):
    sq = ConvexPolygon.box(-1, -1, 1, 1)
    mass, cent, _ = flat_moments(FlatCells.from_polygons([sq]), phi)
    mc, mc_mass = _monte_carlo_centroid(phi)
    assert mass[0] == pytest.approx(mc_mass, rel=0.02)
    assert np.hypot(*(cent[0] - mc)) < 0.01


@pytest.mark.parametrize("phi", [Gaussian((0.2, 0.1), 5.0), Ellipse(1.4, 0.6, 0, 0, R, 500)])
def test_adaptive_matches_fine_fixed_rule(phi):
    rng = np.random.default_rng(3)
    from coverage_control.geometry import voronoi_flat
    from coverage_control._kernels import fan_nodes, reduce_moments
    from coverage_control.quadrature import RULE_BARY, RULE_WEIGHTS
    flat = voronoi_flat(ConvexPolygon.box(-1, -1, 1, 1), rng.uniform(-1, 1, (6, 2)))
    mass, cent, j = flat_moments(flat, phi)
    x, y, w, o = fan_nodes(flat.verts, flat.offsets, np.full(len(flat), 64), RULE_BARY, RULE_WEIGHTS)
    sh, m, cx, cy, jj = reduce_moments(x, y, w, o, np.ascontiguousarray(phi.log_eval(x, y)), len(flat), True)
    ref = m * np.exp(sh)
    assert np.allclose(mass, ref, rtol=1e-6, atol=1e-12 * ref.sum())
    heavy = ref > 1e-6 * ref.sum()
    assert np.allclose(cent[heavy], np.stack([cx, cy], 1)[heavy], atol=1e-7)
