import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coverage_control.density import Gaussian, Uniform, custom, power, quadratic
from coverage_control.errors import PartitionMismatch
from coverage_control.geometry import ConvexPolygon, HalfPlane, clip_halfplane, voronoi_diagram
from coverage_control.objective import (analyze, coverage_cost, coverage_cost_voronoi, gradient,
                                        p_center_cost)

from conftest import points_in, random_convex

SQ = ConvexPolygon.box(0, 0, 1, 1)


def test_single_agent_costs():
    assert coverage_cost([(0.5, 0.5)], [SQ]) == pytest.approx(1 / 6)
    assert coverage_cost([(0.0, 0.0)], [SQ]) == pytest.approx(2 / 3)


def test_partition_size_checked():
    with pytest.raises(PartitionMismatch):
        coverage_cost([(0.5, 0.5), (0.1, 0.1)], [SQ])


def test_voronoi_cost_equals_cost_on_own_partition():
    rng = np.random.default_rng(2)
    P = points_in(rng, SQ, 6)
    cells = voronoi_diagram(SQ, P).cells
    phi = Gaussian((0.2, 0.3), 3.0)
    assert coverage_cost(P, cells, phi=phi) == pytest.approx(coverage_cost_voronoi(SQ, P, phi=phi).total, rel=1e-9)


def test_two_agent_centroidal_breakdown():
    c = coverage_cost_voronoi(SQ, [(0.25, 0.5), (0.75, 0.5)])
    rect = 0.5 * (0.5 ** 2 + 1.0) / 12
    assert c.displacement == pytest.approx(0.0, abs=1e-15)
    assert c.total == pytest.approx(2 * rect)
    assert c.quantization == pytest.approx(2 * rect)


def _random_partition(rng, n):
    """Partition of the unit square into n strips by random cuts (not Voronoi)."""
    cuts = np.sort(rng.uniform(0, 1, n - 1))
    edges = np.concatenate([[0.0], cuts, [1.0]])
    return [ConvexPolygon.box(edges[k], 0, edges[k + 1], 1) for k in range(n)]


@pytest.mark.parametrize("seed", range(20))
def test_voronoi_partition_is_optimal(seed):
    rng = np.random.default_rng(seed)
    P = points_in(rng, SQ, 4)
    W = _random_partition(rng, 4)
    assert coverage_cost_voronoi(SQ, P).total <= coverage_cost(P, W) + 1e-12


@given(st.integers(0, 10**6))
def test_breakdown_sums(seed):
    rng = np.random.default_rng(seed)
    Q = random_convex(rng)
    P = points_in(rng, Q, 5)
    c = coverage_cost_voronoi(Q, P, phi=Gaussian((0.0, 0.0), 2.0))
    assert c.total == pytest.approx(c.quantization + c.displacement, rel=1e-12)


def _fd_gradient(Q, P, f, phi, eps=1e-5):
    g = np.zeros_like(P)
    for i in range(len(P)):
        for k in range(2):
            Pp, Pm = P.copy(), P.copy()
            Pp[i, k] += eps
            Pm[i, k] -= eps
            g[i, k] = (coverage_cost_voronoi(Q, Pp, f, phi).total - coverage_cost_voronoi(Q, Pm, f, phi).total) / (2 * eps)
    return g


@pytest.mark.parametrize("phi", [Uniform(), Gaussian((0.3, 0.6), 4.0)])
def test_gradient_matches_finite_differences(phi):
    rng = np.random.default_rng(11)
    P = points_in(rng, SQ, 5, min_sep=0.05)
    g = gradient(SQ, P, phi=phi)
    fd = _fd_gradient(SQ, P, None, phi)
    assert np.linalg.norm(g - fd) <= 1e-4 * np.linalg.norm(fd)


def test_gradient_zero_at_centroidal():
    g = gradient(SQ, [(0.25, 0.5), (0.75, 0.5)])
    assert np.allclose(g, 0.0, atol=1e-14)


def test_gradient_general_f_single_agent():
    f = custom(lambda d: d, lambda d: np.ones_like(d), "distance")
    P = np.array([[0.3, 0.35]])
    g = gradient(SQ, P, f)
    fd = _fd_gradient(SQ, P, f, Uniform())
    assert np.linalg.norm(g - fd) < 1e-3 * max(1.0, np.linalg.norm(fd))


def test_general_f_power_two_matches_quadratic():
    rng = np.random.default_rng(4)
    P = points_in(rng, SQ, 4)
    cells = voronoi_diagram(SQ, P).cells
    cubic_like = custom(lambda d: d * d, lambda d: 2 * d, "square-by-hand")
    assert coverage_cost(P, cells, cubic_like) == pytest.approx(coverage_cost(P, cells, quadratic()), rel=1e-9)
    assert coverage_cost(P, cells, power(3)) > 0


def test_p_center_cost_examples():
    assert p_center_cost(SQ, [(0.5, 0.5)]) == pytest.approx(math.sqrt(2) / 2)
    assert p_center_cost(SQ, [(0.0, 0.0)]) == pytest.approx(math.sqrt(2))
    assert p_center_cost(SQ, [(0.25, 0.5), (0.75, 0.5)]) == pytest.approx(math.sqrt(0.0625 + 0.25))


def test_zero_mass_cell_holds_agent():
    # a density supported away from agent 1's cell gives it no mass
    from coverage_control.density import Line
    phi = Line(1.0, 0.0, 0.0, 1e5)
    snap = analyze(ConvexPolygon.box(0, 0, 1, 1), [(0.05, 0.5), (0.95, 0.5)], phi)
    assert 1 in snap.zero_mass
    assert np.allclose(snap.centroids[1], (0.95, 0.5))


def test_snapshot_cost_optional():
    snap = analyze(SQ, [(0.2, 0.2), (0.7, 0.6)], Uniform(), cost=False)
    assert math.isnan(snap.cost.total)
    assert snap.residual > 0
    clipped = clip_halfplane(SQ, HalfPlane((1.0, 0.0), 0.5))
    assert clipped.area == pytest.approx(0.5)
