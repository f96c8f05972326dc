import numpy as np
import pytest

from coverage_control.density import Gaussian, Uniform
from coverage_control.descent import (continuous_lloyd_flow, damped_lloyd_map, descent_iterate,
                                      is_centroidal, lloyd_map, p_center_step, residual)
from coverage_control.errors import PropertyViolation
from coverage_control.geometry import ConvexPolygon
from coverage_control.objective import coverage_cost_voronoi, p_center_cost

from conftest import points_in

SQ = ConvexPolygon.box(0, 0, 1, 1)
TARGET = np.array([[0.25, 0.5], [0.75, 0.5]])


def _match_pair(P, symmetric=False):
    targets = [TARGET, TARGET[:, ::-1]] if symmetric else [TARGET]
    return min(np.abs(Q - T).max() for T in targets for Q in (P, P[::-1]))


def test_single_agent_flow():
    # the gap to the centroid decays like exp(-k t)
    d0 = np.hypot(0.4, 0.4)
    tr = continuous_lloyd_flow(SQ, [(0.1, 0.9)], Uniform(), 1.0, 0.05, 200, 1e-12)
    assert tr.residuals[-1] == pytest.approx(d0 * np.exp(-10.0), rel=1e-6)
    tr = continuous_lloyd_flow(SQ, [(0.1, 0.9)], Uniform(), 1.0, 0.05, 400, 1e-6)
    assert tr.residuals[-1] < 1e-6 and len(tr) <= 301
    assert np.allclose(tr.final, [[0.5, 0.5]], atol=1e-6)


def test_two_agent_flow():
    tr = continuous_lloyd_flow(SQ, [(0.1, 0.2), (0.3, 0.9)], Uniform(), 1.0, 0.05, 2000, 1e-7)
    # either half-split of the square is centroidal
    assert _match_pair(tr.final, symmetric=True) < 1e-5


def test_gaussian_flow_descends():
    rng = np.random.default_rng(0)
    Q = ConvexPolygon.box(-1, -1, 1, 1)
    tr = continuous_lloyd_flow(Q, rng.uniform(-1, 1, (10, 2)), Gaussian((0, 0), 5.0), 1.0, 0.05, 3000, 1e-3)
    assert tr.descent_violations() == []
    assert np.all(np.diff(tr.totals[:50]) < 0)
    assert tr.residuals[-1] < 1e-3


def test_flow_rejects_bad_gain():
    with pytest.raises(ValueError):
        continuous_lloyd_flow(SQ, [(0.5, 0.5)], Uniform(), -1.0)


def test_lloyd_map_examples():
    assert np.allclose(lloyd_map(SQ, [(0.0, 0.0)]), [[0.5, 0.5]])
    assert np.allclose(lloyd_map(SQ, TARGET), TARGET)


def test_lloyd_map_decreases_cost():
    rng = np.random.default_rng(8)
    P = points_in(rng, SQ, 8)
    before = coverage_cost_voronoi(SQ, P).total
    after = coverage_cost_voronoi(SQ, lloyd_map(SQ, P)).total
    assert after < before


def test_descent_iterate_lloyd():
    rep = descent_iterate(lloyd_map, SQ, [(0.1, 0.3), (0.8, 0.6)], tol=1e-9, max_iter=200)
    assert rep.converged and rep.residual < 1e-9
    assert _match_pair(rep.final) < 1e-6
    totals = [c.total for c in rep.costs]
    assert all(b <= a + 1e-12 for a, b in zip(totals, totals[1:]))


def test_descent_iterate_halfway():
    rep = descent_iterate(damped_lloyd_map(0.5), SQ, points_in(np.random.default_rng(1), SQ, 5),
                          tol=1e-6, max_iter=2000)
    assert rep.converged
    totals = [c.total for c in rep.costs]
    assert all(b <= a + 1e-12 for a, b in zip(totals, totals[1:]))


def test_descent_iterate_detects_bad_map():
    def away(Q, P, phi=None):
        P = np.asarray(P)
        return P + 0.1 * (P - lloyd_map(Q, P, phi))

    with pytest.raises(PropertyViolation) as exc:
        descent_iterate(away, SQ, [(0.1, 0.2), (0.3, 0.9)])
    assert exc.value.iteration == 1


def test_is_centroidal():
    assert is_centroidal(SQ, [(0.5, 0.5)], 1e-9)
    assert not is_centroidal(SQ, [(0.0, 0.0)], 1e-3)
    tr = continuous_lloyd_flow(SQ, [(0.2, 0.3), (0.6, 0.7), (0.9, 0.1)], Uniform(), 1.0, 0.05, 5000, 1e-6)
    assert is_centroidal(SQ, tr.final, 1e-5)
    assert residual(SQ, tr.final) < 1e-5


def test_p_center_step_examples():
    assert np.allclose(p_center_step(SQ, [(0.1, 0.1)]), [[0.5, 0.5]])
    assert np.allclose(p_center_step(SQ, [(0.3, 0.4), (0.7, 0.4)]), TARGET)


def test_p_center_trace_logged(caplog):
    P = points_in(np.random.default_rng(6), SQ, 4)
    costs = [p_center_cost(SQ, P)]
    for _ in range(20):
        P = p_center_step(SQ, P)
        costs.append(p_center_cost(SQ, P))
    # not asserted to be monotone; the run must stay inside the region
    assert all(SQ.contains(p) for p in P)
    assert costs[-1] <= costs[0] + 1e-12
