import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coverage_control.density import Gaussian, Uniform
from coverage_control.dynamics import (FirstOrder, FirstOrderGoTo, SecondOrder, Unicycle, UnicycleGoTo, energy,
                                       local_controller_round, pd_closed_loop, pd_control, run_local_rounds,
                                       saturate, step_first_order, step_second_order, step_unicycle,
                                       unicycle_control, wrap_angle)
from coverage_control.errors import ControllerContractViolation
from coverage_control.geometry import ConvexPolygon

BIG = ConvexPolygon.box(-10, -10, 10, 10)
SQ = ConvexPolygon.box(0, 0, 1, 1)


def test_saturate_examples():
    assert np.allclose(saturate((0.5, 0.0)), (0.5, 0.0))
    assert np.allclose(saturate((3.0, 4.0)), (0.6, 0.8))
    assert np.allclose(saturate((0.0, 0.0)), (0.0, 0.0))


@given(st.floats(-100, 100), st.floats(-100, 100))
def test_saturate_norm_bound(x, y):
    assert np.hypot(*saturate((x, y))) <= 1.0 + 1e-12


def test_first_order_steps():
    s = FirstOrder((0.2, 0.3))
    assert step_first_order(s, (0.0, 0.0), 0.1) == s
    assert step_first_order(FirstOrder((0.0, 0.0)), (3.0, 4.0), 1.0, BIG).p == pytest.approx((0.6, 0.8))
    out = step_first_order(FirstOrder((0.9, 0.5)), (1.0, 0.0), 0.5, SQ)
    assert out.p == pytest.approx((1.0, 0.5))


def test_pd_control_examples():
    assert np.allclose(pd_control(SecondOrder((0.3, 0.3)), 1.0, (0.3, 0.3), 6, 1), 0.0)
    assert np.allclose(pd_control(SecondOrder((1.0, 0.0)), 1.0, (0.0, 0.0), 6, 1), (-6.0, 0.0))
    assert np.allclose(pd_control(SecondOrder((0.0, 0.0), (1.0, 0.0)), 1.0, (0.0, 0.0), 6, 1), (-1.0, 0.0))
    with pytest.raises(ValueError):
        pd_control(SecondOrder((0.0, 0.0)), 1.0, (0.0, 0.0), 0, 1)


def test_second_order_steps():
    s = SecondOrder((0.1, 0.2))
    assert step_second_order(s, (0, 0), 0.1) == s
    moved = step_second_order(SecondOrder((0.0, 0.0), (1.0, 0.0)), (0, 0), 0.1)
    assert moved.p == pytest.approx((0.1, 0.0)) and moved.v == pytest.approx((1.0, 0.0))
    # constant input: exact kinematics
    acc = step_second_order(SecondOrder((0.0, 0.0)), (2.0, 0.0), 0.5)
    assert acc.p == pytest.approx((0.25, 0.0)) and acc.v == pytest.approx((1.0, 0.0))


def test_energy_record():
    e = energy(0.4, [[1.0, 0.0], [0.0, 2.0]], 6.0)
    assert e.kinetic == pytest.approx(2.5) and e.E == pytest.approx(1.2 + 2.5)


def test_pd_energy_decreases_small():
    rng = np.random.default_rng(3)
    tr = pd_closed_loop(ConvexPolygon.box(-1, -1, 1, 1), rng.uniform(-1, 1, (6, 2)), Gaussian((0, 0), 5.0),
                        k_prop=6, k_deriv=1, h=0.005, max_steps=4000, tol=1e-2)
    assert tr.energy_violations(1e-6) == []
    E = [e.E for e in tr.energies]
    assert E[-1] < E[0]


def test_unicycle_aligned():
    w, v, s = unicycle_control(Unicycle(math.pi, 1.0, 0.0), (0.0, 0.0), 3.0)
    assert w == pytest.approx(0.0, abs=1e-12) and v == pytest.approx(3.0)
    assert s.theta == pytest.approx(math.pi)


def test_unicycle_flip():
    w, v, s = unicycle_control(Unicycle(0.0, 1.0, 0.0), (0.0, 0.0), 3.0)
    assert s.dir == -1 and abs(wrap_angle(s.theta - math.pi)) < 1e-12
    assert w == pytest.approx(0.0, abs=1e-12) and v == pytest.approx(3.0)


def test_unicycle_at_target_is_still():
    w, v, s = unicycle_control(Unicycle(0.3, 0.5, 0.5), (0.5, 0.5), 3.0)
    assert (w, v) == (0.0, 0.0)


def test_step_unicycle_examples():
    s = step_unicycle(Unicycle(0.0, 0.0, 0.0), 0.0, 1.0, 0.1)
    assert (s.x, s.y) == pytest.approx((0.1, 0.0))
    spin = step_unicycle(Unicycle(0.0, 0.2, 0.3), 1.0, 0.0, 0.5)
    assert (spin.x, spin.y) == pytest.approx((0.2, 0.3)) and spin.theta == pytest.approx(0.5)
    s = Unicycle(0.0, 0.0, 0.0)
    n = 2000
    for _ in range(n):
        s = step_unicycle(s, 1.0, 1.0, 2 * math.pi / n)
    assert math.hypot(s.x, s.y) < 1e-6


@given(st.floats(-math.pi, math.pi), st.floats(-1, 1), st.floats(-1, 1))
def test_unicycle_goto_approaches(theta, x, y):
    if math.hypot(x, y) < 1e-3:
        return
    ctl = UnicycleGoTo(3.0, 0.01)
    s = ctl.advance(Unicycle(theta, x, y), (0.0, 0.0), 0.5)
    assert math.hypot(s.x, s.y) < math.hypot(x, y)


def test_first_order_round_decreases():
    rng = np.random.default_rng(2)
    states = [FirstOrder(tuple(p)) for p in rng.uniform(0, 1, (6, 2))]
    new, targets, d0, d1 = local_controller_round(SQ, states, Uniform(), 0.5, FirstOrderGoTo())
    assert np.all(d1 < d0)
    assert len(targets) == 6


def test_unicycle_round_decreases():
    rng = np.random.default_rng(4)
    states = [Unicycle(float(t), float(x), float(y)) for t, (x, y) in
              zip(rng.uniform(-math.pi, math.pi, 6), rng.uniform(0, 1, (6, 2)))]
    _, _, d0, d1 = local_controller_round(SQ, states, Uniform(), 0.5, UnicycleGoTo())
    assert np.all(d1 < d0)


class _Overshoot:
    """Jumps past the reflection of the start through the target."""

    def advance(self, state, target, duration):
        p = np.asarray(state.p)
        return FirstOrder(tuple(p + 2.5 * (np.asarray(target) - p)))


def test_overshooting_controller_flagged():
    states = [FirstOrder((0.45, 0.5)), FirstOrder((0.55, 0.5))]
    with pytest.raises(ControllerContractViolation) as exc:
        local_controller_round(ConvexPolygon.box(-5, -5, 5, 5), states, Uniform(), 0.5, _Overshoot())
    assert exc.value.vehicle == 0


def test_local_rounds_converge():
    rng = np.random.default_rng(5)
    states = [FirstOrder(tuple(p)) for p in rng.uniform(0, 1, (5, 2))]
    tr = run_local_rounds(SQ, states, Uniform(), 0.5, FirstOrderGoTo(), rounds=200, tol=1e-3)
    assert tr.residuals[-1] < 1e-3
    totals = [c.total for c in tr.costs]
    assert all(b <= a + 1e-12 for a, b in zip(totals, totals[1:]))
