"""Acceptance checks, one per criterion, each reporting a single pass/fail line.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import points_in, random_convex  # noqa: E402

from coverage_control.density import Gaussian, Uniform  # noqa: E402
from coverage_control.descent import continuous_lloyd_flow, descent_iterate, lloyd_map  # noqa: E402
from coverage_control.distributed import (  # noqa: E402
    adjust_communication_radius, adjust_sensing_radius, coverage_behavior_I, coverage_behavior_II,
    monitoring_run, replay_bytes,
)
from coverage_control.dynamics import Unicycle, UnicycleGoTo, pd_closed_loop, run_local_rounds  # noqa: E402
from coverage_control.geometry import (  # noqa: E402
    ConvexPolygon, polygon_moments_uniform, symmetric_difference_area, voronoi_diagram,
)
from coverage_control.objective import coverage_cost_voronoi, gradient  # noqa: E402
from coverage_control.scenario_io import parse_scenario  # noqa: E402

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
log = logging.getLogger("acceptance")

# (number, ok, detail) for every check that ran
RESULTS = []


def scenario(name):
    return parse_scenario((SCENARIOS / name).read_text())


def report(num, ok, detail):
    RESULTS.append((num, bool(ok), detail))
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    return ok


# 1 ------------------------------------------------------------------------


def check_geometry_oracle():
    t0 = time.perf_counter()
    worst_area, misses = 0.0, 0
    for seed in range(100):
        rng = np.random.default_rng([1, seed])
        Q = random_convex(rng)
        P = points_in(rng, Q, int(rng.integers(1, 17)))
        D = voronoi_diagram(Q, P)
        total = sum(c.area for c in D.cells)
        worst_area = max(worst_area, abs(total - Q.area) / Q.area)
        # sample points: each lies in the cell of its nearest generator
        S = points_in(rng, Q, 50, min_sep=0.0)
        near = np.argmin(np.hypot(S[:, None, 0] - P[None, :, 0], S[:, None, 1] - P[None, :, 1]), axis=1)
        misses += sum(not D.cells[j].contains(q, tol=1e-12) for q, j in zip(S, near))
    dt = time.perf_counter() - t0
    ok = worst_area <= 1e-9 and misses == 0 and dt < 10.0
    return report(1, ok, f"area rel err {worst_area:.2e}, sampling misses {misses}, {dt:.2f} s")


def test_geometry_oracle():
    assert check_geometry_oracle()


# 2 ------------------------------------------------------------------------


def _polar_moment_direct(poly, p):
    """Polar moment about ``p`` straight from the vertices moved to ``p``."""
    v = poly.as_array() - np.asarray(p)
    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    cr = x0 * y1 - x1 * y0
    return float(np.sum(cr * (x0 * x0 + x0 * x1 + x1 * x1 + y0 * y0 + y0 * y1 + y1 * y1)) / 12.0)


def check_parallel_axis():
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng([2, seed])
        poly = random_convex(rng)
        p = rng.uniform(-2, 2, 2)
        direct = _polar_moment_direct(poly, p)
        shifted = polygon_moments_uniform(poly).polar_moment(p)
        worst = max(worst, abs(direct - shifted) / abs(direct))
    return report(2, worst <= 1e-9, f"worst rel err {worst:.2e}")


def test_parallel_axis_identity():
    assert check_parallel_axis()


# 3 ------------------------------------------------------------------------


def _fd_gradient(Q, P, phi, eps=1e-5):
    g = np.zeros_like(P)
    for i in range(len(P)):
        for k in range(2):
            Pp, Pm = P.copy(), P.copy()
            Pp[i, k] += eps
            Pm[i, k] -= eps
            g[i, k] = (coverage_cost_voronoi(Q, Pp, phi=phi).total
                       - coverage_cost_voronoi(Q, Pm, phi=phi).total) / (2 * eps)
    return g


def check_gradient():
    worst = {}
    for name, phi in (("uniform", Uniform()), ("gaussian", Gaussian((0.0, 0.0), 5.0))):
        w = 0.0
        for seed in range(25):
            rng = np.random.default_rng([3, seed])
            Q = random_convex(rng)
            P = points_in(rng, Q, 5, min_sep=0.05)
            g, fd = gradient(Q, P, phi=phi), _fd_gradient(Q, P, phi)
            w = max(w, np.linalg.norm(g - fd) / np.linalg.norm(fd))
        worst[name] = w
    ok = max(worst.values()) < 1e-4
    return report(3, ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))


def test_gradient_closed_form():
    assert check_gradient()


# 4 ------------------------------------------------------------------------


def check_gaussian_flow():
    cfg = scenario("fig2_gaussian_flow.scn")
    t0 = time.perf_counter()
    tr = continuous_lloyd_flow(cfg.region, cfg.initial_positions(), cfg.density.build(), cfg.k_prop, cfg.h,
                               5000, 1e-3)
    dt = time.perf_counter() - t0
    bad = tr.descent_violations(1e-9)
    ok = not bad and tr.residuals[-1] < 1e-3 and dt < 60.0
    return report(4, ok, f"{len(tr) - 1} steps, residual {tr.residuals[-1]:.3e}, "
                         f"descent violations {len(bad)}, {dt:.1f} s")


def test_continuous_flow_gaussian():
    assert check_gaussian_flow()


# 5 ------------------------------------------------------------------------


def check_lloyd_fixed_point():
    cfg = scenario("lloyd_map_two.scn")
    rep = descent_iterate(lloyd_map, cfg.region, cfg.initial_positions(), Uniform(), tol=1e-12, max_iter=200)
    P = rep.final[np.argsort(rep.final[:, 0])]
    err = float(np.max(np.abs(P - [[0.25, 0.5], [0.75, 0.5]])))
    ok = err <= 1e-6 and rep.iterations <= 200
    return report(5, ok, f"{rep.iterations} iterations, max error {err:.2e}")


def test_lloyd_map_fixed_point():
    assert check_lloyd_fixed_point()


# 6 ------------------------------------------------------------------------


def check_distributed_cells():
    worst_s = worst_c = 0.0
    for seed in range(50):
        rng = np.random.default_rng([6, seed])
        Q = random_convex(rng)
        P = points_in(rng, Q, int(rng.integers(1, 13)))
        D = voronoi_diagram(Q, P)
        for i in range(len(P)):
            a = adjust_sensing_radius(i, P, Q, 0.05)
            b = adjust_communication_radius(i, Q, P, R0=0.05)
            worst_s = max(worst_s, symmetric_difference_area(a.cell, D.cells[i]) / Q.area)
            worst_c = max(worst_c, symmetric_difference_area(b.cell, D.cells[i]) / Q.area)
    ok = worst_s < 1e-9 and worst_c < 1e-9
    return report(6, ok, f"sensing {worst_s:.2e}, messages {worst_c:.2e} (relative symmetric difference)")


def test_distributed_cells_match():
    assert check_distributed_cells()


# 7 ------------------------------------------------------------------------


def _behavior_II(cfg):
    return coverage_behavior_II(cfg.region, cfg.initial_positions(), cfg.density.build(), cfg.horizon,
                                cfg.network_config(), cfg.tol)


def check_behavior_II():
    cfg = scenario("dist_II.scn")
    rates = cfg.clock_rates()
    tr, net = _behavior_II(cfg)
    _, again = _behavior_II(cfg)
    bad = tr.descent_violations(1e-6)
    same = replay_bytes(net) == replay_bytes(again)
    ok = not bad and tr.residuals[-1] < 1e-3 and same and 0.5 <= min(rates) and max(rates) <= 2.0
    return report(7, ok, f"t = {tr.times[-1]:.1f}, residual {tr.residuals[-1]:.3e}, "
                         f"descent violations {len(bad)}, replay identical {same}")


def test_behavior_II():
    assert check_behavior_II()


# 8 ------------------------------------------------------------------------


def delta0_sweep(deltas=(0.4, 0.2, 0.1, 0.05), horizon=60.0):
    """Final residual and cost rises of behaviour I for several step durations."""
    cfg = scenario("dist_I.scn")
    rows = []
    for d in deltas:
        tr, _ = coverage_behavior_I(cfg.region, cfg.initial_positions(), cfg.density.build(), d, horizon,
                                    cfg.network_config())
        rises = len(tr.descent_violations(1e-6))
        if rises:
            log.warning("delta0 = %g: cost rose %d times (oscillation)", d, rises)
        rows.append((d, tr.residuals[-1], rises))
    return rows


def check_behavior_I():
    cfg = scenario("dist_I.scn")
    tr, _ = coverage_behavior_I(cfg.region, cfg.initial_positions(), cfg.density.build(), 0.05, cfg.horizon,
                                cfg.network_config(), 1e-2)
    sweep = delta0_sweep()
    table = "; ".join(f"delta0 {d:g}: residual {r:.2e}, rises {k}" for d, r, k in sweep)
    ok = tr.residuals[-1] < 1e-2
    return report(8, ok, f"t = {tr.times[-1]:.1f}, residual {tr.residuals[-1]:.3e} | sweep: {table}")


def test_behavior_I():
    assert check_behavior_I()


# 9 ------------------------------------------------------------------------


def check_pd():
    cfg = scenario("fig3_pd.scn")
    tr = pd_closed_loop(cfg.region, cfg.initial_positions(), cfg.density.build(), 6.0, 1.0, 0.005,
                        cfg.max_steps, 1e-2)
    bad = tr.energy_violations(1e-6)
    ok = not bad and tr.residuals[-1] < 1e-2
    return report(9, ok, f"{len(tr) - 1} steps, residual {tr.residuals[-1]:.3e}, energy rises {len(bad)}")


def test_pd_passive():
    assert check_pd()


# 10 -----------------------------------------------------------------------


def check_unicycle():
    cfg = scenario("fig6_unicycle.scn")
    P0, th = cfg.initial_positions(), cfg.initial_headings()
    states = [Unicycle(float(a), float(p[0]), float(p[1])) for a, p in zip(th, P0)]
    tr = run_local_rounds(cfg.region, states, cfg.density.build(), cfg.delta, UnicycleGoTo(3.0, cfg.substep),
                          cfg.max_steps, 1e-2)
    # every vehicle away from its fixed target gets strictly closer within each round
    strict = all(np.all((d1 < d0) | (d0 <= 1e-12)) for d0, d1 in zip(tr.before, tr.after))
    ok = strict and tr.residuals[-1] < 1e-2
    return report(10, ok, f"{len(tr.before)} rounds, residual {tr.residuals[-1]:.3e}, strict decrease {strict}")


def test_unicycle_rounds():
    assert check_unicycle()


# 11 -----------------------------------------------------------------------


def _flow(cfg):
    return continuous_lloyd_flow(cfg.region, cfg.initial_positions(), cfg.density.build(), cfg.k_prop, cfg.h,
                                 cfg.max_steps, cfg.tol)


def check_patterns():
    ell = scenario("fig4_ellipse.scn")
    phi = ell.density.build()
    tr = _flow(ell)
    P = tr.final
    level = np.sqrt(phi.a * (P[:, 0] - phi.xc) ** 2 + phi.b * (P[:, 1] - phi.yc) ** 2)
    frac = float(np.mean(np.abs(level - phi.r) <= 0.1))
    disk = scenario("fig5_disk.scn")
    phi = disk.density.build()
    tr2 = _flow(disk)
    P = tr2.final
    level = np.sqrt(phi.a * (P[:, 0] - phi.xc) ** 2 + phi.b * (P[:, 1] - phi.yc) ** 2)
    inside = bool(np.all(level <= phi.r + 0.05))
    ok = frac >= 0.9 and inside and tr.residuals[-1] < ell.tol and tr2.residuals[-1] < disk.tol
    return report(11, ok, f"ellipse: {len(tr) - 1} steps, residual {tr.residuals[-1]:.2e}, on pattern {frac:.0%}; "
                          f"disk: {len(tr2) - 1} steps, residual {tr2.residuals[-1]:.2e}, "
                          f"max level {level.max():.3f} <= {phi.r + 0.05:.3f}")


def test_pattern_densities():
    assert check_patterns()


# 12 -----------------------------------------------------------------------


def _monitor_script(t):
    """Agent 1 next to agent 0 activates at 0.3; agent 2 sweeps in along the top from 0.5."""
    P = np.array([[-0.8, 0.0], [-0.4, 0.0], [0.9, 0.9]])
    act = [False, t >= 0.3, t >= 0.5]
    if t >= 0.5:
        P[2, 0] = 0.9 - 1.7 * (t - 0.5)
    return P, act


def check_monitoring():
    events = monitoring_run(0, _monitor_script, ConvexPolygon.box(-1, -1, 1, 1), 0.0, 1.5, 0.02)
    trans = [tr for e in events for tr in e.payload]
    ok = len(events) == 2 and trans == [(1, 1, 3), (2, 0, 3)]
    times = ", ".join(f"{e.time:.2f}" for e in events)
    return report(12, ok, f"{len(events)} events at t = {times}, transitions {trans}")


def test_monitoring_triggers():
    assert check_monitoring()


CHECKS = [check_geometry_oracle, check_parallel_axis, check_gradient, check_gaussian_flow, check_lloyd_fixed_point,
          check_distributed_cells, check_behavior_II, check_behavior_I, check_pd, check_unicycle, check_patterns,
          check_monitoring]


if __name__ == "__main__":
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    results = [check() for check in CHECKS]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
