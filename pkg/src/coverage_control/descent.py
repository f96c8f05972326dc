"""Lloyd descent: continuous gradient flow, discrete maps, p-center step."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constants import TOL
from .density import DensityField, Uniform
from .errors import PropertyViolation
from .geometry import ConvexPolygon, min_enclosing_ball_center, voronoi_diagram
from .objective import CostBreakdown, CoverageSnapshot, analyze

log = logging.getLogger(__name__)


@dataclass
class FlowTrace:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    costs: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def append(self, t, P, cost: CostBreakdown, residual, event=""):
        self.times.append(float(t))
        self.states.append(np.array(P, dtype=float))
        self.costs.append(cost)
        self.residuals.append(float(residual))
        self.events.append(event)

    def __len__(self):
        return len(self.times)

    @property
    def totals(self) -> np.ndarray:
        return np.array([c.total for c in self.costs])

    def descent_violations(self, rel_tol: float = TOL.flow_descent_rel):
        """Indices ``k`` where the cost rose from ``k-1`` beyond tolerance."""
        h = self.totals
        return [k for k in range(1, len(h)) if h[k] > h[k - 1] + rel_tol * (1 + abs(h[k - 1]))]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class DescentReport:
    final: np.ndarray
    iterations: int
    converged: bool
    residual: float
    costs: list = field(default_factory=list)
    states: list = field(default_factory=list)
    residuals: list = field(default_factory=list)


def residual(Q: ConvexPolygon, P, phi: DensityField | None = None) -> float:
    """``max_i |p_i - C_{V_i}|``."""
    return analyze(Q, P, Uniform() if phi is None else phi).residual


def is_centroidal(Q: ConvexPolygon, P, tol: float, phi: DensityField | None = None) -> bool:
    return residual(Q, P, phi) < tol


def _velocity(snap: CoverageSnapshot, k_prop: float) -> np.ndarray:
    # zero-mass cells have centroid == position, so those agents hold
    return -k_prop * (snap.positions - snap.centroids)


def continuous_lloyd_flow(Q: ConvexPolygon, P0, phi: DensityField, k_prop: float = 1.0,
                          h: float = 0.02, max_steps: int = 5000, tol: float = 1e-3,
                          callback: Callable | None = None) -> FlowTrace:
    """Integrate ``p_i' = -k_prop (p_i - C_{V_i})`` with fixed-step RK4.

    The Voronoi partition is recomputed at every stage evaluation.  Stops once
    the residual drops below ``tol`` or after ``max_steps`` steps.  The trace
    holds the state, cost breakdown and residual at every step.
    """
    if k_prop <= 0 or h <= 0:
        raise ValueError("k_prop and h must be positive")
    P = np.asarray(P0, dtype=float).reshape(-1, 2).copy()
    trace = FlowTrace()
    t = 0.0
    snap = analyze(Q, P, phi)
    for step in range(max_steps + 1):
        event = f"zero-mass:{','.join(map(str, snap.zero_mass))}" if snap.zero_mass else ""
        trace.append(t, P, snap.cost, snap.residual, event)
        if snap.zero_mass:
            log.info("t=%g: cells %s carry no mass; agents hold", t, snap.zero_mass)
        if callback is not None:
            callback(t, snap)
        if snap.residual < tol or step == max_steps:
            break
        k1 = _velocity(snap, k_prop)
        k2 = _velocity(analyze(Q, P + 0.5 * h * k1, phi, cost=False), k_prop)
        k3 = _velocity(analyze(Q, P + 0.5 * h * k2, phi, cost=False), k_prop)
        k4 = _velocity(analyze(Q, P + h * k3, phi, cost=False), k_prop)
        P = P + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        snap = analyze(Q, P, phi)
    return trace


def lloyd_map(Q: ConvexPolygon, P, phi: DensityField | None = None) -> np.ndarray:
    """Move every agent to the centroid of its current Voronoi cell."""
    return analyze(Q, P, Uniform() if phi is None else phi).centroids.copy()


def damped_lloyd_map(fraction: float):
    """Map moving each agent ``fraction`` of the way to its centroid."""

    def T(Q, P, phi=None):
        P = np.asarray(P, dtype=float)
        return P + fraction * (lloyd_map(Q, P, phi) - P)

    return T


def p_center_step(Q: ConvexPolygon, P) -> np.ndarray:
    """Move every agent to the center of the smallest disk enclosing its cell."""
    diagram = voronoi_diagram(Q, P)
    return np.array([min_enclosing_ball_center(c) for c in diagram.cells])


def descent_iterate(T: Callable, Q: ConvexPolygon, P0, phi: DensityField | None = None,
                    tol: float = 1e-9, max_iter: int = 200, check_tol: float = 1e-12) -> DescentReport:
    """Iterate ``T(Q, P, phi)`` while checking the monotone-approach properties.

    Every agent must end no farther from its cell centroid than it started,
    and when the configuration is not centroidal at least one agent must get
    strictly closer.  A breach raises :class:`PropertyViolation`.
    """
    phi = Uniform() if phi is None else phi
    P = np.asarray(P0, dtype=float).reshape(-1, 2).copy()
    snap = analyze(Q, P, phi)
    costs, states, residuals = [snap.cost], [P.copy()], [snap.residual]
    it = 0
    while snap.residual >= tol and it < max_iter:
        it += 1
        P_new = np.asarray(T(Q, P, phi), dtype=float).reshape(P.shape)
        before = np.hypot(*(P - snap.centroids).T)
        after = np.hypot(*(P_new - snap.centroids).T)
        worse = np.nonzero(after > before + check_tol * (1 + before))[0]
        if len(worse):
            i = int(worse[0])
            raise PropertyViolation(
                f"iteration {it}: agent {i} moved away from its centroid ({before[i]:.3e} -> {after[i]:.3e})",
                agent=i, iteration=it)
        if not np.any(after < before - check_tol * (1 + before)):
            raise PropertyViolation(f"iteration {it}: no agent approached its centroid", iteration=it)
        P = P_new
        snap = analyze(Q, P, phi)
        costs.append(snap.cost)
        states.append(P.copy())
        residuals.append(snap.residual)
    return DescentReport(P, it, snap.residual < tol, snap.residual, costs, states, residuals)
