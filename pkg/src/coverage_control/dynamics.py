"""Vehicle models beyond the single integrator.

Second-order vehicles under PD coverage control, unicycles steered toward
their cell centroids, and synchronized rounds of local controllers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol, Sequence, Union

import numpy as np

from .density import DensityField
from .errors import ControllerContractViolation
from .geometry import ConvexPolygon, project_onto_polygon
from .objective import analyze

log = logging.getLogger(__name__)


def wrap_angle(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    t = math.remainder(theta, 2.0 * math.pi)
    return math.pi if t == -math.pi else t


# vehicle states -----------------------------------------------------------


@dataclass(frozen=True)
class FirstOrder:
    p: tuple[float, float]

    @property
    def position(self):
        return self.p


@dataclass(frozen=True)
class SecondOrder:
    p: tuple[float, float]
    v: tuple[float, float] = (0.0, 0.0)

    @property
    def position(self):
        return self.p


@dataclass(frozen=True)
class Unicycle:
    """Pose ``(theta, x, y)``; ``dir`` records the parity of applied flips."""

    theta: float
    x: float
    y: float
    dir: int = 1

    @property
    def position(self):
        return (self.x, self.y)

    def flipped(self) -> "Unicycle":
        return Unicycle(wrap_angle(self.theta + math.pi), self.x, self.y, -self.dir)


VehicleState = Union[FirstOrder, SecondOrder, Unicycle]


@dataclass(frozen=True)
class EnergyRecord:
    """``E = (k_prop / 2) H_V + kinetic``."""

    E: float
    kinetic: float
    coverage: float


# first order --------------------------------------------------------------


def saturate(x) -> np.ndarray:
    """Scale ``x`` back to unit norm when it is longer."""
    x = np.asarray(x, dtype=float)
    n = float(np.hypot(x[0], x[1]))
    return x / n if n > 1.0 else x.copy()


def _clamp(q, Q: ConvexPolygon | None):
    if Q is None or Q.contains(q):
        return (float(q[0]), float(q[1]))
    return project_onto_polygon(q, Q)


def step_first_order(s: FirstOrder, u, h: float, Q: ConvexPolygon | None = None) -> FirstOrder:
    """Move ``h * saturate(u)``, then project back onto ``Q`` if given."""
    step = h * saturate(u)
    return FirstOrder(_clamp((s.p[0] + step[0], s.p[1] + step[1]), Q))


# second order -------------------------------------------------------------


def pd_control(s: SecondOrder, M_V: float, C_V, k_prop: float, k_deriv: float) -> np.ndarray:
    """``u = -k_prop M_V (p - C_V) - k_deriv v``."""
    if k_prop <= 0 or k_deriv <= 0:
        raise ValueError("PD gains must be positive")
    p, v, c = np.asarray(s.p, float), np.asarray(s.v, float), np.asarray(C_V, float)
    return -k_prop * M_V * (p - c) - k_deriv * v


def _double_integrator_rk4(p, v, u, h):
    # RK4 of p' = v, v' = u with u constant; equals the exact update
    k1p, k1v = v, u
    k2p, k2v = v + 0.5 * h * k1v, u
    k3p, k3v = v + 0.5 * h * k2v, u
    k4p, k4v = v + h * k3v, u
    p_new = p + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
    v_new = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    return p_new, v_new


def step_second_order(s: SecondOrder, u, h: float, Q: ConvexPolygon | None = None) -> SecondOrder:
    p, v = _double_integrator_rk4(np.asarray(s.p, float), np.asarray(s.v, float), np.asarray(u, float), h)
    return SecondOrder(_clamp(p, Q), (float(v[0]), float(v[1])))


def energy(H_V: float, V, k_prop: float) -> EnergyRecord:
    V = np.asarray(V, dtype=float).reshape(-1, 2)
    kin = 0.5 * float(np.sum(V * V))
    return EnergyRecord(0.5 * k_prop * H_V + kin, kin, H_V)


@dataclass
class PDTrace:
    times: list = field(default_factory=list)
    positions: list = field(default_factory=list)
    velocities: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    costs: list = field(default_factory=list)
    tracked_kinetic: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def energy_violations(self, tol: float = 1e-6):
        E = [e.E for e in self.energies]
        return [k for k in range(1, len(E)) if E[k] > E[k - 1] + tol]


def pd_closed_loop(Q: ConvexPolygon, P0, phi: DensityField, k_prop: float = 6.0, k_deriv: float = 1.0,
                   h: float = 0.005, max_steps: int = 100000, tol: float = 1e-2, V0=None,
                   callback: Callable | None = None) -> PDTrace:
    """Double integrators under PD coverage control, input held over each step.

    Stops when both the residual and the largest speed fall below ``tol``.
    Kinetic energy is also tracked incrementally from the applied inputs.
    """
    P = np.asarray(P0, dtype=float).reshape(-1, 2).copy()
    V = np.zeros_like(P) if V0 is None else np.asarray(V0, dtype=float).reshape(P.shape).copy()
    trace = PDTrace()
    kin = 0.5 * float(np.sum(V * V))
    t = 0.0
    for step in range(max_steps + 1):
        snap = analyze(Q, P, phi)
        rec = energy(snap.cost.total, V, k_prop)
        event = f"zero-mass:{','.join(map(str, snap.zero_mass))}" if snap.zero_mass else ""
        trace.times.append(t)
        trace.positions.append(P.copy())
        trace.velocities.append(V.copy())
        trace.energies.append(rec)
        trace.residuals.append(snap.residual)
        trace.costs.append(snap.cost)
        trace.tracked_kinetic.append(kin)
        if callback is not None:
            callback(t, snap, V)
        speed = float(np.max(np.hypot(V[:, 0], V[:, 1]))) if len(V) else 0.0
        if (snap.residual < tol and speed < tol) or step == max_steps:
            trace.events.append(event)
            break
        U = -k_prop * snap.masses[:, None] * (P - snap.centroids) - k_deriv * V
        kin += float(np.sum(h * np.sum(V * U, axis=1) + 0.5 * h * h * np.sum(U * U, axis=1)))
        P, V = _double_integrator_rk4(P, V, U, h)
        for i in np.nonzero(~Q.contains_many(P))[0]:
            P[i] = project_onto_polygon(P[i], Q)
            event = (event + ";" if event else "") + f"clamped:{i}"
        trace.events.append(event)
        t += h
    return trace


# unicycle -----------------------------------------------------------------


def unicycle_control(s: Unicycle, target, k_prop: float):
    """Steering law toward ``target``; returns ``(omega, v, state)``.

    When the heading points away from the target the discrete flip
    ``(theta, v) -> (theta + pi, -v)`` is applied first and the flipped state
    is returned.
    """
    dx, dy = s.x - target[0], s.y - target[1]
    if dx == 0.0 and dy == 0.0:
        return 0.0, 0.0, s
    c, sn = math.cos(s.theta), math.sin(s.theta)
    if c * dx + sn * dy > 0.0:
        s = s.flipped()
        c, sn = -c, -sn
    den = c * dx + sn * dy
    num = -sn * dx + c * dy
    # den <= 0 here, so atan2(-num, -den) equals arctan(num / den)
    omega = 2.0 * k_prop * math.atan2(-num, -den)
    v = -k_prop * den
    return omega, v, s


def _unicycle_rhs(theta, omega, v):
    return omega, v * math.cos(theta), v * math.sin(theta)


def step_unicycle(s: Unicycle, omega: float, v: float, h: float) -> Unicycle:
    """RK4 step of ``theta' = omega, x' = v cos theta, y' = v sin theta``."""
    th, x, y = s.theta, s.x, s.y
    k1 = _unicycle_rhs(th, omega, v)
    k2 = _unicycle_rhs(th + 0.5 * h * k1[0], omega, v)
    k3 = _unicycle_rhs(th + 0.5 * h * k2[0], omega, v)
    k4 = _unicycle_rhs(th + h * k3[0], omega, v)
    d = [(a + 2 * b + 2 * c + e) / 6.0 for a, b, c, e in zip(k1, k2, k3, k4)]
    return Unicycle(wrap_angle(th + h * d[0]), x + h * d[1], y + h * d[2], s.dir)


# local controllers --------------------------------------------------------


class LocalController(Protocol):
    def advance(self, state, target, duration: float): ...


@dataclass(frozen=True)
class FirstOrderGoTo:
    """Unit-speed-bounded proportional motion toward the target."""

    k_prop: float = 1.0
    h: float = 0.01

    def advance(self, state: FirstOrder, target, duration: float) -> FirstOrder:
        steps = max(1, int(math.ceil(duration / self.h - 1e-9)))
        dt = duration / steps
        tgt = np.asarray(target, float)
        for _ in range(steps):
            state = step_first_order(state, self.k_prop * (tgt - np.asarray(state.p)), dt)
        return state


@dataclass(frozen=True)
class UnicycleGoTo:
    """Unicycle steering law integrated with fixed substeps."""

    k_prop: float = 3.0
    h: float = 0.01

    def advance(self, state: Unicycle, target, duration: float) -> Unicycle:
        steps = max(1, int(math.ceil(duration / self.h - 1e-9)))
        dt = duration / steps
        for _ in range(steps):
            omega, v, state = unicycle_control(state, target, self.k_prop)
            state = step_unicycle(state, omega, v, dt)
        return state


def _relocate(s: VehicleState, q) -> VehicleState:
    if isinstance(s, Unicycle):
        return replace(s, x=float(q[0]), y=float(q[1]))
    return replace(s, p=(float(q[0]), float(q[1])))


def local_controller_round(Q: ConvexPolygon, states: Sequence[VehicleState], phi: DensityField,
                           delta: float, controller: LocalController, at_target_tol: float = 1e-12):
    """One synchronized round: fix centroid targets, run each controller for ``delta``.

    Returns ``(new_states, targets, before, after)`` with the distances to the
    targets.  A vehicle not strictly closer at the end of the round (and not
    already at its target) raises :class:`ControllerContractViolation`.
    """
    P = np.array([s.position for s in states], dtype=float)
    targets = analyze(Q, P, phi, cost=False).centroids
    out, before, after = [], [], []
    for i, (s, tgt) in enumerate(zip(states, targets)):
        d0 = math.hypot(P[i, 0] - tgt[0], P[i, 1] - tgt[1])
        s_new = controller.advance(s, tgt, delta)
        q = s_new.position
        if not Q.contains(q):
            s_new = _relocate(s_new, project_onto_polygon(q, Q))
            q = s_new.position
        d1 = math.hypot(q[0] - tgt[0], q[1] - tgt[1])
        if d0 > at_target_tol and not d1 < d0:
            raise ControllerContractViolation(
                f"vehicle {i} did not approach its target ({d0:.6g} -> {d1:.6g})", vehicle=i)
        out.append(s_new)
        before.append(d0)
        after.append(d1)
    return out, targets, np.array(before), np.array(after)


@dataclass
class RoundTrace:
    states: list = field(default_factory=list)
    targets: list = field(default_factory=list)
    before: list = field(default_factory=list)
    after: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    costs: list = field(default_factory=list)

    def __len__(self):
        return len(self.states)


def run_local_rounds(Q: ConvexPolygon, states: Sequence[VehicleState], phi: DensityField, delta: float,
                     controller: LocalController, rounds: int = 200, tol: float = 1e-2,
                     callback: Callable | None = None) -> RoundTrace:
    """Repeat :func:`local_controller_round` until the residual drops below ``tol``."""
    states = list(states)
    trace = RoundTrace()
    for k in range(rounds + 1):
        snap = analyze(Q, np.array([s.position for s in states]), phi)
        trace.states.append(list(states))
        trace.residuals.append(snap.residual)
        trace.costs.append(snap.cost)
        if callback is not None:
            callback(k, snap, states)
        if snap.residual < tol or k == rounds:
            break
        states, targets, d0, d1 = local_controller_round(Q, states, phi, delta, controller)
        trace.targets.append(targets)
        trace.before.append(d0)
        trace.after.append(d1)
    return trace
