"""Asynchronous distributed coverage as a deterministic discrete-event simulation.

Agents compute their own Voronoi cells from radius-limited sensing or
request/response messages, monitor their neighbours for activity, and run
one of two asynchronous Lloyd behaviours.  Every random quantity comes from
per-agent streams seeded by ``(seed, agent)``, so a run is a pure function of
its configuration and seed.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import TOL
from .density import DensityField, Uniform
from .descent import FlowTrace
from .errors import FairnessViolation, NonTermination, PropertyViolation
from .geometry import ConvexPolygon, _clip_labeled, _dist, project_onto_polygon
from .objective import analyze
from .quadrature import moments_batch

log = logging.getLogger(__name__)

DISK = "disk"

# event kinds
WAKE = "Wake"
REQUEST = "RequestToReply"
RESPONSE = "Response"
RECOMPUTE = "RequestRecomputation"
COLLECT = "Collect"
CONTROL = "Control"
STOP = "Stop"
TICK = "Tick"

# same-time ordering: motion ends, then wakes, deliveries, collects, control, monitoring
_PHASE = {STOP: 0, WAKE: 1, REQUEST: 2, RESPONSE: 2, COLLECT: 3, CONTROL: 4, TICK: 5, RECOMPUTE: 6}


# cells from partial information --------------------------------------------


def _candidate_labeled(p, R: float, others, Q: ConvexPolygon, sides: int = TOL.disk_polygon_sides):
    """Vertices and edge labels of ``Q`` ∩ disk polygon ∩ bisectors of ``others``.

    ``others`` yields ``(j, position)`` pairs.  Disk edges carry the label
    ``"disk"``, region edges ``None`` and bisector edges the generator index.
    """
    px, py = float(p[0]), float(p[1])
    verts = list(Q.vertices)
    labels = [None] * len(verts)
    extent = max(abs(x) + abs(y) for x, y in verts) + abs(px) + abs(py) + R
    for j, q in sorted(others, key=lambda jq: jq[0]):
        qx, qy = float(q[0]), float(q[1])
        nx, ny = px - qx, py - qy
        if nx == 0.0 and ny == 0.0:
            continue
        c = nx * 0.5 * (px + qx) + ny * 0.5 * (py + qy)
        verts, labels = _clip_labeled(verts, labels, nx, ny, c, j, extent)
        if not verts:
            return [], []
    # the disk polygon (apothem R) can only bind if some vertex lies beyond R
    if _reach((px, py), verts) > R:
        for k in range(sides):
            a = 2.0 * math.pi * (k + 0.5) / sides
            nx, ny = -math.cos(a), -math.sin(a)
            c = nx * px + ny * py - R
            verts, labels = _clip_labeled(verts, labels, nx, ny, c, DISK, extent)
            if not verts:
                return [], []
    return verts, labels


def candidate_cell(p, R: float, view, Q: ConvexPolygon, sides: int = TOL.disk_polygon_sides) -> ConvexPolygon:
    """Superset ``W(p, R)`` of the Voronoi cell of ``p`` from viewed positions.

    ``view`` maps agent ids to positions (a plain sequence of positions is
    indexed by order); only those within distance ``R`` of ``p`` are used.
    The disk is replaced by the regular polygon circumscribing it, so ``W``
    contains the exact set.
    """
    if R <= 0:
        raise ValueError("radius must be positive")
    items = view.items() if isinstance(view, dict) else enumerate(view)
    near = [(j, (float(q[0]), float(q[1]))) for j, q in items if _dist(p, q) <= R]
    verts, _ = _candidate_labeled(p, R, near, Q, sides)
    return ConvexPolygon(tuple(verts))


def _neighbors(verts, labels) -> frozenset:
    n = len(verts)
    out = set()
    for k, lab in enumerate(labels):
        if isinstance(lab, (int, np.integer)) and _dist(verts[k], verts[(k + 1) % n]) > TOL.face_length:
            out.add(int(lab))
    return frozenset(out)


def _reach(p, verts) -> float:
    return max(_dist(p, v) for v in verts) if verts else 0.0


@dataclass(frozen=True)
class RadiusResult:
    """Outcome of a radius adjustment: final radius, cell, neighbours, rounds."""

    radius: float
    cell: ConvexPolygon
    neighbors: frozenset
    iterations: int
    detected: tuple = ()


def _adjust(p, R0: float, detect: Callable, Q: ConvexPolygon, max_iter: int) -> RadiusResult:
    R = float(R0)
    if not R > 0:
        raise ValueError("initial radius must be positive")
    found = detect(R)
    verts, labels = _candidate_labeled(p, R, found, Q)
    it = 0
    while R < 2.0 * _reach(p, verts):
        it += 1
        if it > max_iter:
            raise NonTermination(f"radius still growing after {max_iter} rounds (R={R:.6g})")
        R = 2.0 * _reach(p, verts)
        found = detect(R)
        verts, labels = _candidate_labeled(p, R, found, Q)
    R = 2.0 * _reach(p, verts)
    return RadiusResult(R, ConvexPolygon(tuple(verts)), _neighbors(verts, labels), it,
                        tuple(sorted(j for j, _ in found)))


def adjust_sensing_radius(i: int, positions, Q: ConvexPolygon, R0: float,
                          max_iter: int = TOL.adjust_radius_max_iter) -> RadiusResult:
    """Grow the sensing radius of agent ``i`` until its candidate cell is exact.

    Sensing detects every other agent within the current radius of the true
    ``positions``.  The final radius is twice the farthest cell vertex.
    """
    P = np.asarray(positions, dtype=float).reshape(-1, 2)
    p = (float(P[i, 0]), float(P[i, 1]))

    def detect(R):
        d = np.hypot(P[:, 0] - p[0], P[:, 1] - p[1])
        return [(int(j), (float(P[j, 0]), float(P[j, 1]))) for j in np.nonzero(d <= R)[0] if j != i]

    return _adjust(p, R0, detect, Q, max_iter)


def weight_map(neighbors, active, n: int) -> np.ndarray:
    """``w_j = 3`` for active neighbours, ``1`` for inactive ones, ``0`` otherwise."""
    w = np.zeros(n, dtype=np.int64)
    for j in neighbors:
        w[j] = 3 if active[j] else 1
    return w


# events -------------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    agent: int
    payload: tuple = ()

    def line(self) -> str:
        return f"{self.time!r} {self.kind} {self.agent} {self.payload!r}"


# monitoring ---------------------------------------------------------------


class Monitor:
    """Cell maintenance and activity detection for one agent.

    The stored weights follow decreases immediately, so a neighbour that
    stops and later moves again is detected again; a jump of two or more in
    any weight emits a recomputation request and resets the stored weights.
    """

    def __init__(self, i: int, Q: ConvexPolygon, R0: float):
        self.i = i
        self.Q = Q
        self.R = R0
        self.w = None
        self.result: Optional[RadiusResult] = None
        self.transitions = []

    def _weights(self, positions, active):
        self.result = adjust_sensing_radius(self.i, positions, self.Q, self.R)
        self.R = self.result.radius
        return weight_map(self.result.neighbors, active, len(positions))

    def start(self, positions, active):
        self.w = self._weights(positions, active)

    def tick(self, t: float, positions, active) -> Optional[Event]:
        new = self._weights(positions, active)
        jumped = np.nonzero(new >= self.w + 2)[0]
        if len(jumped):
            trans = tuple((int(j), int(self.w[j]), int(new[j])) for j in jumped)
            self.transitions.extend(trans)
            self.w = new
            return Event(t, RECOMPUTE, self.i, trans)
        self.w = np.minimum(self.w, new)
        return None


def monitoring_run(i: int, world: Callable, Q: ConvexPolygon, t0: float, dt: float,
                   period: float, R0: float = 0.1) -> list:
    """Run the monitor of agent ``i`` over ``[t0, t0 + dt]`` at the given period.

    ``world(t)`` returns ``(positions, active_flags)``.  Returns the emitted
    recomputation events; each carries ``(j, old_weight, new_weight)`` tuples.
    """
    mon = Monitor(i, Q, R0)
    P, act = world(t0)
    mon.start(P, act)
    events = []
    steps = int(math.floor(dt / period + 1e-9))
    for k in range(1, steps + 1):
        t = t0 + k * period
        P, act = world(t)
        ev = mon.tick(t, P, act)
        if ev is not None:
            events.append(ev)
    return events


# network simulation --------------------------------------------------------


@dataclass
class NetworkConfig:
    """Timing, messaging and policy parameters of the simulated network."""

    t_min: float = 0.1
    t_max: float = 0.2
    clock_rates: Optional[Sequence[float]] = None
    latency: float = 0.0
    jitter: float = 0.0
    staleness_budget: float = 1.0
    monitor_period: float = 0.02
    step_fraction: float = 0.9
    thread_policy: str = "both"
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        if self.latency < 0 or self.jitter < 0:
            raise ValueError("latency and jitter must be nonnegative")
        if self.thread_policy not in ("both", "alternate"):
            raise ValueError("thread_policy must be 'both' or 'alternate'")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")


@dataclass
class AgentCore:
    id: int
    position: tuple
    radius: float
    clock_rate: float = 1.0
    fairness_bound: int = 1
    view: dict = field(default_factory=dict)
    weights: Optional[np.ndarray] = None
    cell: Optional[ConvexPolygon] = None
    neighbors: frozenset = frozenset()
    wakes: list = field(default_factory=list)
    # motion segment: position(t) = seg_p + u * (min(t, seg_end) - seg_start)
    seg_start: float = 0.0
    seg_end: float = 0.0
    seg_p: tuple = (0.0, 0.0)
    u: tuple = (0.0, 0.0)
    since_info: int = 0
    since_control: int = 0

    def position_at(self, t: float):
        s = min(max(t, self.seg_start), self.seg_end) - self.seg_start
        return (self.seg_p[0] + self.u[0] * s, self.seg_p[1] + self.u[1] * s)

    def active_at(self, t: float) -> bool:
        return self.seg_start <= t < self.seg_end and math.hypot(*self.u) > TOL.active_speed


@dataclass
class _InfoThread:
    start: float
    round_id: int
    R: float
    p: tuple
    rounds: int = 1
    replies: dict = field(default_factory=dict)


class NetworkState:
    """Event queue, agents and global clock of one simulation."""

    def __init__(self, Q: ConvexPolygon, P0, phi: DensityField, config: NetworkConfig):
        self.Q = Q
        self.phi = phi
        self.cfg = config
        P0 = np.asarray(P0, dtype=float).reshape(-1, 2)
        n = len(P0)
        rates = [1.0] * n if config.clock_rates is None else [float(r) for r in config.clock_rates]
        if len(rates) != n or min(rates) <= 0:
            raise ValueError("need one positive clock rate per agent")
        bound = 1 if config.thread_policy == "both" else 2
        self.agents = [
            AgentCore(i, (float(P0[i, 0]), float(P0[i, 1])), 1.0, rates[i], bound,
                      seg_p=(float(P0[i, 0]), float(P0[i, 1])))
            for i in range(n)
        ]
        self.n = n
        self.time = 0.0
        self._seq = 0
        self.queue = []
        self.log: list[str] = []
        self.sched_rng = [np.random.default_rng([config.seed, 0, i]) for i in range(n)]
        self.msg_rng = [np.random.default_rng([config.seed, 1, i]) for i in range(n)]
        self.reads = []  # (agent, distance, radius) for every view read
        self.stale_views = 0
        self.trace = FlowTrace()
        self.recomputations: list[Event] = []
        self.segments = []

    # bookkeeping -----------------------------------------------------------

    def positions(self, t: Optional[float] = None) -> np.ndarray:
        t = self.time if t is None else t
        return np.array([a.position_at(t) for a in self.agents])

    def active(self, t: Optional[float] = None):
        t = self.time if t is None else t
        return [a.active_at(t) for a in self.agents]

    def push(self, ev: Event):
        if ev.time < self.time:
            raise RuntimeError("event scheduled in the past")
        heapq.heappush(self.queue, (ev.time, _PHASE[ev.kind], ev.agent, self._seq, ev))
        self._seq += 1

    def record(self, ev: Event):
        P = self.positions()
        snap = analyze(self.Q, P, self.phi)
        self.trace.append(self.time, P, snap.cost, snap.residual, f"{ev.kind}:{ev.agent}")
        coords = " ".join(f"{x!r},{y!r}" for x, y in P)
        self.log.append(f"{ev.line()} | {snap.cost.total!r} | {coords}")
        return snap

    def schedule_wake(self, a: AgentCore, after: float):
        gap = float(self.sched_rng[a.id].uniform(self.cfg.t_min, self.cfg.t_max)) / a.clock_rate
        t = after + gap
        a.wakes.append(t)
        self.push(Event(t, WAKE, a.id))

    def delay(self, sender: int) -> float:
        j = float(self.msg_rng[sender].uniform(0.0, self.cfg.jitter)) if self.cfg.jitter > 0 else 0.0
        return self.cfg.latency + j

    def read_view(self, a: AgentCore, p, R: float, entries):
        """Entries of ``a``'s view within ``R`` of ``p``; every read is logged."""
        out = []
        for j, (q, stamp) in sorted(entries.items()):
            d = _dist(p, q)
            if d <= R:
                self.reads.append((a.id, d, R))
                out.append((j, q))
        return out

    def move(self, a: AgentCore, u, duration: float):
        p = a.position_at(self.time)
        a.seg_start, a.seg_p = self.time, p
        a.u = (float(u[0]), float(u[1]))
        a.seg_end = self.time + max(duration, 0.0)
        # stay inside Q: shorten the segment at the boundary
        end = a.position_at(a.seg_end)
        if not self.Q.contains(end):
            q = project_onto_polygon(end, self.Q)
            a.seg_end = self.time
            a.seg_p = p
            a.u = (0.0, 0.0)
            log.info("agent %d: step leaves Q, projected to %s", a.id, q)
        if a.seg_end > self.time:
            self.push(Event(a.seg_end, STOP, a.id))

    def centroid(self, cell: ConvexPolygon, fallback):
        m = moments_batch([cell], self.phi, flag_sharp=False)[0][0]
        if m is None:
            return tuple(fallback), 0.0
        return m.centroid, m.mass

    def initialize(self):
        """Synchronized start with full views and exact cells."""
        P = self.positions(0.0)
        for a in self.agents:
            res = adjust_sensing_radius(a.id, P, self.Q, TOL.active_speed + 2.0 * self.Q.diameter())
            a.cell, a.neighbors, a.radius = res.cell, res.neighbors, res.radius
            a.view = {j: ((float(P[j, 0]), float(P[j, 1])), 0.0) for j in range(self.n) if j != a.id}
        for a in self.agents:
            self.schedule_wake(a, 0.0)


# behaviour I: communication, small gradient steps --------------------------


class _BehaviorI:
    def __init__(self, net: NetworkState, delta0: float):
        if not delta0 > 0:
            raise ValueError("delta0 must be positive")
        self.net = net
        self.delta0 = delta0
        self.threads: dict[int, _InfoThread] = {}
        self.rounds = 0
        self.wake_index = [0] * net.n

    def timeout(self) -> float:
        return 2.0 * (self.net.cfg.latency + self.net.cfg.jitter)

    def send_round(self, a: AgentCore, R: float):
        net = self.net
        p = a.position_at(net.time)
        self.rounds += 1
        th = self.threads.get(a.id)
        start = th.start if th is not None else net.time
        count = th.rounds + 1 if th is not None else 1
        if count > TOL.adjust_radius_max_iter:
            raise NonTermination(f"agent {a.id}: radius adjustment does not settle")
        self.threads[a.id] = _InfoThread(start, self.rounds, R, p, count)
        P = net.positions()
        to = tuple(j for j in range(net.n) if j != a.id and _dist(p, P[j]) <= R)
        if to:
            net.push(Event(net.time + net.delay(a.id), REQUEST, a.id, (to, p, self.rounds)))
        net.push(Event(net.time + self.timeout(), COLLECT, a.id, (self.rounds,)))

    def on_wake(self, a: AgentCore):
        net = self.net
        k = self.wake_index[a.id]
        self.wake_index[a.id] += 1
        info = net.cfg.thread_policy == "both" or k % 2 == 0
        control = net.cfg.thread_policy == "both" or k % 2 == 1
        a.since_info = 0 if info else a.since_info + 1
        a.since_control = 0 if control else a.since_control + 1
        if a.since_info >= a.fairness_bound or a.since_control >= a.fairness_bound:
            raise FairnessViolation(f"agent {a.id}: a thread starved for {a.fairness_bound} wakes")
        if info:
            self.threads.pop(a.id, None)
            self.send_round(a, a.radius)
        if control:
            net.push(Event(net.time, CONTROL, a.id))
        net.schedule_wake(a, net.time)

    def on_request(self, ev: Event):
        """Every recipient answers within the distance to the requester."""
        net = self.net
        to, p_src, rid = ev.payload
        src = ev.agent
        P = net.positions()
        for j in to:
            q = (float(P[j, 0]), float(P[j, 1]))
            radius = _dist(q, p_src)
            # broadcast within the request distance, and always addressed to the requester,
            # which may have moved out of that disk since asking
            hear = tuple(r for r in range(net.n) if r != j and (r == src or _dist(q, P[r]) <= radius))
            net.push(Event(net.time + net.delay(j), RESPONSE, j, (hear, q, net.time, rid, src)))

    def on_response(self, ev: Event):
        net = self.net
        j = ev.agent
        hear, q, stamp, rid, src = ev.payload
        for r in hear:
            a = net.agents[r]
            old = a.view.get(j)
            if old is None or old[1] <= stamp:
                a.view[j] = (q, stamp)
        a = net.agents[src]
        th = self.threads.get(src)
        if src not in hear or th is None:
            return
        if stamp < th.start - net.cfg.staleness_budget:
            net.stale_views += 1
            log.warning("agent %d: stale response from %d (stamp %.6g, thread %.6g); re-querying",
                        src, j, stamp, th.start)
            self.send_round(a, th.R)
            return
        if rid == th.round_id:
            th.replies[j] = (q, stamp)

    def on_collect(self, ev: Event):
        net = self.net
        a = net.agents[ev.agent]
        th = self.threads.get(a.id)
        if th is None or ev.payload[0] != th.round_id:
            return
        found = net.read_view(a, th.p, th.R, th.replies)
        verts, labels = _candidate_labeled(th.p, th.R, found, net.Q)
        bound = 2.0 * _reach(th.p, verts)
        if th.R < bound:
            self.send_round(a, bound)
            return
        a.cell = ConvexPolygon(tuple(verts))
        a.neighbors = _neighbors(verts, labels)
        a.radius = bound
        self.threads.pop(a.id, None)

    def on_control(self, a: AgentCore):
        net = self.net
        p = a.position_at(net.time)
        c, m = net.centroid(a.cell, p)
        u = np.array([m * (c[0] - p[0]), m * (c[1] - p[1])])
        n = float(np.hypot(*u))
        if n > 1.0:
            u = u / n
        net.move(a, u, self.delta0)


def _drain(net: NetworkState, handle: Callable, horizon: float, stop: Optional[Callable] = None):
    while net.queue:
        t, _, _, _, ev = heapq.heappop(net.queue)
        if t > horizon:
            heapq.heappush(net.queue, (t, _PHASE[ev.kind], ev.agent, 0, ev))
            break
        net.time = t
        handle(ev)
        snap = net.record(ev)
        if stop is not None and stop(net, snap):
            break
    return net.trace


def coverage_behavior_I(Q: ConvexPolygon, P0, phi: DensityField | None = None, delta0: float = 0.05,
                        horizon: float = 50.0, config: NetworkConfig | None = None,
                        tol: float | None = None) -> tuple[FlowTrace, NetworkState]:
    """Asynchronous gradient steps with cells kept by request/response messages.

    At every wake an agent runs the information thread (radius adjustment by
    messages), the control thread (move for ``delta0`` with velocity
    ``M (C - p)``, saturated to unit speed) or both, per the thread policy.
    Stops at ``horizon`` or, with ``tol``, once the global residual and all
    motion have ceased below it.
    """
    phi = Uniform() if phi is None else phi
    net = NetworkState(Q, P0, phi, config or NetworkConfig())
    beh = _BehaviorI(net, delta0)
    net.initialize()

    def handle(ev: Event):
        a = net.agents[ev.agent]
        if ev.kind == WAKE:
            beh.on_wake(a)
        elif ev.kind == REQUEST:
            beh.on_request(ev)
        elif ev.kind == RESPONSE:
            beh.on_response(ev)
        elif ev.kind == COLLECT:
            beh.on_collect(ev)
        elif ev.kind == CONTROL:
            beh.on_control(a)

    stop = None
    if tol is not None:
        def stop(net, snap):
            return snap.residual < tol and not any(net.active())
    net.record(Event(0.0, "Start", -1))
    _drain(net, handle, horizon, stop)
    return net.trace, net


def static_cells_by_messages(Q: ConvexPolygon, P, latency: float = 0.0, jitter: float = 0.0,
                             R0: float = 0.1, seed: int = 0) -> list[RadiusResult]:
    """Cells of static agents obtained through one message-based radius adjustment each."""
    cfg = NetworkConfig(latency=latency, jitter=jitter, seed=seed)
    net = NetworkState(Q, P, Uniform(), cfg)
    beh = _BehaviorI(net, 1.0)
    for a in net.agents:
        a.radius = R0
        beh.send_round(a, R0)

    def handle(ev):
        if ev.kind == REQUEST:
            beh.on_request(ev)
        elif ev.kind == RESPONSE:
            beh.on_response(ev)
        elif ev.kind == COLLECT:
            beh.on_collect(ev)

    while net.queue:
        t, _, _, _, ev = heapq.heappop(net.queue)
        net.time = t
        handle(ev)
    return [RadiusResult(a.radius, a.cell, a.neighbors, 0) for a in net.agents]


def adjust_communication_radius(i: int, Q: ConvexPolygon, P, latency: float = 0.0, jitter: float = 0.0,
                                R0: float = 0.1, seed: int = 0) -> RadiusResult:
    """Message-based radius adjustment for agent ``i`` among static agents."""
    cfg = NetworkConfig(latency=latency, jitter=jitter, seed=seed)
    net = NetworkState(Q, P, Uniform(), cfg)
    beh = _BehaviorI(net, 1.0)
    a = net.agents[i]
    a.radius = R0
    beh.send_round(a, R0)
    while net.queue:
        t, _, _, _, ev = heapq.heappop(net.queue)
        net.time = t
        if ev.kind == REQUEST:
            beh.on_request(ev)
        elif ev.kind == RESPONSE:
            beh.on_response(ev)
        elif ev.kind == COLLECT:
            beh.on_collect(ev)
    return RadiusResult(a.radius, a.cell, a.neighbors, beh.rounds - 1, tuple(sorted(a.view)))


# behaviour II: sensing, monitored motion toward centroids -----------------


class _BehaviorII:
    def __init__(self, net: NetworkState, check_tol: float = 1e-12):
        self.net = net
        self.monitors = {}
        self.targets = {}
        self.tick_pending = False
        self.check_tol = check_tol

    def aim(self, a: AgentCore, cell: ConvexPolygon, until: float):
        """Start moving toward the centroid of ``cell`` until ``until``."""
        net = self.net
        p = a.position_at(net.time)
        c, _ = net.centroid(cell, p)
        d = np.array([c[0] - p[0], c[1] - p[1]])
        n = float(np.hypot(*d))
        u = d / n if n > 1.0 else d
        self.targets[a.id] = (p, c)
        net.move(a, u, until - net.time)
        if a.active_at(net.time) and not self.tick_pending:
            net.push(Event(net.time + net.cfg.monitor_period, TICK, -1))
            self.tick_pending = True

    def close_segment(self, a: AgentCore):
        """Check that the agent did not end farther from the centroid it aimed at."""
        tgt = self.targets.pop(a.id, None)
        if tgt is None:
            return
        p0, c = tgt
        p1 = self.net.agents[a.id].position_at(self.net.time)
        before, after = _dist(p0, c), _dist(p1, c)
        self.net.segments.append((a.id, before, after))
        if after > before + self.check_tol * (1 + before):
            raise PropertyViolation(f"agent {a.id} moved away from its centroid", agent=a.id)
        if before > self.check_tol and p0 != p1 and not after < before:
            raise PropertyViolation(f"agent {a.id} moved without approaching its centroid", agent=a.id)

    def on_wake(self, a: AgentCore):
        net = self.net
        P = net.positions()
        mon = Monitor(a.id, net.Q, a.radius)
        mon.start(P, net.active())
        a.radius = mon.R
        a.cell, a.neighbors = mon.result.cell, mon.result.neighbors
        a.weights = mon.w
        self.monitors[a.id] = mon
        dt = min(net.cfg.step_fraction * net.cfg.t_min / a.clock_rate, 1.0)
        self.close_segment(a)
        self.aim(a, a.cell, net.time + dt)
        net.schedule_wake(a, net.time)

    def on_stop(self, a: AgentCore):
        if not a.active_at(self.net.time):
            self.close_segment(a)
            self.monitors.pop(a.id, None)

    def on_tick(self):
        net = self.net
        self.tick_pending = False
        moving = [a for a in net.agents if a.active_at(net.time)]
        if not moving:
            return
        P = net.positions()
        act = net.active()
        for a in moving:
            mon = self.monitors.get(a.id)
            if mon is None:
                continue
            ev = mon.tick(net.time, P, act)
            a.radius = mon.R
            a.cell, a.neighbors, a.weights = mon.result.cell, mon.result.neighbors, mon.w
            if ev is not None:
                net.recomputations.append(ev)
                net.log.append(f"{ev.line()}")
                end = a.seg_end
                self.close_segment(a)
                self.aim(a, a.cell, end)
        if any(net.active()) and not self.tick_pending:
            net.push(Event(net.time + net.cfg.monitor_period, TICK, -1))
            self.tick_pending = True


def coverage_behavior_II(Q: ConvexPolygon, P0, phi: DensityField | None = None, horizon: float = 50.0,
                         config: NetworkConfig | None = None, tol: float | None = None
                         ) -> tuple[FlowTrace, NetworkState]:
    """Asynchronous Lloyd motion with sensing and activity monitoring.

    At each wake an agent recomputes its cell, picks ``u = saturate(C - p)``
    and moves for a time shorter than its minimum wake gap; its monitor
    re-aims it whenever a neighbour becomes active or an active agent becomes
    a neighbour.  Each motion segment is checked to end no farther from the
    centroid it aimed at.
    """
    phi = Uniform() if phi is None else phi
    net = NetworkState(Q, P0, phi, config or NetworkConfig())
    beh = _BehaviorII(net)
    net.initialize()

    def handle(ev: Event):
        if ev.kind == WAKE:
            beh.on_wake(net.agents[ev.agent])
        elif ev.kind == STOP:
            beh.on_stop(net.agents[ev.agent])
        elif ev.kind == TICK:
            beh.on_tick()

    stop = None
    if tol is not None:
        def stop(net, snap):
            return snap.residual < tol and not any(net.active())
    net.record(Event(0.0, "Start", -1))
    _drain(net, handle, horizon, stop)
    return net.trace, net


def replay_bytes(net: NetworkState) -> bytes:
    """Serialized event log; identical configurations give identical bytes."""
    return ("\n".join(net.log) + "\n").encode()


def locality_breaches(net: NetworkState) -> list:
    """View reads beyond the reading agent's radius (should be empty)."""
    return [r for r in net.reads if r[1] > r[2]]
