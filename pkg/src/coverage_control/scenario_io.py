"""Scenario files, trajectory logs, SVG snapshots and the run dispatcher.

Scenario files are flat: ``[section]`` headers followed by ``key = value``
lines, ``#`` comments, pairs written ``x, y`` and vertex or position lists as
``x, y; x, y; ...``.  Example::

    [region]
    vertices = -1, -1; 1, -1; 1, 1; -1, 1
    [agents]
    n = 32
    positions = random
    [density]
    kind = gaussian
    gain = 5
    [algorithm]
    name = lloyd-continuous
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .density import Disk, Ellipse, Gaussian, Line, Uniform, power, quadratic
from .errors import ParseError, ValidationError
from .geometry import ConvexPolygon, VoronoiDiagram, voronoi_diagram

ALGORITHMS = ("lloyd-continuous", "lloyd-map", "pcenter", "pd", "unicycle", "local-rounds", "dist-I", "dist-II")
DENSITY_KEYS = {
    "uniform": (),
    "gaussian": ("center", "gain"),
    "line": ("a", "b", "c", "k"),
    "ellipse": ("a", "b", "xc", "yc", "r", "k"),
    "disk": ("a", "b", "xc", "yc", "r", "k", "ell"),
}
DEFAULT_REGION = ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0))


# config -------------------------------------------------------------------


@dataclass(frozen=True)
class DensitySpec:
    kind: str = "uniform"
    center: tuple = (0.0, 0.0)
    gain: float = 1.0
    a: float = 1.0
    b: float = 1.0
    c: float = 0.0
    xc: float = 0.0
    yc: float = 0.0
    r: float = 1.0
    k: float = 1.0
    ell: float = 10.0

    def build(self):
        if self.kind == "uniform":
            return Uniform()
        if self.kind == "gaussian":
            return Gaussian(tuple(self.center), self.gain)
        if self.kind == "line":
            return Line(self.a, self.b, self.c, self.k)
        if self.kind == "ellipse":
            return Ellipse(self.a, self.b, self.xc, self.yc, self.r, self.k)
        return Disk(self.a, self.b, self.xc, self.yc, self.r, self.k, self.ell)


@dataclass(frozen=True)
class NetworkSpec:
    t_min: float = 0.1
    t_max: float = 0.2
    clock_rates: Optional[tuple] = None
    rate_range: Optional[tuple] = None
    latency: float = 0.0
    jitter: float = 0.0
    staleness_budget: float = 1.0
    monitor_period: float = 0.02
    step_fraction: float = 0.9
    thread_policy: str = "both"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one run."""

    n: int
    algorithm: str
    vertices: tuple = DEFAULT_REGION
    positions: Optional[tuple] = None
    headings: Optional[tuple] = None
    density: DensitySpec = DensitySpec()
    f: str = "quadratic"
    k_prop: float = 1.0
    k_deriv: float = 1.0
    delta0: float = 0.05
    delta: float = 0.5
    h: float = 0.02
    substep: float = 0.01
    max_steps: int = 5000
    tol: float = 1e-3
    horizon: float = 50.0
    network: NetworkSpec = NetworkSpec()
    seed: int = 0
    decimate: int = 1
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def region(self) -> ConvexPolygon:
        return ConvexPolygon(tuple(self.vertices))

    def performance(self):
        return parse_performance(self.f)

    def initial_positions(self, seed: Optional[int] = None) -> np.ndarray:
        """Given positions, or uniform samples in ``Q`` drawn from the seed."""
        if self.positions is not None:
            return np.array(self.positions, dtype=float).reshape(-1, 2)
        rng = np.random.default_rng([self.seed if seed is None else seed, 0])
        Q = self.region
        v = Q.as_array()
        lo, hi = v.min(axis=0), v.max(axis=0)
        out = []
        while len(out) < self.n:
            q = rng.uniform(lo, hi)
            if Q.contains(q, tol=0.0):
                out.append(q)
        return np.array(out)

    def initial_headings(self, seed: Optional[int] = None) -> np.ndarray:
        if self.headings is not None:
            return np.array(self.headings, dtype=float)
        rng = np.random.default_rng([self.seed if seed is None else seed, 1])
        return rng.uniform(-math.pi, math.pi, self.n)

    def clock_rates(self, seed: Optional[int] = None):
        net = self.network
        if net.clock_rates is not None:
            return list(net.clock_rates)
        if net.rate_range is not None:
            rng = np.random.default_rng([self.seed if seed is None else seed, 2])
            return rng.uniform(net.rate_range[0], net.rate_range[1], self.n).tolist()
        return None

    def network_config(self, seed: Optional[int] = None):
        from .distributed import NetworkConfig
        net = self.network
        seed = self.seed if seed is None else seed
        return NetworkConfig(net.t_min, net.t_max, self.clock_rates(seed), net.latency, net.jitter,
                             net.staleness_budget, net.monitor_period, net.step_fraction,
                             net.thread_policy, seed)


def parse_performance(text: str):
    if text == "quadratic":
        return quadratic()
    if text.startswith("power:"):
        return power(float(text.split(":", 1)[1]))
    raise ValueError(f"unknown performance function {text!r}")


# parsing ------------------------------------------------------------------


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _pair(s: str) -> tuple:
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'x, y', got {s!r}")
    return (_float(parts[0]), _float(parts[1]))


def _pairs(s: str) -> tuple:
    return tuple(_pair(p) for p in s.split(";") if p.strip())


def _floats(s: str) -> tuple:
    return tuple(_float(p) for p in s.replace(";", ",").split(",") if p.strip())


def _int(s: str) -> int:
    return int(s)


def _random_or(parser):
    def parse(s):
        return None if s.strip() == "random" else parser(s)
    return parse


def _rates(s: str):
    s = s.strip()
    if s.startswith("random:"):
        lo, hi = _pair(s[len("random:"):])
        return ("range", (lo, hi))
    return ("list", _floats(s))


_SCHEMA = {
    "region": {"vertices": _pairs},
    "agents": {"n": _int, "positions": _random_or(_pairs), "headings": _random_or(_floats)},
    "density": {"kind": str, "center": _pair, "gain": _float, "a": _float, "b": _float, "c": _float,
                "xc": _float, "yc": _float, "r": _float, "r2": _float, "k": _float, "ell": _float},
    "performance": {"f": str},
    "algorithm": {"name": str, "k_prop": _float, "k_deriv": _float, "delta0": _float, "delta": _float,
                  "h": _float, "substep": _float, "max_steps": _int, "tol": _float, "horizon": _float},
    "network": {"t_min": _float, "t_max": _float, "clock_rates": _rates, "latency": _float, "jitter": _float,
                "staleness_budget": _float, "monitor_period": _float, "step_fraction": _float,
                "thread_policy": str},
    "run": {"seed": _int, "decimate": _int},
}


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse and validate a scenario file.

    Syntax problems raise :class:`ParseError` and semantic ones
    :class:`ValidationError`, both carrying the offending line number.
    """
    values: dict = {}
    lines: dict = {}
    headers: dict = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header {raw.strip()!r}", line=no)
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ParseError(f"unknown section {section!r}", line=no)
            if section in headers:
                raise ParseError("duplicate section", line=no, section=section)
            headers[section] = no
            continue
        if section is None:
            raise ParseError("key outside any section", line=no)
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=no, section=section)
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ParseError(f"unknown key {key!r}", line=no, section=section)
        if (section, key) in values:
            raise ParseError(f"duplicate key {key!r}", line=no, section=section)
        try:
            values[(section, key)] = _SCHEMA[section][key](val)
        except (ValueError, TypeError) as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", line=no, section=section) from None
        lines[(section, key)] = no

    def need(sec, key):
        if (sec, key) not in values:
            raise ParseError(f"missing required key {key!r}", line=headers.get(sec), section=sec)
        return values[(sec, key)]

    n = need("agents", "n")
    algorithm = need("algorithm", "name")
    get = lambda sec, key, default: values.get((sec, key), default)  # noqa: E731

    kind = get("density", "kind", "uniform")
    if kind not in DENSITY_KEYS:
        raise ValidationError(f"unknown density kind {kind!r}", lines.get(("density", "kind")))
    dens = {}
    for (sec, key), val in values.items():
        if sec != "density" or key == "kind":
            continue
        base = "r" if key == "r2" else key
        if base not in DENSITY_KEYS[kind]:
            raise ValidationError(f"key {key!r} does not apply to density {kind!r}", lines[(sec, key)])
        if key == "r2":
            if ("density", "r") in values:
                raise ValidationError("give either r or r2, not both", lines[(sec, key)])
            if val < 0:
                raise ValidationError("r2 must be nonnegative", lines[(sec, key)])
            val = math.sqrt(val)
        dens[base] = val

    rates = get("network", "clock_rates", None)
    net = NetworkSpec(**{k: values[("network", k)] for k in ("t_min", "t_max", "latency", "jitter",
                                                             "staleness_budget", "monitor_period",
                                                             "step_fraction", "thread_policy")
                         if ("network", k) in values},
                      clock_rates=rates[1] if rates and rates[0] == "list" else None,
                      rate_range=rates[1] if rates and rates[0] == "range" else None)
    algo = {k: values[("algorithm", k)] for k in ("k_prop", "k_deriv", "delta0", "delta", "h", "substep",
                                                  "max_steps", "tol", "horizon") if ("algorithm", k) in values}
    cfg = ScenarioConfig(
        n=n,
        algorithm=algorithm,
        vertices=get("region", "vertices", DEFAULT_REGION),
        positions=get("agents", "positions", None),
        headings=get("agents", "headings", None),
        density=DensitySpec(kind=kind, **dens),
        f=get("performance", "f", "quadratic"),
        network=net,
        seed=get("run", "seed", 0),
        decimate=get("run", "decimate", 1),
        lines=lines,
        **algo,
    )
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    """Raise :class:`ValidationError` when the configuration is inconsistent."""
    L = cfg.lines.get
    if cfg.n < 1:
        raise ValidationError("n must be at least 1", L(("agents", "n")))
    if cfg.algorithm not in ALGORITHMS:
        raise ValidationError(f"unknown algorithm {cfg.algorithm!r}; expected one of {', '.join(ALGORITHMS)}",
                              L(("algorithm", "name")))
    if len(cfg.vertices) < 3:
        raise ValidationError("region needs at least three vertices", L(("region", "vertices")))
    # vertices must already form a convex polygon in the given cyclic order
    raw = list(cfg.vertices)
    area2 = sum(raw[k][0] * raw[(k + 1) % len(raw)][1] - raw[(k + 1) % len(raw)][0] * raw[k][1]
                for k in range(len(raw)))
    ordered = raw if area2 > 0 else raw[::-1]
    if not ConvexPolygon(tuple(ordered)).is_convex():
        raise ValidationError("region is nonconvex", L(("region", "vertices")))
    Q = ConvexPolygon.from_vertices(raw)
    if cfg.positions is not None:
        if len(cfg.positions) != cfg.n:
            raise ValidationError(f"{len(cfg.positions)} positions for n = {cfg.n}", L(("agents", "positions")))
        for i, p in enumerate(cfg.positions):
            if not Q.contains(p):
                raise ValidationError(f"position {i} {p} lies outside the region", L(("agents", "positions")))
    if cfg.headings is not None and len(cfg.headings) != cfg.n:
        raise ValidationError(f"{len(cfg.headings)} headings for n = {cfg.n}", L(("agents", "headings")))
    for key in ("k_prop", "k_deriv", "delta0", "delta", "h", "substep", "tol", "horizon"):
        if not getattr(cfg, key) > 0:
            raise ValidationError(f"{key} must be positive", L(("algorithm", key)))
    if cfg.max_steps < 1:
        raise ValidationError("max_steps must be at least 1", L(("algorithm", "max_steps")))
    if cfg.decimate < 1:
        raise ValidationError("decimate must be at least 1", L(("run", "decimate")))
    try:
        cfg.performance().check()
    except ValueError as exc:
        raise ValidationError(str(exc), L(("performance", "f"))) from None
    try:
        cfg.density.build()
    except ValueError as exc:
        raise ValidationError(str(exc), L(("density", "kind"))) from None
    d = cfg.density
    if d.kind in ("gaussian", "line", "ellipse", "disk") and (d.gain if d.kind == "gaussian" else d.k) <= 0:
        raise ValidationError("density gain must be positive", L(("density", "gain" if d.kind == "gaussian" else "k")))
    net = cfg.network
    if not 0 < net.t_min < net.t_max:
        raise ValidationError("need 0 < t_min < t_max", L(("network", "t_min")))
    if net.clock_rates is not None and (len(net.clock_rates) != cfg.n or min(net.clock_rates) <= 0):
        raise ValidationError("need one positive clock rate per agent", L(("network", "clock_rates")))
    if net.rate_range is not None and not 0 < net.rate_range[0] <= net.rate_range[1]:
        raise ValidationError("clock rate range must be positive and ordered", L(("network", "clock_rates")))
    if net.thread_policy not in ("both", "alternate"):
        raise ValidationError("thread_policy must be 'both' or 'alternate'", L(("network", "thread_policy")))
    if net.latency < 0 or net.jitter < 0:
        raise ValidationError("latency and jitter must be nonnegative", L(("network", "latency")))
    if not 0 < net.step_fraction < 1:
        raise ValidationError("step_fraction must lie in (0, 1)", L(("network", "step_fraction")))
    if not net.monitor_period > 0:
        raise ValidationError("monitor_period must be positive", L(("network", "monitor_period")))


def _fmt(x) -> str:
    return repr(float(x))


def _fmt_pairs(ps) -> str:
    return "; ".join(f"{_fmt(x)}, {_fmt(y)}" for x, y in ps)


def format_scenario(cfg: ScenarioConfig) -> str:
    """Canonical text of a configuration; parsing it gives back an equal config."""
    out = ["[region]", f"vertices = {_fmt_pairs(cfg.vertices)}", "", "[agents]", f"n = {cfg.n}",
           f"positions = {'random' if cfg.positions is None else _fmt_pairs(cfg.positions)}",
           f"headings = {'random' if cfg.headings is None else ', '.join(map(_fmt, cfg.headings))}",
           "", "[density]", f"kind = {cfg.density.kind}"]
    for key in DENSITY_KEYS[cfg.density.kind]:
        val = getattr(cfg.density, key)
        out.append(f"{key} = {_fmt_pairs([val]) if key == 'center' else _fmt(val)}")
    out += ["", "[performance]", f"f = {cfg.f}", "", "[algorithm]", f"name = {cfg.algorithm}"]
    for key in ("k_prop", "k_deriv", "delta0", "delta", "h", "substep"):
        out.append(f"{key} = {_fmt(getattr(cfg, key))}")
    out += [f"max_steps = {cfg.max_steps}", f"tol = {_fmt(cfg.tol)}", f"horizon = {_fmt(cfg.horizon)}"]
    net = cfg.network
    out += ["", "[network]"]
    for key in ("t_min", "t_max"):
        out.append(f"{key} = {_fmt(getattr(net, key))}")
    if net.clock_rates is not None:
        out.append(f"clock_rates = {', '.join(map(_fmt, net.clock_rates))}")
    elif net.rate_range is not None:
        out.append(f"clock_rates = random:{_fmt(net.rate_range[0])}, {_fmt(net.rate_range[1])}")
    for key in ("latency", "jitter", "staleness_budget", "monitor_period", "step_fraction"):
        out.append(f"{key} = {_fmt(getattr(net, key))}")
    out += [f"thread_policy = {net.thread_policy}", "", "[run]", f"seed = {cfg.seed}", f"decimate = {cfg.decimate}"]
    return "\n".join(out) + "\n"


# trajectory records -------------------------------------------------------


@dataclass
class TrajectoryRecord:
    """State of all agents at one time sample."""

    t: float
    positions: np.ndarray
    HV: float
    HV1: Optional[float] = None
    HV2: Optional[float] = None
    residual: float = float("nan")
    event: str = ""
    theta: Optional[np.ndarray] = None
    E: Optional[float] = None


FIELDS = ("t", "id", "x", "y", "theta", "HV", "HV1", "HV2", "residual", "event")


def _num(x) -> str:
    return "" if x is None else f"{float(x):.17g}"


def emit_trajectory(records: Iterable[TrajectoryRecord], out=None, with_energy: bool = False) -> str:
    """Write one CSV row per agent per record; returns the text when ``out`` is None.

    Columns are ``t, id, x, y, theta, HV, HV1, HV2, residual, event`` (plus
    ``E`` when ``with_energy``); numbers carry 17 significant digits.
    """
    buf = io.StringIO() if out is None else out
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS + (("E",) if with_energy else ()))
    for rec in records:
        for i, (x, y) in enumerate(np.asarray(rec.positions, dtype=float)):
            row = [_num(rec.t), str(i), _num(x), _num(y),
                   "" if rec.theta is None else _num(rec.theta[i]),
                   _num(rec.HV), _num(rec.HV1), _num(rec.HV2), _num(rec.residual), rec.event]
            if with_energy:
                row.append(_num(rec.E))
            w.writerow(row)
        if out is not None and hasattr(out, "flush"):
            out.flush()
    return buf.getvalue() if out is None else ""


def read_trajectory(text: str) -> list[TrajectoryRecord]:
    """Parse :func:`emit_trajectory` output back into records."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    header = rows[0]
    if tuple(header[:len(FIELDS)]) != FIELDS:
        raise ParseError(f"unexpected trajectory header {header!r}", line=1)
    has_e = len(header) > len(FIELDS) and header[len(FIELDS)] == "E"
    opt = lambda s: None if s == "" else float(s)  # noqa: E731
    records: list[TrajectoryRecord] = []
    cur = None
    for no, row in enumerate(rows[1:], start=2):
        try:
            t, i = float(row[0]), int(row[1])
            x, y, th = float(row[2]), float(row[3]), opt(row[4])
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad trajectory row: {exc}", line=no) from None
        if i == 0:
            cur = dict(t=t, pos=[], th=[], HV=opt(row[5]), HV1=opt(row[6]), HV2=opt(row[7]),
                       residual=opt(row[8]), event=row[9], E=opt(row[10]) if has_e else None)
            records.append(cur)
        elif cur is None or i != len(cur["pos"]):
            raise ParseError("agent rows out of order", line=no)
        cur["pos"].append((x, y))
        cur["th"].append(th)
    out = []
    for r in records:
        theta = None if r["th"][0] is None else np.array(r["th"])
        out.append(TrajectoryRecord(r["t"], np.array(r["pos"]), r["HV"], r["HV1"], r["HV2"], r["residual"],
                                    r["event"], theta, r["E"]))
    return out


def check_descent(records: list[TrajectoryRecord], tol: float = 1e-6) -> list[int]:
    """Indices where the descent column (``E`` if present, else ``HV``) rose beyond ``tol``."""
    vals = [r.E if r.E is not None else r.HV for r in records]
    return [k for k in range(1, len(vals)) if vals[k] > vals[k - 1] + tol * (1 + abs(vals[k - 1]))]


# SVG ------------------------------------------------------------------------


def emit_svg(Q: ConvexPolygon, diagram: Optional[VoronoiDiagram], P, phi=None, trails=None,
             annotations: Optional[str] = None, size: int = 500, grid: int = 50) -> str:
    """Standalone SVG: region outline, cell faces, generators, optional shading and trails."""
    v = Q.as_array()
    lo, hi = v.min(axis=0), v.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 10.0
    scale = (size - 2 * pad) / span

    def X(x):
        return pad + (x - lo[0]) * scale

    def Y(y):
        return size - pad - (y - lo[1]) * scale

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">', f'<rect width="{size}" height="{size}" fill="white"/>']
    if phi is not None and not phi.is_uniform:
        xs = lo[0] + (np.arange(grid) + 0.5) * (hi[0] - lo[0]) / grid
        ys = lo[1] + (np.arange(grid) + 0.5) * (hi[1] - lo[1]) / grid
        gx, gy = np.meshgrid(xs, ys)
        lp = phi.log_eval(gx, gy)
        val = np.exp(lp - np.max(lp))
        w, h = (hi[0] - lo[0]) / grid * scale, (hi[1] - lo[1]) / grid * scale
        parts.append('<g stroke="none">')
        for a in range(grid):
            for b in range(grid):
                if Q.contains((gx[a, b], gy[a, b])) and val[a, b] > 1e-3:
                    parts.append(f'<rect x="{X(gx[a, b]) - w / 2:.2f}" y="{Y(gy[a, b]) - h / 2:.2f}" '
                                 f'width="{w:.2f}" height="{h:.2f}" fill="#d62728" '
                                 f'fill-opacity="{0.6 * val[a, b]:.3f}"/>')
        parts.append("</g>")
    pts = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in Q.vertices)
    parts.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="2"/>')
    if diagram is not None:
        for (i, j), (a, b) in sorted(diagram.faces.items()):
            parts.append(f'<line x1="{X(a[0]):.2f}" y1="{Y(a[1]):.2f}" x2="{X(b[0]):.2f}" y2="{Y(b[1]):.2f}" '
                         f'stroke="#1f77b4" stroke-width="1" data-cells="{i},{j}"/>')
    if trails is not None:
        T = np.asarray(trails, dtype=float)
        for i in range(T.shape[1]):
            line = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in T[:, i])
            parts.append(f'<polyline points="{line}" fill="none" stroke="#7f7f7f" stroke-width="0.8"/>')
    for x, y in np.asarray(P, dtype=float).reshape(-1, 2):
        parts.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="3" fill="black"/>')
    if annotations:
        parts.append(f'<text x="{pad}" y="{size - 2}" font-size="11" font-family="monospace">'
                     f'{annotations.replace("&", "&amp;").replace("<", "&lt;")}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# running ------------------------------------------------------------------


@dataclass
class RunResult:
    records: list
    converged: bool
    residual: float
    HV: float
    steps: int
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"converged": self.converged, "residual": self.residual, "HV": self.HV,
                "steps": self.steps, "records": len(self.records), **self.extra}


def _record(t, P, cost, residual, event="", theta=None, E=None):
    return TrajectoryRecord(float(t), np.array(P, dtype=float), cost.total, cost.quantization,
                            cost.displacement, float(residual), event, theta, E)


def run_scenario(cfg: ScenarioConfig, seed: Optional[int] = None) -> RunResult:
    """Execute the configured algorithm; ``seed`` overrides the file's seed."""
    from .descent import continuous_lloyd_flow, descent_iterate, lloyd_map, p_center_step
    from .distributed import coverage_behavior_I, coverage_behavior_II
    from .dynamics import FirstOrder, FirstOrderGoTo, Unicycle, UnicycleGoTo, pd_closed_loop, run_local_rounds
    from .objective import analyze, coverage_cost_voronoi

    seed = cfg.seed if seed is None else seed
    Q = cfg.region
    phi = cfg.density.build()
    f = cfg.performance()
    P0 = cfg.initial_positions(seed)
    algo = cfg.algorithm

    def cost_of(P, cost):
        return cost if f.is_quadratic else coverage_cost_voronoi(Q, P, f, phi)

    if algo == "lloyd-continuous":
        tr = continuous_lloyd_flow(Q, P0, phi, cfg.k_prop, cfg.h, cfg.max_steps, cfg.tol)
        recs = [_record(t, P, cost_of(P, c), r, e)
                for t, P, c, r, e in zip(tr.times, tr.states, tr.costs, tr.residuals, tr.events)]
        return _finish(cfg, recs, tr.residuals[-1] < cfg.tol, len(tr) - 1)
    if algo == "lloyd-map":
        rep = descent_iterate(lambda Q_, P_, phi_: lloyd_map(Q_, P_, phi_), Q, P0, phi,
                              tol=cfg.tol, max_iter=cfg.max_steps)
        recs = [_record(k, P, cost_of(P, c), r)
                for k, (P, c, r) in enumerate(zip(rep.states, rep.costs, rep.residuals))]
        return _finish(cfg, recs, rep.converged, rep.iterations)
    if algo == "pcenter":
        from .objective import p_center_cost
        P = P0.copy()
        recs, converged = [], False
        for k in range(cfg.max_steps + 1):
            snap = analyze(Q, P, phi, f if not f.is_quadratic else None)
            nxt = p_center_step(Q, P)
            move = float(np.max(np.hypot(*(nxt - P).T)))
            recs.append(_record(k, P, snap.cost, move, f"pcenter={p_center_cost(Q, P)!r}"))
            if move < cfg.tol:
                converged = True
                break
            if k < cfg.max_steps:
                P = nxt
        return _finish(cfg, recs, converged, len(recs) - 1)
    if algo == "pd":
        tr = pd_closed_loop(Q, P0, phi, cfg.k_prop, cfg.k_deriv, cfg.h, cfg.max_steps, cfg.tol)
        recs = [_record(t, P, cost_of(P, c), r, e, E=en.E)
                for t, P, c, r, e, en in zip(tr.times, tr.positions, tr.costs, tr.residuals, tr.events,
                                             tr.energies)]
        return _finish(cfg, recs, tr.residuals[-1] < cfg.tol, len(tr) - 1,
                       {"E": tr.energies[-1].E})
    if algo in ("unicycle", "local-rounds"):
        if algo == "unicycle":
            th = cfg.initial_headings(seed)
            states = [Unicycle(float(a), float(p[0]), float(p[1])) for a, p in zip(th, P0)]
            ctl = UnicycleGoTo(cfg.k_prop, cfg.substep)
        else:
            states = [FirstOrder((float(p[0]), float(p[1]))) for p in P0]
            ctl = FirstOrderGoTo(cfg.k_prop, cfg.substep)
        tr = run_local_rounds(Q, states, phi, cfg.delta, ctl, cfg.max_steps, cfg.tol)
        recs = []
        for k, (st, c, r) in enumerate(zip(tr.states, tr.costs, tr.residuals)):
            P = np.array([s.position for s in st])
            theta = np.array([s.theta for s in st]) if algo == "unicycle" else None
            recs.append(_record(k * cfg.delta, P, cost_of(P, c), r, f"round={k}", theta))
        return _finish(cfg, recs, tr.residuals[-1] < cfg.tol, len(tr) - 1)
    if algo in ("dist-I", "dist-II"):
        ncfg = cfg.network_config(seed)
        if algo == "dist-I":
            tr, state = coverage_behavior_I(Q, P0, phi, cfg.delta0, cfg.horizon, ncfg, cfg.tol)
        else:
            tr, state = coverage_behavior_II(Q, P0, phi, cfg.horizon, ncfg, cfg.tol)
        recs = [_record(t, P, cost_of(P, c), r, e)
                for t, P, c, r, e in zip(tr.times, tr.states, tr.costs, tr.residuals, tr.events)]
        return _finish(cfg, recs, tr.residuals[-1] < cfg.tol, len(tr) - 1,
                       {"recomputations": len(state.recomputations), "stale_views": state.stale_views})
    raise ValidationError(f"unknown algorithm {algo!r}")


def _finish(cfg, recs, converged, steps, extra=None) -> RunResult:
    if cfg.decimate > 1 and len(recs) > 2:
        recs = recs[::cfg.decimate] + ([recs[-1]] if (len(recs) - 1) % cfg.decimate else [])
    last = recs[-1]
    return RunResult(recs, bool(converged), last.residual, last.HV, steps,
                     {"algorithm": cfg.algorithm, **(extra or {})})


def frame_svg(cfg: ScenarioConfig, rec: TrajectoryRecord, trails=None) -> str:
    Q = cfg.region
    return emit_svg(Q, voronoi_diagram(Q, rec.positions), rec.positions, cfg.density.build(), trails,
                    f"t={rec.t:.4g} HV={rec.HV:.6g} residual={rec.residual:.3g}")
