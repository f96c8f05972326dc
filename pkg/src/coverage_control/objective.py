"""Locational-optimization cost, its decomposition and gradient."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import TOL
from .density import DensityField, SensingPerformance, Uniform, quadratic
from .errors import PartitionMismatch
from .geometry import CellMoments, ConvexPolygon, FlatCells, VoronoiDiagram, voronoi_diagram, voronoi_flat
from .quadrature import flat_moments, integrate_cells, moments_batch


@dataclass(frozen=True)
class CostBreakdown:
    """Total cost and, for quadratic f, its split into
    quantization (moments about centroids) and displacement terms."""

    total: float
    quantization: Optional[float] = None
    displacement: Optional[float] = None


@dataclass
class CoverageSnapshot:
    """Everything the flows need about one configuration.

    ``inertia[i]`` is the polar moment of cell ``i`` about its centroid;
    the full diagram is built on first access.
    """

    positions: np.ndarray
    flat: FlatCells
    masses: np.ndarray
    centroids: np.ndarray
    inertia: np.ndarray
    cost: CostBreakdown
    zero_mass: tuple
    _diagram: Optional[VoronoiDiagram] = field(default=None, repr=False)

    @property
    def diagram(self) -> VoronoiDiagram:
        if self._diagram is None:
            self._diagram = self.flat.diagram()
        return self._diagram

    @property
    def moments(self) -> list:
        zero = set(self.zero_mass)
        return [
            None if i in zero else CellMoments(float(self.masses[i]), tuple(map(float, self.centroids[i])),
                                               float(self.inertia[i]))
            for i in range(len(self.positions))
        ]

    @property
    def residual(self) -> float:
        d = self.positions - self.centroids
        return float(np.max(np.hypot(d[:, 0], d[:, 1]))) if len(d) else 0.0


def _moments(cells, phi):
    return moments_batch(cells, phi, flag_sharp=False)[0]


def analyze(Q: ConvexPolygon, P, phi: DensityField, f: SensingPerformance | None = None,
            cost: bool = True) -> CoverageSnapshot:
    """Voronoi partition, cell moments and cost of configuration ``P``.

    Cells without mass get their generator as centroid (so they contribute no
    motion) and are listed in ``zero_mass``.  ``cost=False`` skips the cost
    (reported as ``nan``) when only centroids are needed.
    """
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    flat = voronoi_flat(Q, P)
    mass, cent, inertia = flat_moments(flat, phi, with_inertia=cost)
    empty = ~(mass > 0.0)
    zero = tuple(np.nonzero(empty)[0].tolist())
    if zero:
        mass = np.where(empty, 0.0, mass)
        cent = np.where(empty[:, None], P, cent)
        inertia = np.where(empty, 0.0, inertia)
    snap = CoverageSnapshot(P, flat, mass, cent, inertia, CostBreakdown(float("nan")), zero)
    if not cost:
        return snap
    if f is None or f.is_quadratic:
        quant = float(np.sum(inertia))
        disp = float(np.sum(mass * np.sum((P - cent) ** 2, axis=1)))
        snap.cost = CostBreakdown(quant + disp, quant, disp)
    else:
        snap.cost = CostBreakdown(_general_cost(snap.diagram.cells, P, f, phi))
    return snap


def _apexes(cells, P):
    return [tuple(p) if c is not None and c.contains(p) else None for c, p in zip(cells, P)]


def _general_cost(cells, P, f: SensingPerformance, phi) -> float:
    P = np.asarray(P, dtype=float)
    apexes = _apexes(cells, P)
    if any(a is None for a in apexes):
        apexes = [a if a is not None else (c.vertex_mean() if not c.is_empty else (0.0, 0.0)) for a, c in zip(apexes, cells)]

    def g(x, y, owner):
        return f.f(np.hypot(x - P[owner, 0], y - P[owner, 1]))

    return float(np.sum(integrate_cells(cells, phi, g, apexes)))


def coverage_cost(P, W: Sequence[ConvexPolygon], f: SensingPerformance | None = None,
                  phi: DensityField | None = None) -> float:
    """Sum over regions of the integral of ``f(|q - p_i|) phi(q)`` over ``W_i``."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    if len(W) != len(P):
        raise PartitionMismatch(f"{len(W)} regions for {len(P)} agents")
    f = quadratic() if f is None else f
    phi = Uniform() if phi is None else phi
    if not f.is_quadratic:
        return _general_cost(list(W), P, f, phi)
    total = 0.0
    for m, p in zip(_moments(list(W), phi), P):
        if m is not None:
            total += m.polar_moment(p)
    return total


def coverage_cost_voronoi(Q: ConvexPolygon, P, f: SensingPerformance | None = None,
                          phi: DensityField | None = None) -> CostBreakdown:
    """Cost of ``P`` with its own Voronoi partition."""
    phi = Uniform() if phi is None else phi
    return analyze(Q, P, phi, f).cost


def gradient(Q: ConvexPolygon, P, f: SensingPerformance | None = None,
             phi: DensityField | None = None) -> np.ndarray:
    """Partial derivatives of the Voronoi cost with respect to each position.

    Quadratic ``f`` uses ``2 M (p - C)``; otherwise the cell integral of
    ``f'(|q - p|) (p - q) / |q - p|`` with the integrand zero at ``q = p``.
    """
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    phi = Uniform() if phi is None else phi
    if f is None or f.is_quadratic:
        snap = analyze(Q, P, phi)
        return 2.0 * snap.masses[:, None] * (P - snap.centroids)
    diagram = voronoi_diagram(Q, P)
    cells = diagram.cells

    def g(x, y, owner):
        dx, dy = P[owner, 0] - x, P[owner, 1] - y
        r = np.hypot(dx, dy)
        ok = r > TOL.singular_node
        scale = np.zeros_like(r)
        scale[ok] = f.fprime(r[ok]) / r[ok]
        return np.stack([scale * dx, scale * dy], axis=1)

    return integrate_cells(cells, phi, g, apexes=[tuple(p) for p in P], ncomp=2)


def p_center_cost(Q: ConvexPolygon, P) -> float:
    """Largest distance from any point of ``Q`` to its nearest generator."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    diagram = voronoi_diagram(Q, P)
    return max(c.max_distance(p) for c, p in zip(diagram.cells, P))


def centroids_of(cells, phi: DensityField, fallback) -> np.ndarray:
    out = np.asarray(fallback, dtype=float).copy()
    for i, m in enumerate(_moments(list(cells), phi)):
        if m is not None:
            out[i] = m.centroid
    return out

