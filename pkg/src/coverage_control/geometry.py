"""Planar convex polygons, bounded Voronoi diagrams and polygon moments.

Points are plain ``(x, y)`` float pairs; configurations are ``(n, 2)`` numpy
arrays.  Polygons store their vertices counterclockwise without repeating the
first vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .constants import TOL
from ._kernels import closest_pair, voronoi_cells
from .errors import DegenerateTriangle, DuplicateGenerators, EmptyRegion

Point2 = tuple[float, float]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _signed_area(verts: Sequence[Point2]) -> float:
    s = 0.0
    n = len(verts)
    for k in range(n):
        x0, y0 = verts[k]
        x1, y1 = verts[(k + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


@dataclass(frozen=True)
class HalfPlane:
    """The closed half-plane ``{q : normal . q >= offset}``."""

    normal: Point2
    offset: float

    def __post_init__(self):
        if self.normal[0] == 0.0 and self.normal[1] == 0.0:
            raise ValueError("half-plane normal must be nonzero")

    def value(self, q) -> float:
        return self.normal[0] * q[0] + self.normal[1] * q[1] - self.offset

    def contains(self, q, tol: float = 0.0) -> bool:
        return self.value(q) >= -tol

    @classmethod
    def bisector(cls, p_i, p_j) -> "HalfPlane":
        """Points at least as close to ``p_i`` as to ``p_j``."""
        nx, ny = p_i[0] - p_j[0], p_i[1] - p_j[1]
        mx, my = 0.5 * (p_i[0] + p_j[0]), 0.5 * (p_i[1] + p_j[1])
        return cls((nx, ny), nx * mx + ny * my)


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple[Point2, ...] = ()

    @classmethod
    def from_vertices(cls, pts: Iterable) -> "ConvexPolygon":
        """Build from any vertex sequence, orienting it counterclockwise."""
        verts = [(float(x), float(y)) for x, y in pts]
        if len(verts) >= 2 and _dist(verts[0], verts[-1]) <= TOL.duplicate_vertex:
            verts.pop()
        verts, _ = _dedupe(verts)
        if len(verts) < 3:
            return cls(())
        if _signed_area(verts) < 0:
            verts.reverse()
        return cls(tuple(verts))

    @classmethod
    def box(cls, xmin, ymin, xmax, ymax) -> "ConvexPolygon":
        return cls.from_vertices([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)])

    @classmethod
    def regular(cls, center, radius, sides, circumscribed=False, phase=0.0):
        """Regular polygon around ``center``.

        With ``circumscribed=True`` the polygon contains the disk of the given
        radius (its apothem equals ``radius``).
        """
        r = radius / math.cos(math.pi / sides) if circumscribed else radius
        cx, cy = center
        pts = [
            (cx + r * math.cos(phase + 2 * math.pi * k / sides),
             cy + r * math.sin(phase + 2 * math.pi * k / sides))
            for k in range(sides)
        ]
        return cls.from_vertices(pts)

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) < 3

    def __len__(self):
        return len(self.vertices)

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float).reshape(-1, 2)

    @property
    def area(self) -> float:
        return 0.0 if self.is_empty else _signed_area(self.vertices)

    def edges(self):
        n = len(self.vertices)
        for k in range(n):
            yield self.vertices[k], self.vertices[(k + 1) % n]

    def is_convex(self, tol: float = 1e-12) -> bool:
        n = len(self.vertices)
        if n < 3:
            return False
        scale = max(1.0, self.diameter() ** 2)
        for k in range(n):
            if _cross(self.vertices[k], self.vertices[(k + 1) % n], self.vertices[(k + 2) % n]) < -tol * scale:
                return False
        return self.area > 0

    def contains(self, q, tol: float = 1e-12) -> bool:
        if self.is_empty:
            return False
        for a, b in self.edges():
            ex, ey = b[0] - a[0], b[1] - a[1]
            length = math.hypot(ex, ey)
            if (ex * (q[1] - a[1]) - ey * (q[0] - a[0])) < -tol * length:
                return False
        return True

    def contains_many(self, pts, tol: float = 1e-12) -> np.ndarray:
        """Vectorized :meth:`contains` for an ``(m, 2)`` array."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if self.is_empty:
            return np.zeros(len(pts), dtype=bool)
        v = self.as_array()
        e = np.roll(v, -1, axis=0) - v
        length = np.hypot(e[:, 0], e[:, 1])
        side = e[None, :, 0] * (pts[:, None, 1] - v[None, :, 1]) - e[None, :, 1] * (pts[:, None, 0] - v[None, :, 0])
        return np.all(side >= -tol * length[None, :], axis=1)

    def max_distance(self, p) -> float:
        """Largest distance from ``p`` to the polygon (attained at a vertex)."""
        if self.is_empty:
            return 0.0
        return max(math.hypot(x - p[0], y - p[1]) for x, y in self.vertices)

    def diameter(self) -> float:
        v = self.vertices
        return max((_dist(a, b) for a in v for b in v), default=0.0)

    def vertex_mean(self) -> Point2:
        n = len(self.vertices)
        return (sum(v[0] for v in self.vertices) / n, sum(v[1] for v in self.vertices) / n)


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _dedupe(verts, labels=None, tol=None):
    """Drop consecutive duplicate vertices (cyclically).

    When ``labels`` is given (``labels[k]`` tags edge ``k -> k+1``) the tag of
    a collapsed edge is discarded with it.
    """
    tol = TOL.duplicate_vertex if tol is None else tol
    if labels is None:
        labels = [None] * len(verts)
    out_v, out_l = [], []
    for v, lab in zip(verts, labels):
        if out_v and _dist(out_v[-1], v) <= tol:
            # edge from out_v[-1] to v has zero length: keep the outgoing edge tag
            out_l[-1] = lab
            continue
        out_v.append(v)
        out_l.append(lab)
    while len(out_v) > 1 and _dist(out_v[-1], out_v[0]) <= tol:
        out_v.pop()
        out_l.pop()
    return out_v, out_l


def _clip_labeled(verts, labels, nx, ny, c, new_label, extent=None):
    """Clip a convex polygon by ``nx*x + ny*y >= c``.

    ``labels[k]`` identifies the constraint that produced edge ``k``; the new
    edge created by the cut gets ``new_label``.  ``extent`` bounds the
    coordinate magnitudes and sets the on-line slack.  Returns the input lists
    unchanged (same objects) when the constraint does not bind.
    """
    n = len(verts)
    if n == 0:
        return verts, labels
    if extent is None:
        extent = max(abs(x) + abs(y) for x, y in verts)
    slack = TOL.clip_slack * (abs(nx) + abs(ny)) * (1.0 + extent)
    s = [nx * x + ny * y - c for x, y in verts]
    if min(s) >= -slack:
        return verts, labels
    if max(s) < slack:
        return [], []
    out_v, out_l = [], []
    suspicious = False
    for k in range(n):
        a = verts[k]
        sa = s[k]
        kb = k + 1 if k + 1 < n else 0
        sb = s[kb]
        a_in = sa >= -slack
        b_in = sb >= -slack
        if a_in:
            out_v.append(a)
            out_l.append(labels[k])
            if not b_in:
                if sa > slack:
                    b = verts[kb]
                    t = sa / (sa - sb)
                    out_v.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
                    out_l.append(new_label)
                    suspicious = suspicious or t < 1e-9
                else:
                    # a lies on the cutting line: the outgoing edge becomes the cut
                    out_l[-1] = new_label
                    suspicious = True
        elif b_in:
            if sb > slack:
                b = verts[kb]
                t = sa / (sa - sb)
                out_v.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
                out_l.append(labels[k])
                suspicious = suspicious or t > 1.0 - 1e-9
            else:
                suspicious = True
    if suspicious:
        out_v, out_l = _dedupe(out_v, out_l)
        if len(out_v) < 3 or _signed_area(out_v) <= 0.0:
            return [], []
    elif len(out_v) < 3:
        return [], []
    return out_v, out_l


def clip_halfplane(poly: ConvexPolygon, h: HalfPlane) -> ConvexPolygon:
    """Intersection of ``poly`` with the half-plane ``h`` (possibly empty)."""
    if poly.is_empty:
        return ConvexPolygon(())
    verts, _ = _clip_labeled(list(poly.vertices), [None] * len(poly), h.normal[0], h.normal[1], h.offset, None)
    return ConvexPolygon(tuple(verts))


@dataclass(frozen=True)
class VoronoiDiagram:
    cells: tuple[ConvexPolygon, ...]
    neighbors: tuple[frozenset, ...]
    faces: dict = field(default_factory=dict)

    def face(self, i, j):
        return self.faces.get((min(i, j), max(i, j)))

    def __len__(self):
        return len(self.cells)


def check_distinct(P: np.ndarray, tol: float = TOL.duplicate_generator) -> None:
    i, j = closest_pair(np.ascontiguousarray(P, dtype=float), tol)
    if i >= 0:
        raise DuplicateGenerators(f"generators {i} and {j} coincide at {tuple(P[i])}")


def voronoi_cell(Q: ConvexPolygon, P: np.ndarray, i: int, candidates=None):
    """Bounded Voronoi cell of generator ``i`` with edge labels.

    Others are clipped in order of increasing distance and the sweep stops once
    the next generator is farther than twice the current farthest vertex: no
    bisector beyond that radius can cut the cell.  ``candidates`` restricts the
    generators considered (default: all).

    Returns ``(vertices, labels)``; a label is ``j`` for an edge on the bisector
    with generator ``j`` and ``None`` for a boundary edge of ``Q``.
    """
    px, py = float(P[i, 0]), float(P[i, 1])
    idx = range(len(P)) if candidates is None else candidates
    others = sorted(
        (math.hypot(float(P[j, 0]) - px, float(P[j, 1]) - py), j) for j in idx if j != i
    )
    verts = list(Q.vertices)
    labels = [None] * len(verts)
    extent = max(abs(x) + abs(y) for x, y in verts)
    reach = max(math.hypot(x - px, y - py) for x, y in verts)
    for d, j in others:
        if d > 2.0 * reach * (1.0 + 1e-12):
            break
        qx, qy = float(P[j, 0]), float(P[j, 1])
        nx, ny = px - qx, py - qy
        c = nx * 0.5 * (px + qx) + ny * 0.5 * (py + qy)
        clipped, labels = _clip_labeled(verts, labels, nx, ny, c, j, extent)
        if not clipped:
            verts = clipped
            break
        if clipped is not verts:
            verts = clipped
            reach = max(math.hypot(x - px, y - py) for x, y in verts)
    return verts, labels


def delaunay_candidates(P: np.ndarray):
    """Per-generator Delaunay neighbours, or ``None`` when qhull cannot help.

    Bounded Voronoi neighbours are always Delaunay neighbours, so clipping by
    these alone yields the same cells.
    """
    n = len(P)
    if n < 4:
        return None
    try:
        tri = Delaunay(P)
    except QhullError:
        return None
    indptr, indices = tri.vertex_neighbor_vertices
    return [indices[indptr[k]:indptr[k + 1]].tolist() for k in range(n)]


def voronoi_diagram_reference(Q: ConvexPolygon, P) -> VoronoiDiagram:
    """Pure-Python Voronoi partition; slow, kept as an independent check."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    check_distinct(P)
    cand = delaunay_candidates(P)
    cells, edge_sets = [], []
    for i in range(len(P)):
        verts, labels = voronoi_cell(Q, P, i, None if cand is None else cand[i])
        cells.append(ConvexPolygon(tuple(verts)))
        edges = {}
        for k, lab in enumerate(labels):
            if lab is not None:
                edges[lab] = (verts[k], verts[(k + 1) % len(verts)])
        edge_sets.append(edges)
    return _assemble(cells, edge_sets)


def _assemble(cells, edge_sets) -> VoronoiDiagram:
    neighbors = [set() for _ in cells]
    faces = {}
    for i, edges in enumerate(edge_sets):
        for j, seg in edges.items():
            if j < i:
                continue
            if _dist(*seg) > TOL.face_length:
                neighbors[i].add(j)
                neighbors[j].add(i)
                faces[(i, j)] = seg
    return VoronoiDiagram(tuple(cells), tuple(frozenset(s) for s in neighbors), faces)


@dataclass(frozen=True)
class FlatCells:
    """All cells of a partition as stacked vertices.

    Cell ``i`` owns rows ``offsets[i]:offsets[i+1]`` of ``verts``;
    ``labels[k]`` is the generator across edge ``k -> k+1`` or ``-1`` on the
    region boundary.
    """

    verts: np.ndarray
    offsets: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return len(self.offsets) - 1

    def cell(self, i) -> ConvexPolygon:
        a, b = self.offsets[i], self.offsets[i + 1]
        return ConvexPolygon(tuple(map(tuple, self.verts[a:b].tolist())))

    @classmethod
    def from_polygons(cls, polys) -> "FlatCells":
        verts, offsets = [], [0]
        for poly in polys:
            if poly is not None:
                verts.extend(poly.vertices)
            offsets.append(len(verts))
        v = np.array(verts, dtype=float).reshape(-1, 2)
        return cls(v, np.array(offsets, dtype=np.int64), np.full(len(v), -1, dtype=np.int64))

    def diagram(self) -> VoronoiDiagram:
        cells, edge_sets = [], []
        vl = self.verts.tolist()
        labels = self.labels.tolist()
        for i in range(len(self)):
            a, b = int(self.offsets[i]), int(self.offsets[i + 1])
            verts = [tuple(v) for v in vl[a:b]]
            cells.append(ConvexPolygon(tuple(verts)))
            edges = {}
            for k in range(b - a):
                if labels[a + k] >= 0:
                    edges[labels[a + k]] = (verts[k], verts[(k + 1) % (b - a)])
            edge_sets.append(edges)
        return _assemble(cells, edge_sets)


def voronoi_flat(Q: ConvexPolygon, P) -> FlatCells:
    """Voronoi cells of ``P`` in ``Q`` as :class:`FlatCells` (compiled path)."""
    P = np.ascontiguousarray(np.asarray(P, dtype=float).reshape(-1, 2))
    check_distinct(P)
    if Q.is_empty:
        raise EmptyRegion("region is empty")
    verts, offsets, labels = voronoi_cells(Q.as_array(), P, TOL.clip_slack, TOL.duplicate_vertex)
    return FlatCells(verts, offsets, labels)


def voronoi_diagram(Q: ConvexPolygon, P) -> VoronoiDiagram:
    """Voronoi partition of ``Q`` generated by the rows of ``P``."""
    return voronoi_flat(Q, P).diagram()


def circumcenter(p_i, p_j, p_k) -> Point2:
    """Circumcenter of a triangle from its vertex differences.

    With ``a_ls = p_l - p_s`` and signed area ``M`` the center is
    ``-(|a_kj|^2 (a_ji.a_ik) p_i + |a_ik|^2 (a_kj.a_ji) p_j
    + |a_ji|^2 (a_ik.a_kj) p_k) / (8 M^2)``.
    """
    pi, pj, pk = (np.asarray(v, dtype=float) for v in (p_i, p_j, p_k))
    area = 0.5 * _cross(pi, pj, pk)
    scale = max(1.0, float(np.max(np.abs(np.stack([pi, pj, pk])))) ** 2)
    if abs(area) < TOL.degenerate_triangle * scale:
        raise DegenerateTriangle(f"collinear points {tuple(pi)}, {tuple(pj)}, {tuple(pk)}")
    a_ji, a_ik, a_kj = pj - pi, pi - pk, pk - pj
    num = (
        a_kj @ a_kj * (a_ji @ a_ik) * pi
        + a_ik @ a_ik * (a_kj @ a_ji) * pj
        + a_ji @ a_ji * (a_ik @ a_kj) * pk
    )
    c = -num / (8.0 * area * area)
    return (float(c[0]), float(c[1]))


@dataclass(frozen=True)
class CellMoments:
    mass: float
    centroid: Point2
    polar_moment_centroid: float

    def polar_moment(self, p) -> float:
        """Polar moment about ``p`` via the parallel axis theorem."""
        dx, dy = p[0] - self.centroid[0], p[1] - self.centroid[1]
        return self.polar_moment_centroid + self.mass * (dx * dx + dy * dy)


def polygon_moments_uniform(poly: ConvexPolygon) -> CellMoments:
    """Closed-form mass, centroid and central polar moment for unit density."""
    if poly.is_empty:
        raise EmptyRegion("moments of an empty polygon")
    v = poly.vertices
    n = len(v)
    # shift to the first vertex to limit cancellation
    ox, oy = v[0]
    xs = [x - ox for x, _ in v]
    ys = [y - oy for _, y in v]
    m = cx = cy = 0.0
    for k in range(n):
        x0, y0, x1, y1 = xs[k], ys[k], xs[(k + 1) % n], ys[(k + 1) % n]
        cr = x0 * y1 - x1 * y0
        m += cr
        cx += (x0 + x1) * cr
        cy += (y0 + y1) * cr
    m *= 0.5
    cx /= 6.0 * m
    cy /= 6.0 * m
    j = 0.0
    for k in range(n):
        x0, y0 = xs[k] - cx, ys[k] - cy
        x1, y1 = xs[(k + 1) % n] - cx, ys[(k + 1) % n] - cy
        j += (x0 * y1 - x1 * y0) * (x0 * x0 + x0 * x1 + x1 * x1 + y0 * y0 + y0 * y1 + y1 * y1)
    j /= 12.0
    return CellMoments(m, (cx + ox, cy + oy), j)


def _circle_two(a, b):
    cx, cy = 0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])
    return (cx, cy, max(_dist((cx, cy), a), _dist((cx, cy), b)))


def _circle_three(a, b, c):
    try:
        cx, cy = circumcenter(a, b, c)
    except DegenerateTriangle:
        return None
    return (cx, cy, max(_dist((cx, cy), a), _dist((cx, cy), b), _dist((cx, cy), c)))


def _in_circle(circ, p, eps=1e-12):
    return circ is not None and _dist((circ[0], circ[1]), p) <= circ[2] * (1 + eps) + eps


def min_enclosing_ball(poly: ConvexPolygon) -> tuple[Point2, float]:
    """Smallest disk containing ``poly``; returns ``(center, radius)``.

    Deterministic incremental (Welzl-style) construction over the vertices.
    """
    if poly.is_empty:
        raise EmptyRegion("enclosing ball of an empty polygon")
    pts = list(poly.vertices)
    circ = (pts[0][0], pts[0][1], 0.0)
    for i, p in enumerate(pts):
        if _in_circle(circ, p):
            continue
        circ = (p[0], p[1], 0.0)
        for j, q in enumerate(pts[:i]):
            if _in_circle(circ, q):
                continue
            circ = _circle_two(p, q)
            for r in pts[:j]:
                if _in_circle(circ, r):
                    continue
                c3 = _circle_three(p, q, r)
                if c3 is not None:
                    circ = c3
    center = (circ[0], circ[1])
    return center, poly.max_distance(center)


def min_enclosing_ball_center(poly: ConvexPolygon) -> Point2:
    return min_enclosing_ball(poly)[0]


def project_onto_polygon(q, poly: ConvexPolygon) -> Point2:
    """Closest point of ``poly`` to ``q`` (``q`` itself when inside)."""
    q = (float(q[0]), float(q[1]))
    if poly.contains(q, tol=0.0):
        return q
    best, best_d = None, math.inf
    for a, b in poly.edges():
        ex, ey = b[0] - a[0], b[1] - a[1]
        L2 = ex * ex + ey * ey
        t = 0.0 if L2 == 0 else ((q[0] - a[0]) * ex + (q[1] - a[1]) * ey) / L2
        t = min(1.0, max(0.0, t))
        c = (a[0] + t * ex, a[1] + t * ey)
        d = _dist(c, q)
        if d < best_d:
            best, best_d = c, d
    return best


def symmetric_difference_area(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Area of the symmetric difference of two convex polygons."""
    inter = a
    for u, v in b.edges():
        inter = clip_halfplane(inter, HalfPlane((u[1] - v[1], v[0] - u[0]), (u[1] - v[1]) * u[0] + (v[0] - u[0]) * u[1]))
        if inter.is_empty:
            break
    return a.area + b.area - 2.0 * inter.area
