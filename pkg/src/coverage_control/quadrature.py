"""Density-weighted integration over convex polygons.

Polygons are fan-triangulated and each triangle is integrated with the
13-point symmetric rule of polynomial degree 7.  Cell moments for the
built-in density families use adaptive 4-splitting driven by the change
between consecutive levels; other densities and general integrands use the
fixed uniform 4-split of the fan.
"""

from __future__ import annotations

import numpy as np

from .constants import TOL
from .density import DensityField
from .errors import ZeroMass
from ._kernels import adaptive_moments, fan_nodes, reduce_moments, uniform_moments
from .geometry import CellMoments, ConvexPolygon, FlatCells

# barycentric orbits and weights (weights sum to one)
_A1, _B1 = 0.479308067841923, 0.260345966079038
_A2, _B2 = 0.869739794195568, 0.065130102902216
_A3, _B3, _C3 = 0.638444188569809, 0.312865496004875, 0.048690315425316
_W0, _W1, _W2, _W3 = -0.149570044467670, 0.175615257433204, 0.053347235608839, 0.077113760890257

RULE_BARY = np.array(
    [[1 / 3, 1 / 3, 1 / 3]]
    + [[_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1]]
    + [[_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2]]
    + [[_A3, _B3, _C3], [_A3, _C3, _B3], [_B3, _A3, _C3],
       [_C3, _A3, _B3], [_B3, _C3, _A3], [_C3, _B3, _A3]]
)
RULE_WEIGHTS = np.array([_W0] + [_W1] * 3 + [_W2] * 3 + [_W3] * 6)
RULE_DEGREE = 7


def fan(poly: ConvexPolygon, apex=None) -> np.ndarray:
    """Triangles ``(apex, v_k, v_{k+1})`` as an ``(m, 3, 2)`` array."""
    v = poly.as_array()
    a = v.mean(axis=0) if apex is None else np.asarray(apex, dtype=float)
    return np.stack([np.broadcast_to(a, v.shape), v, np.roll(v, -1, axis=0)], axis=1)


def split4(tris: np.ndarray) -> np.ndarray:
    """Uniform midpoint refinement of each triangle into four."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    return np.concatenate(
        [np.stack(t, axis=1) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))]
    )


def triangle_nodes(tris: np.ndarray):
    """Quadrature nodes ``(T, 13, 2)`` and weights ``(T, 13)`` for each triangle."""
    nodes = np.matmul(RULE_BARY, tris)
    e1, e2 = tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return nodes, area[:, None] * RULE_WEIGHTS[None, :]


def integrate_triangles(tris: np.ndarray, fn) -> np.ndarray:
    """Plain rule sum of ``fn(x, y)`` over the triangles (no density)."""
    nodes, w = triangle_nodes(tris)
    return float(np.sum(w * fn(nodes[..., 0], nodes[..., 1])))


def collapsed_nodes(tris: np.ndarray, order: int = 10):
    """Conical Gauss product nodes collapsing onto each triangle's first vertex.

    ``q = a + s (b - a) + s t (c - b)`` with Gauss-Legendre ``s, t`` on [0, 1];
    integrands with a kink or direction singularity at the apex stay smooth in
    ``(s, t)``.
    """
    g, gw = np.polynomial.legendre.leggauss(order)
    g, gw = 0.5 * (g + 1.0), 0.5 * gw
    s, t = np.meshgrid(g, g, indexing="ij")
    ws = (gw[:, None] * gw[None, :] * s).ravel()
    s, t = s.ravel(), t.ravel()
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    nodes = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :] + (s * t)[None, :, None] * (c - b)[:, None, :]
    e1, e2 = b - a, c - b
    jac = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return nodes, jac[:, None] * ws[None, :]


class _Level:
    """Nodes, weights and log-density for one refinement level of many cells."""

    def __init__(self, tris, owner, ncells, phi: DensityField, collapsed=False):
        nodes, w = collapsed_nodes(tris) if collapsed else triangle_nodes(tris)
        self.x = nodes[..., 0].ravel()
        self.y = nodes[..., 1].ravel()
        self.w = w.ravel()
        self.owner = np.repeat(owner, w.shape[1])
        self.logphi = np.asarray(phi.log_eval(self.x, self.y), dtype=float)
        self.ncells = ncells

    def scaled(self, shift):
        lp = self.logphi - shift[self.owner]
        with np.errstate(invalid="ignore"):
            return self.w * np.where(np.isfinite(lp), np.exp(lp), 0.0)

    def sum(self, vals):
        return np.bincount(self.owner, weights=vals, minlength=self.ncells)


def _fans(cells, apexes):
    """All fan triangles of many cells in one array, with owner indices."""
    a, b, c, owner = [], [], [], []
    for i, cell in enumerate(cells):
        if cell is None or cell.is_empty:
            continue
        v = cell.vertices
        m = len(v)
        if apexes is None or apexes[i] is None:
            ap = (sum(x for x, _ in v) / m, sum(y for _, y in v) / m)
        else:
            ap = (float(apexes[i][0]), float(apexes[i][1]))
        a.extend([ap] * m)
        b.extend(v)
        c.extend(v[1:])
        c.append(v[0])
        owner.extend([i] * m)
    if not owner:
        return None, None
    return np.array([a, b, c], dtype=float).transpose(1, 0, 2), np.array(owner)


def _levels(cells, phi, apexes, collapsed=False):
    n = len(cells)
    tris, owner = _fans(cells, apexes)
    if tris is None:
        return None, None
    if collapsed:
        level = _Level(tris, owner, n, phi, collapsed=True)
        return level, level
    fine = split4(tris)
    return _Level(tris, owner, n, phi), _Level(fine, np.tile(owner, 4), n, phi)


def _shift(level: _Level):
    shift = np.full(level.ncells, -np.inf)
    np.maximum.at(shift, level.owner, level.logphi)
    return np.where(np.isfinite(shift), shift, 0.0)


def flat_moments(flat: FlatCells, phi: DensityField, with_inertia: bool = True):
    """Arrays ``(mass, centroid (n, 2), polar moment about centroid)`` of flat cells.

    Empty cells and cells where the density vanishes get mass 0 and a ``nan``
    centroid.  Non-uniform densities are integrated after rescaling by the
    per-cell maximum of ``log phi``.
    """
    if phi.is_uniform:
        m, cx, cy, j = uniform_moments(flat.verts, flat.offsets)
        cent = np.stack([cx, cy], axis=1)
        cent[~(m > 0)] = np.nan
        return m, cent, j
    params = phi.kernel_params()
    if params is not None:
        code, prm = params
        shift, m, cx, cy, j, _ = adaptive_moments(flat.verts, flat.offsets, code, np.asarray(prm, dtype=float),
                                                  RULE_BARY, RULE_WEIGHTS, TOL.quad_rel_cell,
                                                  TOL.quad_rel_total, TOL.quad_max_depth,
                                                  TOL.quad_max_log_var)
        scale = np.exp(shift)
        if not with_inertia:
            j = np.full(len(flat), np.nan)
        return m * scale, np.stack([cx, cy], axis=1), j * scale
    return _doubling_moments(flat, phi, with_inertia)


def _subset(flat: FlatCells, idx) -> FlatCells:
    parts = [flat.verts[flat.offsets[i]:flat.offsets[i + 1]] for i in idx]
    counts = [len(p) for p in parts]
    verts = np.concatenate(parts) if parts else np.zeros((0, 2))
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return FlatCells(np.ascontiguousarray(verts), offsets, np.full(len(verts), -1, dtype=np.int64))


def _uniform_split(flat: FlatCells, phi: DensityField, subdiv: int, with_inertia: bool):
    n = len(flat)
    x, y, w, owner = fan_nodes(flat.verts, flat.offsets, np.full(n, subdiv), RULE_BARY, RULE_WEIGHTS)
    logphi = np.ascontiguousarray(np.broadcast_to(phi.log_eval(x, y), x.shape), dtype=float)
    shift, m, cx, cy, j = reduce_moments(x, y, w, owner, logphi, n, with_inertia)
    scale = np.exp(shift)
    return m * scale, np.stack([cx, cy], axis=1), j * scale


def _doubling_moments(flat: FlatCells, phi: DensityField, with_inertia: bool, max_subdiv: int = 64):
    """Uniform subdivision of each fan, doubled per cell until the mass settles."""
    m, c, j = _uniform_split(flat, phi, 2, with_inertia)
    floor = TOL.quad_rel_total * float(np.sum(m[m > 0]))
    todo = np.nonzero(np.diff(flat.offsets) >= 3)[0]
    d = 2
    while len(todo) and d < max_subdiv:
        d *= 2
        m2, c2, j2 = _uniform_split(_subset(flat, todo), phi, d, with_inertia)
        done = np.abs(m2 - m[todo]) <= np.maximum(TOL.refine_rel_change * np.abs(m2), floor)
        m[todo], c[todo], j[todo] = m2, c2, j2
        todo = todo[~done]
    return m, c, j


def refinement_flags(cells, phi: DensityField) -> np.ndarray:
    """Cells whose mass changes by more than the refinement tolerance
    between the fan and its 4-split."""
    n = len(cells)
    if phi.is_uniform:
        return np.zeros(n, dtype=bool)
    coarse, fine = _levels(cells, phi, None)
    if coarse is None:
        return np.zeros(n, dtype=bool)
    shift = _shift(fine)
    m0 = coarse.sum(coarse.scaled(shift))
    m1 = fine.sum(fine.scaled(shift))
    return np.abs(m1 - m0) > TOL.refine_rel_change * np.abs(m1)


def moments_batch(cells, phi: DensityField, with_inertia: bool = True, flag_sharp: bool = True):
    """Moments of many cells at once.

    Returns a list with a :class:`CellMoments` per cell, or ``None`` where the
    cell is empty or carries no mass, and a boolean array flagging cells whose
    mass changed by more than the refinement tolerance between levels.  With
    ``with_inertia=False`` the polar moments are reported as ``nan``.
    """
    cells = list(cells)
    m, cent, j = flat_moments(FlatCells.from_polygons(cells), phi, with_inertia)
    out = [
        CellMoments(float(m[i]), (float(cent[i, 0]), float(cent[i, 1])), float(j[i])) if m[i] > 0.0 else None
        for i in range(len(cells))
    ]
    sharp = refinement_flags(cells, phi) if flag_sharp else np.zeros(len(cells), dtype=bool)
    return out, sharp


def cell_moments(poly: ConvexPolygon, phi: DensityField) -> CellMoments:
    """Mass, centroid and central polar moment of ``poly`` under ``phi``.

    Always integrates by quadrature, including for uniform densities.
    """
    if poly.is_empty:
        raise ZeroMass("empty polygon has no mass")
    flat = FlatCells.from_polygons([poly])
    if phi.is_uniform:
        m, c, j = _doubling_moments(flat, phi, True)
    else:
        m, c, j = flat_moments(flat, phi)
    if not m[0] > 0.0:
        raise ZeroMass(f"density vanishes on the cell (mass {m[0]!r})")
    return CellMoments(float(m[0]), (float(c[0, 0]), float(c[0, 1])), float(j[0]))


def integrate_cells(cells, phi: DensityField, integrand, apexes=None, ncomp=1):
    """``sum over nodes of w * phi * integrand(x, y, owner)`` for each cell.

    ``integrand`` receives flat node coordinates and the owning cell index and
    returns ``(N,)`` or ``(N, ncomp)`` values.  With ``apexes`` given, each
    cell is fanned from its apex and integrated with the collapsed product
    rule, which tolerates integrands singular at the apex; otherwise the
    refined symmetric rule is used.
    """
    n = len(cells)
    _, fine = _levels(cells, phi, apexes, collapsed=apexes is not None)
    if fine is None:
        return np.zeros((n, ncomp))
    shift = _shift(fine)
    wf = fine.scaled(shift)
    vals = np.asarray(integrand(fine.x, fine.y, fine.owner), dtype=float).reshape(len(wf), -1)
    out = np.stack([fine.sum(wf * vals[:, c]) for c in range(vals.shape[1])], axis=1)
    return out * np.exp(shift)[:, None]
