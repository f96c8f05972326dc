"""Compiled inner loops for Voronoi clipping and cell quadrature.

Cells travel as flat arrays: ``verts`` stacks all vertices, ``offsets[i]``
marks where cell ``i`` starts and ``labels[k]`` tags edge ``k -> k+1`` with the
neighbouring generator (``-1`` for a boundary edge of the region).  Without
numba the same functions run as plain Python.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda fn: fn


@njit(cache=True)
def _clip(vx, vy, lab, n, nx, ny, c, new_label, slack, dup_tol, ox, oy, ol):
    """Clip ``n`` vertices by ``nx x + ny y >= c`` into the ``o*`` buffers.

    Returns the new vertex count, or ``-1`` when the constraint does not bind.
    """
    smin = math.inf
    smax = -math.inf
    for k in range(n):
        s = nx * vx[k] + ny * vy[k] - c
        smin = min(smin, s)
        smax = max(smax, s)
    if smin >= -slack:
        return -1
    if smax < slack:
        return 0
    m = 0
    suspicious = False
    for k in range(n):
        kb = k + 1 if k + 1 < n else 0
        sa = nx * vx[k] + ny * vy[k] - c
        sb = nx * vx[kb] + ny * vy[kb] - c
        a_in = sa >= -slack
        b_in = sb >= -slack
        if a_in:
            ox[m] = vx[k]
            oy[m] = vy[k]
            ol[m] = lab[k]
            m += 1
            if not b_in:
                if sa > slack:
                    t = sa / (sa - sb)
                    ox[m] = vx[k] + t * (vx[kb] - vx[k])
                    oy[m] = vy[k] + t * (vy[kb] - vy[k])
                    ol[m] = new_label
                    m += 1
                    if t < 1e-9:
                        suspicious = True
                else:
                    ol[m - 1] = new_label
                    suspicious = True
        elif b_in:
            if sb > slack:
                t = sa / (sa - sb)
                ox[m] = vx[k] + t * (vx[kb] - vx[k])
                oy[m] = vy[k] + t * (vy[kb] - vy[k])
                ol[m] = lab[k]
                m += 1
                if t > 1.0 - 1e-9:
                    suspicious = True
            else:
                suspicious = True
    if suspicious:
        # drop consecutive duplicates, keeping the outgoing edge tag
        w = 0
        for k in range(m):
            if w > 0 and math.hypot(ox[k] - ox[w - 1], oy[k] - oy[w - 1]) <= dup_tol:
                ol[w - 1] = ol[k]
                continue
            ox[w] = ox[k]
            oy[w] = oy[k]
            ol[w] = ol[k]
            w += 1
        while w > 1 and math.hypot(ox[w - 1] - ox[0], oy[w - 1] - oy[0]) <= dup_tol:
            w -= 1
        m = w
        if m < 3:
            return 0
        area = 0.0
        for k in range(m):
            kb = k + 1 if k + 1 < m else 0
            area += ox[k] * oy[kb] - ox[kb] * oy[k]
        if area <= 0.0:
            return 0
    elif m < 3:
        return 0
    return m


@njit(cache=True)
def closest_pair(P, tol):
    """First pair ``(i, j)`` of rows closer than ``tol``, else ``(-1, -1)``."""
    n = P.shape[0]
    t2 = tol * tol
    for i in range(n):
        for j in range(i + 1, n):
            dx = P[i, 0] - P[j, 0]
            dy = P[i, 1] - P[j, 1]
            if dx * dx + dy * dy <= t2:
                return i, j
    return -1, -1


@njit(cache=True)
def voronoi_cells(qv, P, clip_slack, dup_tol):
    """Bounded Voronoi cells of all generators in the convex region ``qv``.

    Each generator's cell starts as the region and is clipped by bisectors in
    order of increasing distance, stopping once the next generator lies beyond
    twice the farthest cell vertex.
    """
    n = P.shape[0]
    mq = qv.shape[0]
    cap = mq + n + 4
    extent = 0.0
    for k in range(mq):
        extent = max(extent, abs(qv[k, 0]) + abs(qv[k, 1]))
    out_x = np.empty(n * cap)
    out_y = np.empty(n * cap)
    out_l = np.empty(n * cap, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    ax = np.empty(cap)
    ay = np.empty(cap)
    al = np.empty(cap, dtype=np.int64)
    bx = np.empty(cap)
    by = np.empty(cap)
    bl = np.empty(cap, dtype=np.int64)
    dist = np.empty(n)
    total = 0
    for i in range(n):
        px = P[i, 0]
        py = P[i, 1]
        for j in range(n):
            dist[j] = math.hypot(P[j, 0] - px, P[j, 1] - py)
        order = np.argsort(dist, kind="mergesort")
        cnt = mq
        reach = 0.0
        for k in range(mq):
            ax[k] = qv[k, 0]
            ay[k] = qv[k, 1]
            al[k] = -1
            reach = max(reach, math.hypot(qv[k, 0] - px, qv[k, 1] - py))
        for r in range(n):
            j = order[r]
            if j == i:
                continue
            if dist[j] > 2.0 * reach * (1.0 + 1e-12):
                break
            qx = P[j, 0]
            qy = P[j, 1]
            nx = px - qx
            ny = py - qy
            c = nx * 0.5 * (px + qx) + ny * 0.5 * (py + qy)
            slack = clip_slack * (abs(nx) + abs(ny)) * (1.0 + extent)
            m = _clip(ax, ay, al, cnt, nx, ny, c, j, slack, dup_tol, bx, by, bl)
            if m == -1:
                continue
            if m == 0:
                cnt = 0
                break
            for k in range(m):
                ax[k] = bx[k]
                ay[k] = by[k]
                al[k] = bl[k]
            cnt = m
            reach = 0.0
            for k in range(cnt):
                reach = max(reach, math.hypot(ax[k] - px, ay[k] - py))
        for k in range(cnt):
            out_x[total + k] = ax[k]
            out_y[total + k] = ay[k]
            out_l[total + k] = al[k]
        total += cnt
        offsets[i + 1] = total
    verts = np.empty((total, 2))
    verts[:, 0] = out_x[:total]
    verts[:, 1] = out_y[:total]
    return verts, offsets, out_l[:total].copy()


@njit(cache=True)
def uniform_moments(verts, offsets):
    """Closed-form area, centroid and central polar moment of each cell."""
    n = offsets.shape[0] - 1
    mass = np.zeros(n)
    cxs = np.zeros(n)
    cys = np.zeros(n)
    js = np.zeros(n)
    for i in range(n):
        s = offsets[i]
        cnt = offsets[i + 1] - s
        if cnt < 3:
            continue
        ox = verts[s, 0]
        oy = verts[s, 1]
        m = 0.0
        cx = 0.0
        cy = 0.0
        for k in range(cnt):
            kb = k + 1 if k + 1 < cnt else 0
            x0 = verts[s + k, 0] - ox
            y0 = verts[s + k, 1] - oy
            x1 = verts[s + kb, 0] - ox
            y1 = verts[s + kb, 1] - oy
            cr = x0 * y1 - x1 * y0
            m += cr
            cx += (x0 + x1) * cr
            cy += (y0 + y1) * cr
        m *= 0.5
        if not m > 0.0:
            continue
        cx /= 6.0 * m
        cy /= 6.0 * m
        j = 0.0
        for k in range(cnt):
            kb = k + 1 if k + 1 < cnt else 0
            x0 = verts[s + k, 0] - ox - cx
            y0 = verts[s + k, 1] - oy - cy
            x1 = verts[s + kb, 0] - ox - cx
            y1 = verts[s + kb, 1] - oy - cy
            j += (x0 * y1 - x1 * y0) * (x0 * x0 + x0 * x1 + x1 * x1 + y0 * y0 + y0 * y1 + y1 * y1)
        mass[i] = m
        cxs[i] = cx + ox
        cys[i] = cy + oy
        js[i] = j / 12.0
    return mass, cxs, cys, js


@njit(cache=True)
def fan_nodes(verts, offsets, subdiv, bary, weights):
    """Nodes of the symmetric rule on each cell's vertex-mean fan.

    Every fan triangle of cell ``i`` is cut into ``subdiv[i]**2`` congruent
    subtriangles.  Returns flat ``x, y, w, owner`` arrays.
    """
    n = offsets.shape[0] - 1
    nq = weights.shape[0]
    size = 0
    for i in range(n):
        cnt = offsets[i + 1] - offsets[i]
        if cnt >= 3:
            size += cnt * subdiv[i] * subdiv[i] * nq
    xs = np.empty(size)
    ys = np.empty(size)
    ws = np.empty(size)
    owner = np.empty(size, dtype=np.int64)
    pos = 0
    for i in range(n):
        s = offsets[i]
        cnt = offsets[i + 1] - s
        if cnt < 3:
            continue
        d = subdiv[i]
        axv = 0.0
        ayv = 0.0
        for k in range(cnt):
            axv += verts[s + k, 0]
            ayv += verts[s + k, 1]
        axv /= cnt
        ayv /= cnt
        for k in range(cnt):
            kb = k + 1 if k + 1 < cnt else 0
            # grid point (u, v) is a + u/d (b - a) + v/d (c - a)
            ux = (verts[s + k, 0] - axv) / d
            uy = (verts[s + k, 1] - ayv) / d
            vx = (verts[s + kb, 0] - axv) / d
            vy = (verts[s + kb, 1] - ayv) / d
            area = 0.5 * abs(ux * vy - uy * vx)
            for u in range(d):
                for v in range(d - u):
                    # upward (u,v),(u+1,v),(u,v+1); downward (u+1,v),(u+1,v+1),(u,v+1)
                    for down in range(2):
                        if down == 1 and u + v > d - 2:
                            continue
                        if down == 0:
                            p0 = (u, v)
                            p1 = (u + 1, v)
                            p2 = (u, v + 1)
                        else:
                            p0 = (u + 1, v)
                            p1 = (u + 1, v + 1)
                            p2 = (u, v + 1)
                        for q in range(nq):
                            gu = bary[q, 0] * p0[0] + bary[q, 1] * p1[0] + bary[q, 2] * p2[0]
                            gv = bary[q, 0] * p0[1] + bary[q, 1] * p1[1] + bary[q, 2] * p2[1]
                            xs[pos] = axv + gu * ux + gv * vx
                            ys[pos] = ayv + gu * uy + gv * vy
                            ws[pos] = area * weights[q]
                            owner[pos] = i
                            pos += 1
    return xs, ys, ws, owner


@njit(cache=True)
def reduce_moments(xs, ys, ws, owner, logphi, n, with_inertia):
    """Per-cell log shift, rescaled mass, centroid and central polar moment.

    The returned mass and moment are relative to ``exp(shift)``.
    """
    shift = np.full(n, -np.inf)
    for k in range(xs.shape[0]):
        if logphi[k] > shift[owner[k]]:
            shift[owner[k]] = logphi[k]
    for i in range(n):
        if not np.isfinite(shift[i]):
            shift[i] = 0.0
    wk = np.empty(xs.shape[0])
    m = np.zeros(n)
    sx = np.zeros(n)
    sy = np.zeros(n)
    for k in range(xs.shape[0]):
        lp = logphi[k] - shift[owner[k]]
        v = ws[k] * math.exp(lp) if np.isfinite(lp) else 0.0
        wk[k] = v
        o = owner[k]
        m[o] += v
        sx[o] += v * xs[k]
        sy[o] += v * ys[k]
    cx = np.full(n, np.nan)
    cy = np.full(n, np.nan)
    for i in range(n):
        if m[i] > 0.0:
            cx[i] = sx[i] / m[i]
            cy[i] = sy[i] / m[i]
    j = np.zeros(n)
    if with_inertia:
        for k in range(xs.shape[0]):
            o = owner[k]
            if m[o] > 0.0:
                dx = xs[k] - cx[o]
                dy = ys[k] - cy[o]
                j[o] += wk[k] * (dx * dx + dy * dy)
    else:
        j[:] = np.nan
    return shift, m, cx, cy, j


@njit(cache=True)
def log_density(code, prm, x, y):
    """``log phi`` for the built-in density families, selected by ``code``."""
    if code == 1:
        dx = x - prm[0]
        dy = y - prm[1]
        return -prm[2] * (dx * dx + dy * dy)
    if code == 2:
        s = prm[0] * x + prm[1] * y + prm[2]
        return -prm[3] * s * s
    if code == 3 or code == 4:
        dx = x - prm[2]
        dy = y - prm[3]
        s = prm[0] * dx * dx + prm[1] * dy * dy - prm[4] * prm[4]
        if code == 3:
            return -prm[5] * s * s
        return -prm[5] * s * (math.atan(prm[6] * s) / math.pi + 0.5)
    return 0.0


@njit(cache=True)
def _seg_dist2(px, py, ax, ay, bx, by):
    ex, ey = bx - ax, by - ay
    ee = ex * ex + ey * ey
    t = 0.0 if ee == 0.0 else min(1.0, max(0.0, ((px - ax) * ex + (py - ay) * ey) / ee))
    dx, dy = ax + t * ex - px, ay + t * ey - py
    return dx * dx + dy * dy


@njit(cache=True)
def _origin_dist2_range(x0, y0, x1, y1, x2, y2):
    """Smallest and largest squared distance from the origin to a triangle."""
    hi = max(x0 * x0 + y0 * y0, x1 * x1 + y1 * y1, x2 * x2 + y2 * y2)
    c0 = x0 * y1 - x1 * y0
    c1 = x1 * y2 - x2 * y1
    c2 = x2 * y0 - x0 * y2
    if (c0 >= 0.0 and c1 >= 0.0 and c2 >= 0.0) or (c0 <= 0.0 and c1 <= 0.0 and c2 <= 0.0):
        return 0.0, hi
    lo = min(_seg_dist2(0.0, 0.0, x0, y0, x1, y1), _seg_dist2(0.0, 0.0, x1, y1, x2, y2),
             _seg_dist2(0.0, 0.0, x2, y2, x0, y0))
    return lo, hi


@njit(cache=True)
def _neg_square_range(k, lo, hi):
    """Range of ``-k s^2`` for ``s`` in ``[lo, hi]``."""
    top = 0.0 if lo <= 0.0 <= hi else min(lo * lo, hi * hi)
    return -k * max(lo * lo, hi * hi), -k * top


@njit(cache=True)
def log_density_range(code, prm, x0, y0, x1, y1, x2, y2):
    """Bounds ``(lo, hi)`` of ``log phi`` over a triangle for the built-in families."""
    if code == 1:
        lo, hi = _origin_dist2_range(x0 - prm[0], y0 - prm[1], x1 - prm[0], y1 - prm[1],
                                     x2 - prm[0], y2 - prm[1])
        return -prm[2] * hi, -prm[2] * lo
    if code == 2:
        s0 = prm[0] * x0 + prm[1] * y0 + prm[2]
        s1 = prm[0] * x1 + prm[1] * y1 + prm[2]
        s2 = prm[0] * x2 + prm[1] * y2 + prm[2]
        return _neg_square_range(prm[3], min(s0, s1, s2), max(s0, s1, s2))
    if code == 3 or code == 4:
        # the level is a squared distance in scaled coordinates
        ra, rb = math.sqrt(prm[0]), math.sqrt(prm[1])
        lo, hi = _origin_dist2_range(ra * (x0 - prm[2]), rb * (y0 - prm[3]), ra * (x1 - prm[2]),
                                     rb * (y1 - prm[3]), ra * (x2 - prm[2]), rb * (y2 - prm[3]))
        r2 = prm[4] * prm[4]
        if code == 3:
            return _neg_square_range(prm[5], lo - r2, hi - r2)
        # s (atan(ell s) / pi + 1/2) is increasing in s
        a, b = lo - r2, hi - r2
        ga = a * (math.atan(prm[6] * a) / math.pi + 0.5)
        gb = b * (math.atan(prm[6] * b) / math.pi + 0.5)
        return -prm[5] * gb, -prm[5] * ga
    return 0.0, 0.0


@njit(cache=True)
def _tri_rule(code, prm, x0, y0, x1, y1, x2, y2, ax, ay, shift, bary, weights, out):
    """Rule sums of ``phi``, ``phi dx``, ``phi dy``, ``phi |d|^2`` with ``d = q - (ax, ay)``.

    Returns the largest ``log phi`` seen at the nodes.
    """
    area = 0.5 * abs((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0))
    out[0] = 0.0
    out[1] = 0.0
    out[2] = 0.0
    out[3] = 0.0
    top = -math.inf
    for q in range(weights.shape[0]):
        x = bary[q, 0] * x0 + bary[q, 1] * x1 + bary[q, 2] * x2
        y = bary[q, 0] * y0 + bary[q, 1] * y1 + bary[q, 2] * y2
        lp = log_density(code, prm, x, y)
        if lp > top:
            top = lp
        v = area * weights[q] * math.exp(lp - shift)
        dx = x - ax
        dy = y - ay
        out[0] += v
        out[1] += v * dx
        out[2] += v * dy
        out[3] += v * (dx * dx + dy * dy)
    return top


@njit(cache=True)
def _fan_adaptive(verts, s, cnt, ax, ay, code, prm, shift, budget, bary, weights, max_depth,
                  stack, depth, tot, one, kid, acc, tri, max_var):
    """Adaptive sums over one cell's fan; returns ``(triangles, peak log phi)``.

    A triangle is accepted when the split test passes and the sampled
    maximum of ``log phi`` is within ``max_var`` of its analytic bound, or
    when that bound is negligible.
    """
    used = 0
    peak = -math.inf
    tot[:] = 0.0
    for k in range(cnt):
        kb = k + 1 if k + 1 < cnt else 0
        stack[0, 0] = ax
        stack[0, 1] = ay
        stack[0, 2] = verts[s + k, 0]
        stack[0, 3] = verts[s + k, 1]
        stack[0, 4] = verts[s + kb, 0]
        stack[0, 5] = verts[s + kb, 1]
        depth[0] = 0
        top = 1
        while top > 0:
            top -= 1
            x0, y0, x1, y1 = stack[top, 0], stack[top, 1], stack[top, 2], stack[top, 3]
            x2, y2 = stack[top, 4], stack[top, 5]
            d = depth[top]
            _tri_rule(code, prm, x0, y0, x1, y1, x2, y2, ax, ay, shift, bary, weights, one)
            m01, m01y = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            m12, m12y = 0.5 * (x1 + x2), 0.5 * (y1 + y2)
            m20, m20y = 0.5 * (x2 + x0), 0.5 * (y2 + y0)
            tri[0, 0], tri[0, 1], tri[0, 2], tri[0, 3], tri[0, 4], tri[0, 5] = x0, y0, m01, m01y, m20, m20y
            tri[1, 0], tri[1, 1], tri[1, 2], tri[1, 3], tri[1, 4], tri[1, 5] = m01, m01y, x1, y1, m12, m12y
            tri[2, 0], tri[2, 1], tri[2, 2], tri[2, 3], tri[2, 4], tri[2, 5] = m20, m20y, m12, m12y, x2, y2
            tri[3, 0], tri[3, 1], tri[3, 2], tri[3, 3], tri[3, 4], tri[3, 5] = m01, m01y, m12, m12y, m20, m20y
            acc[:] = 0.0
            seen = -math.inf
            for c in range(4):
                lp = _tri_rule(code, prm, tri[c, 0], tri[c, 1], tri[c, 2], tri[c, 3], tri[c, 4], tri[c, 5],
                               ax, ay, shift, bary, weights, kid)
                seen = max(seen, lp)
                for r in range(4):
                    acc[r] += kid[r]
                for r in range(3):
                    lp = log_density(code, prm, tri[c, 2 * r], tri[c, 2 * r + 1])
                    seen = max(seen, lp)
            area = 0.5 * abs((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0))
            if seen > peak:
                peak = seen
            # a sharp feature can slip between the rule nodes of both estimates
            _, hi = log_density_range(code, prm, x0, y0, x1, y1, x2, y2)
            resolved = hi - seen <= max_var or math.exp(hi - shift) <= budget
            close = abs(acc[0] - one[0]) <= budget * area + 1e-13 * abs(acc[0])
            if (close and resolved) or d >= max_depth:
                for r in range(4):
                    tot[r] += acc[r]
                used += 4
            else:
                for c in range(4):
                    for r in range(6):
                        stack[top, r] = tri[c, r]
                    depth[top] = d + 1
                    top += 1
    return used, peak


@njit(cache=True)
def adaptive_moments(verts, offsets, code, prm, bary, weights, rel_cell, rel_total, max_depth, max_var):
    """Per-cell moments by recursive 4-splitting of the vertex-mean fan.

    A loose pass locates each cell's peak of ``log phi`` and estimates its
    mass.  The final pass accepts a triangle once its one-level and split
    mass estimates agree within its share of the cell area times
    ``max(rel_cell * cell mass, rel_total * total mass)``, so cells carrying
    negligible mass are not over-resolved.  Integrals are relative to
    ``exp(shift[i])``.  Returns ``(shift, m, cx, cy, j, triangles)`` with
    ``j`` the polar moment about the centroid.
    """
    n = offsets.shape[0] - 1
    shift = np.zeros(n)
    hint = np.zeros(n)
    anchor = np.zeros((n, 2))
    areas = np.zeros(n)
    m = np.zeros(n)
    cx = np.full(n, np.nan)
    cy = np.full(n, np.nan)
    jj = np.zeros(n)
    used = 0
    cap = 3 * max_depth + 4
    stack = np.empty((cap, 6))
    depth = np.empty(cap, dtype=np.int64)
    one = np.empty(4)
    kid = np.empty(4)
    acc = np.empty(4)
    tot = np.empty(4)
    tri = np.empty((4, 6))
    loose = math.sqrt(rel_cell)
    live = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        s = offsets[i]
        cnt = offsets[i + 1] - s
        if cnt < 3:
            continue
        ax = 0.0
        ay = 0.0
        for k in range(cnt):
            ax += verts[s + k, 0]
            ay += verts[s + k, 1]
        ax /= cnt
        ay /= cnt
        cell_area = 0.0
        for k in range(cnt):
            kb = k + 1 if k + 1 < cnt else 0
            cell_area += (verts[s + k, 0] - ax) * (verts[s + kb, 1] - ay) - (verts[s + kb, 0] - ax) * (verts[s + k, 1] - ay)
        cell_area = 0.5 * abs(cell_area)
        if not cell_area > 0.0:
            continue
        top_lp = -math.inf
        for k in range(cnt):
            kb = k + 1 if k + 1 < cnt else 0
            for q in range(weights.shape[0]):
                x = bary[q, 0] * ax + bary[q, 1] * verts[s + k, 0] + bary[q, 2] * verts[s + kb, 0]
                y = bary[q, 0] * ay + bary[q, 1] * verts[s + k, 1] + bary[q, 2] * verts[s + kb, 1]
                lp = log_density(code, prm, x, y)
                if lp > top_lp:
                    top_lp = lp
        if not np.isfinite(top_lp):
            continue
        # mass scale from the absolute weights: the signed rule can go negative on sharp peaks
        h0 = 0.0
        wabs = 0.0
        for q in range(weights.shape[0]):
            wabs += abs(weights[q])
        for k in range(cnt):
            kb = k + 1 if k + 1 < cnt else 0
            tri_area = 0.5 * abs((verts[s + k, 0] - ax) * (verts[s + kb, 1] - ay)
                                 - (verts[s + kb, 0] - ax) * (verts[s + k, 1] - ay))
            for q in range(weights.shape[0]):
                x = bary[q, 0] * ax + bary[q, 1] * verts[s + k, 0] + bary[q, 2] * verts[s + kb, 0]
                y = bary[q, 0] * ay + bary[q, 1] * verts[s + k, 1] + bary[q, 2] * verts[s + kb, 1]
                h0 += tri_area * abs(weights[q]) / wabs * math.exp(log_density(code, prm, x, y) - top_lp)
        u, peak = _fan_adaptive(verts, s, cnt, ax, ay, code, prm, top_lp, loose * h0 / cell_area, bary,
                                weights, max_depth, stack, depth, tot, one, kid, acc, tri, max_var)
        used += u
        mass = tot[0]
        if peak > top_lp:
            mass *= math.exp(top_lp - peak)
            top_lp = peak
        live[i] = True
        shift[i] = top_lp
        hint[i] = abs(mass)
        anchor[i, 0] = ax
        anchor[i, 1] = ay
        areas[i] = cell_area
    gmax = -math.inf
    for i in range(n):
        if live[i] and shift[i] > gmax:
            gmax = shift[i]
    total = 0.0
    for i in range(n):
        if live[i]:
            total += hint[i] * math.exp(shift[i] - gmax)
    for i in range(n):
        if not live[i]:
            continue
        s = offsets[i]
        cnt = offsets[i + 1] - s
        ax = anchor[i, 0]
        ay = anchor[i, 1]
        # global budget expressed in this cell's shifted units
        glob = rel_total * total * math.exp(min(gmax - shift[i], 700.0))
        budget = max(rel_cell * hint[i], glob) / areas[i]
        u, _ = _fan_adaptive(verts, s, cnt, ax, ay, code, prm, shift[i], budget, bary,
                             weights, max_depth, stack, depth, tot, one, kid, acc, tri, max_var)
        used += u
        m[i] = tot[0]
        if tot[0] > 0.0:
            ux = tot[1] / tot[0]
            uy = tot[2] / tot[0]
            cx[i] = ax + ux
            cy[i] = ay + uy
            jj[i] = max(tot[3] - tot[0] * (ux * ux + uy * uy), 0.0)
    return shift, m, cx, cy, jj, used
