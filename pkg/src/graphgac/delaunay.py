"""Incremental Bowyer-Watson Delaunay triangulation.

Triangles are kept with explicit neighbor links so each insertion walks to
the containing triangle and grows the cavity by breadth-first search instead
of scanning every triangle. The orientation and incircle predicates evaluate
in floating point first and fall back to exact rational arithmetic when the
result is within the rounding error bound.

A bounding super-triangle is placed ``SUPER_SCALE`` extents away and its
triangles are discarded at the end. Convex-hull edges whose neighboring
circumcircle would have to reach the super-vertices (hull points collinear to
within about 1/SUPER_SCALE radians) can be lost; this does not affect the
empty-circumcircle property of the triangles that remain.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction

import numpy as np

from .errors import DegenerateInputError

SUPER_SCALE = 1.0e4

_EPS = np.finfo(float).eps / 2
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def _orient_exact(a, b, c) -> int:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    det = (Fraction(b[0]) - ax) * (Fraction(c[1]) - ay) - (Fraction(b[1]) - ay) * (Fraction(c[0]) - ax)
    return (det > 0) - (det < 0)


def orient(a, b, c) -> int:
    """Sign of the signed area of triangle abc: +1 counter-clockwise, -1 clockwise, 0 collinear."""
    l = (b[0] - a[0]) * (c[1] - a[1])
    r = (b[1] - a[1]) * (c[0] - a[0])
    det = l - r
    if abs(det) > _CCW_BOUND * (abs(l) + abs(r)):
        return 1 if det > 0 else -1
    return _orient_exact(a, b, c)


def _incircle_exact(a, b, c, d) -> int:
    dx, dy = Fraction(d[0]), Fraction(d[1])
    rows = []
    for p in (a, b, c):
        x = Fraction(p[0]) - dx
        y = Fraction(p[1]) - dy
        rows.append((x, y, x * x + y * y))
    (ax, ay, al), (bx, by, bl), (cx, cy, cl) = rows
    det = (al * (bx * cy - cx * by) + bl * (cx * ay - ax * cy) + cl * (ax * by - bx * ay))
    return (det > 0) - (det < 0)


def incircle(a, b, c, d) -> int:
    """+1 if d lies strictly inside the circumcircle of counter-clockwise abc, -1 outside, 0 on it."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    al = adx * adx + ady * ady
    bl = bdx * bdx + bdy * bdy
    cl = cdx * cdx + cdy * cdy
    bc = bdx * cdy - cdx * bdy
    ca = cdx * ady - adx * cdy
    ab = adx * bdy - bdx * ady
    det = al * bc + bl * ca + cl * ab
    perm = (al * (abs(bdx * cdy) + abs(cdx * bdy)) + bl * (abs(cdx * ady) + abs(adx * cdy))
            + cl * (abs(adx * bdy) + abs(bdx * ady)))
    if abs(det) > _ICC_BOUND * perm:
        return 1 if det > 0 else -1
    return _incircle_exact(a, b, c, d)


def _insertion_order(pts: np.ndarray) -> np.ndarray:
    # Serpentine sweep over a coarse grid keeps consecutive points close, so walks stay short.
    n = len(pts)
    lo = pts.min(axis=0)
    span = np.maximum(pts.max(axis=0) - lo, 1e-300)
    k = max(1, int(np.sqrt(n / 4.0)))
    gx = np.minimum((k * (pts[:, 0] - lo[0]) / span[0]).astype(int), k - 1)
    gy = np.minimum((k * (pts[:, 1] - lo[1]) / span[1]).astype(int), k - 1)
    sx = np.where(gy % 2 == 0, pts[:, 0], -pts[:, 0])
    return np.lexsort((sx, gy))


def triangulate(points) -> np.ndarray:
    """Delaunay triangles of ``points`` as an (m, 3) array of counter-clockwise vertex indices."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 3:
        raise DegenerateInputError("Delaunay triangulation needs at least 3 points")
    P = [tuple(p) for p in pts.tolist()]
    a0 = P[0]
    far = max(range(n), key=lambda i: (P[i][0] - a0[0]) ** 2 + (P[i][1] - a0[1]) ** 2)
    if not any(orient(a0, P[far], P[i]) != 0 for i in range(n)):
        raise DegenerateInputError("all points are collinear")

    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    cx, cy = (lo + hi) / 2
    s = SUPER_SCALE * max(float((hi - lo).max()), 1e-300)
    P.extend([(cx - 2 * s, cy - s), (cx + 2 * s, cy - s), (cx, cy + 2 * s)])

    # tri_v[t] = [a, b, c] counter-clockwise; tri_n[t][i] = triangle across the edge opposite tri_v[t][i].
    tri_v = [[n, n + 1, n + 2]]
    tri_n = [[-1, -1, -1]]
    alive = [True]
    last = 0

    for p_idx in _insertion_order(pts).tolist():
        p = P[p_idx]
        t = last
        if not alive[t]:
            t = next(i for i in range(len(alive) - 1, -1, -1) if alive[i])
        # Visibility walk to a triangle containing p.
        start = p_idx % 3
        while True:
            v = tri_v[t]
            moved = False
            for k in range(3):
                i = (start + k) % 3
                if orient(P[v[(i + 1) % 3]], P[v[(i + 2) % 3]], p) < 0:
                    t = tri_n[t][i]
                    moved = True
                    break
            if not moved:
                break

        bad = {t}
        queue = deque([t])
        while queue:
            cur = queue.popleft()
            for nb in tri_n[cur]:
                if nb < 0 or nb in bad:
                    continue
                a, b, c = tri_v[nb]
                if incircle(P[a], P[b], P[c], p) > 0:
                    bad.add(nb)
                    queue.append(nb)

        starts = {}
        ends = {}
        created = []
        for bt in sorted(bad):
            v = tri_v[bt]
            for i in range(3):
                nb = tri_n[bt][i]
                if nb >= 0 and nb in bad:
                    continue
                a, b = v[(i + 1) % 3], v[(i + 2) % 3]
                nt = len(tri_v)
                tri_v.append([p_idx, a, b])
                tri_n.append([nb, -1, -1])
                alive.append(True)
                if nb >= 0:
                    links = tri_n[nb]
                    links[links.index(bt)] = nt
                starts[a] = nt
                ends[b] = nt
                created.append(nt)
            alive[bt] = False
        for nt in created:
            _, a, b = tri_v[nt]
            tri_n[nt][1] = starts[b]
            tri_n[nt][2] = ends[a]
        last = created[-1]

    tris = [v for v, ok in zip(tri_v, alive) if ok and max(v) < n]
    return np.array(tris, dtype=np.int64).reshape(-1, 3)


def delaunay_edges(points) -> np.ndarray:
    """Unique undirected edges ``(i, j)``, ``i < j``, of the Delaunay triangulation."""
    tris = triangulate(points)
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    e = np.unique(np.sort(e, axis=1), axis=0)
    return e
