"""Spatial graphs in the plane and the per-vertex neighbor-angle geometry.

Every operator in the package reads its neighborhood through the fan arrays
built here: for each vertex the neighbors are sorted by edge angle ``phi`` and
each neighbor owns the circular arc between the bisectors with its angular
predecessor and successor. ``delta_phi`` is the span of that arc and ``omega``
its start angle, so the arcs of a vertex tile the full circle.

Adjacency is stored in CSR form (``indptr``/``indices``) with the fan arrays
aligned entry-by-entry with ``indices``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DuplicatePointError, EmptyInputError

TWO_PI = 2.0 * np.pi

UNIT_SQUARE = (0.0, 0.0, 1.0, 1.0)


def sample_uniform_points(n: int, domain=UNIT_SQUARE, seed=None) -> np.ndarray:
    """Draw ``n`` i.i.d. uniform points from the rectangle ``(x0, y0, x1, y1)``.

    ``seed`` may be an int, a sequence of ints or a ``numpy.random.Generator``.
    """
    if n < 1:
        raise EmptyInputError("need at least one point")
    x0, y0, x1, y1 = map(float, domain)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"domain {domain!r} has no area")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random((n, 2))
    return np.column_stack([x0 + (x1 - x0) * u[:, 0], y0 + (y1 - y0) * u[:, 1]])


def rgg_radius(n: int, C: float) -> float:
    """Connection radius ``C * n**(-1/3)``, the rate that balances the gradient error terms."""
    if n < 1 or C <= 0:
        raise ValueError("rgg_radius needs n >= 1 and C > 0")
    return C * n ** (-1.0 / 3.0)


def check_distinct(points: np.ndarray) -> None:
    """Raise DuplicatePointError naming the first pair of coincident vertices."""
    if len(points) < 2:
        return
    order = np.lexsort((points[:, 1], points[:, 0]))
    sp = points[order]
    same = np.flatnonzero(np.all(sp[1:] == sp[:-1], axis=1))
    if same.size:
        k = same[0]
        i, j = sorted((int(order[k]), int(order[k + 1])))
        raise DuplicatePointError(i, j, points[i])


# Half of the 3x3 cell stencil; each unordered pair of cells is visited once.
_HALF_STENCIL = ((0, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


def radius_pairs(points, radius: float) -> np.ndarray:
    """All index pairs ``(i, j)``, ``i < j``, with ``0 < d(i, j) <= radius``.

    Points are bucketed into a uniform grid with cell size ``radius`` so only
    the 3x3 block of cells around each point is scanned. Output rows are in
    lexicographic order.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    origin = pts.min(axis=0)
    cells = np.floor((pts - origin) / radius).astype(np.int64)
    width = int(cells[:, 0].max()) + 3
    key = (cells[:, 1] + 1) * width + (cells[:, 0] + 1)
    order = np.argsort(key, kind="stable")
    skey = key[order]
    idx = np.arange(n)
    chunks = []
    for dx, dy in _HALF_STENCIL:
        target = key + dy * width + dx
        lo = np.searchsorted(skey, target, side="left")
        hi = np.searchsorted(skey, target, side="right")
        cnt = hi - lo
        total = int(cnt.sum())
        if total == 0:
            continue
        src = np.repeat(idx, cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        dst = order[np.repeat(lo, cnt) + offs]
        if dx == 0 and dy == 0:
            keep = src < dst
            src, dst = src[keep], dst[keep]
        d = np.hypot(pts[dst, 0] - pts[src, 0], pts[dst, 1] - pts[src, 1])
        keep = (d <= radius) & (d > 0)
        chunks.append(np.column_stack([src[keep], dst[keep]]))
    if not chunks:
        return np.empty((0, 2), dtype=np.int64)
    pairs = np.sort(np.concatenate(chunks), axis=1)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs


def fan_from_angles(phi_sorted: np.ndarray, indptr: np.ndarray):
    """Neighbor angles and bisector start angles for angle-sorted CSR rows.

    Equal consecutive angles within a row form a tie group: the first member
    (the nearest neighbor, by the sort order) receives the whole arc and the
    others get ``delta_phi = 0`` with ``omega`` at the end of the leader's arc.
    A row with a single distinct angle gets ``delta_phi = 2*pi`` and
    ``omega = phi - pi``; both follow from the cyclic formulas.
    """
    phi = np.asarray(phi_sorted, dtype=float)
    indptr = np.asarray(indptr, dtype=np.int64)
    n = len(indptr) - 1
    m = len(phi)
    if m == 0:
        return np.empty(0), np.empty(0)
    deg = np.diff(indptr)
    row = np.repeat(np.arange(n), deg)
    lead = np.ones(m, dtype=bool)
    lead[1:] = phi[1:] != phi[:-1]
    lead[indptr[:-1][deg > 0]] = True

    L = np.flatnonzero(lead)
    phi_l = phi[L]
    cnt_l = np.bincount(row[L], minlength=n)
    ptr_l = np.concatenate([[0], np.cumsum(cnt_l)])
    j = np.arange(len(L))
    r = row[L]
    is_first = j == ptr_l[r]
    is_last = j == ptr_l[r + 1] - 1
    prev = np.where(is_first, ptr_l[r + 1] - 1, j - 1)
    nxt = np.where(is_last, ptr_l[r], j + 1)
    phi_prev = phi_l[prev] - np.where(is_first, TWO_PI, 0.0)
    phi_next = phi_l[nxt] + np.where(is_last, TWO_PI, 0.0)
    dphi_l = 0.5 * (phi_next - phi_prev)
    omega_l = 0.5 * (phi_l + phi_prev)

    comp = np.cumsum(lead) - 1
    dphi = np.where(lead, dphi_l[comp], 0.0)
    omega = np.where(lead, omega_l[comp], omega_l[comp] + dphi_l[comp])
    return dphi, omega


@dataclass(frozen=True)
class NeighborFan:
    """One vertex's neighbors in ascending angle order with their arc geometry."""

    vertex: int
    neighbors: np.ndarray
    phi: np.ndarray
    dist: np.ndarray
    delta_phi: np.ndarray
    omega: np.ndarray

    def __len__(self) -> int:
        return len(self.neighbors)


class SpatialGraph:
    """Undirected, unweighted graph with vertices embedded in the plane.

    Parameters
    ----------
    points : (n, 2) array_like
        Vertex coordinates; must be finite and pairwise distinct.
    edges : (m, 2) array_like of int
        Undirected edges in any order or orientation. Self loops and
        repeated edges are dropped.

    The instance is treated as immutable: all arrays are flagged read-only.
    """

    def __init__(self, points, edges=()):
        pts = np.array(points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise ValueError("vertex coordinates must be finite")
        check_distinct(pts)
        n = len(pts)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise IndexError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        e = np.unique(np.sort(e, axis=1), axis=0)
        self._edges = e

        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        dx = pts[dst, 0] - pts[src, 0]
        dy = pts[dst, 1] - pts[src, 1]
        dist = np.hypot(dx, dy)
        phi = np.mod(np.arctan2(dy, dx), TWO_PI)
        phi[phi >= TWO_PI] = 0.0
        order = np.lexsort((dst, dist, phi, src))
        src, dst, dx, dy, dist, phi = (a[order] for a in (src, dst, dx, dy, dist, phi))

        deg = np.bincount(src, minlength=n)
        indptr = np.concatenate([[0], np.cumsum(deg)]).astype(np.int64)
        dphi, omega = fan_from_angles(phi, indptr)
        m2 = len(dst)
        nxt = np.arange(1, m2 + 1)
        ends = indptr[1:][deg > 0] - 1
        nxt[ends] = indptr[:-1][deg > 0]

        self.points = pts
        self.indptr = indptr
        self.indices = dst
        self.row = src
        self.degree = deg
        self.dist = dist
        self.phi = phi
        self.ex = dx / dist if m2 else dx
        self.ey = dy / dist if m2 else dy
        self.delta_phi = dphi
        self.omega = omega
        self.next_entry = nxt
        for a in (self.points, self.indptr, self.indices, self.row, self.degree, self.dist,
                  self.phi, self.ex, self.ey, self.delta_phi, self.omega, self.next_entry,
                  self._edges):
            a.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"SpatialGraph(n={self.n}, edges={self.n_edges})"

    def edges(self) -> np.ndarray:
        """Edge list with ``src < dst``, sorted lexicographically."""
        return self._edges

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def fan(self, v: int) -> NeighborFan:
        s = slice(self.indptr[v], self.indptr[v + 1])
        return NeighborFan(int(v), self.indices[s], self.phi[s], self.dist[s],
                           self.delta_phi[s], self.omega[s])

    @property
    def isolated(self) -> np.ndarray:
        return self.degree == 0

    @cached_property
    def padded_neighbors(self) -> np.ndarray:
        """(n, max_degree) neighbor table padded with the row's own index."""
        n = self.n
        width = int(self.degree.max()) if n and self.n_edges else 0
        table = np.repeat(np.arange(n)[:, None], max(width, 1), axis=1)
        if self.n_edges:
            col = np.arange(len(self.indices)) - self.indptr[self.row]
            table[self.row, col] = self.indices
        table.flags.writeable = False
        return table

    @cached_property
    def padded_closed(self) -> np.ndarray:
        """(n, max_degree + 1) table of each vertex followed by its neighbors, padded with ``n``."""
        n = self.n
        width = int(self.degree.max()) if n and self.n_edges else 0
        table = np.full((n, width + 1), n, dtype=np.int64)
        table[:, 0] = np.arange(n)
        if self.n_edges:
            col = np.arange(len(self.indices)) - self.indptr[self.row] + 1
            table[self.row, col] = self.indices
        table.flags.writeable = False
        return table

    def same_as(self, other: "SpatialGraph") -> bool:
        """Bit-identical comparison of positions and adjacency."""
        return (np.array_equal(self.points, other.points)
                and np.array_equal(self._edges, other._edges))


def neighbor_fan(graph: SpatialGraph, v: int) -> NeighborFan:
    if not 0 <= v < graph.n:
        raise IndexError(f"vertex {v} not in graph of {graph.n} vertices")
    return graph.fan(v)


def build_rgg(points, radius: float) -> SpatialGraph:
    """Random geometric graph: an edge joins every pair at distance at most ``radius``."""
    pts = np.array(points, dtype=float).reshape(-1, 2)
    if radius <= 0:
        raise ValueError("radius must be positive")
    return SpatialGraph(pts, radius_pairs(pts, radius))


def build_delaunay(points) -> SpatialGraph:
    """Graph whose edges are those of the Delaunay triangulation of ``points``."""
    from .delaunay import delaunay_edges

    pts = np.array(points, dtype=float).reshape(-1, 2)
    check_distinct(pts)
    return SpatialGraph(pts, delaunay_edges(pts))


def random_rgg(n: int, C: float = 0.6, seed=None, domain=UNIT_SQUARE) -> SpatialGraph:
    """Sample ``n`` uniform points and connect them at radius ``C * n**(-1/3)``."""
    return build_rgg(sample_uniform_points(n, domain, seed), rgg_radius(n, C))
