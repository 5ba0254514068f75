"""Gradient and level-set curvature approximations on spatial graphs.

Scalar fields are ``(n,)`` arrays and vector fields ``(n, 2)`` arrays indexed
by vertex. Every operator works per vertex from its neighbor fan only, with
sums accumulated in the fixed fan order, so results do not depend on how the
vertices are scheduled. Isolated vertices always receive zero.
"""

from __future__ import annotations

import numpy as np

from .errors import FieldMismatchError
from .spatial_graph import SpatialGraph

UNIT_EPS = 1e-12


def scalar_field(graph: SpatialGraph, u) -> np.ndarray:
    """Validate and return ``u`` as a float array aligned with ``graph``."""
    a = np.asarray(u, dtype=float)
    if a.shape != (graph.n,):
        raise FieldMismatchError(f"scalar field of shape {a.shape} on a graph with {graph.n} vertices")
    return a


def vector_field(graph: SpatialGraph, F) -> np.ndarray:
    a = np.asarray(F, dtype=float)
    if a.shape != (graph.n, 2):
        raise FieldMismatchError(f"vector field of shape {a.shape} on a graph with {graph.n} vertices")
    return a


def _row_sum(graph: SpatialGraph, w: np.ndarray) -> np.ndarray:
    return np.bincount(graph.row, weights=w, minlength=graph.n)


def _difference_quotients(graph: SpatialGraph, u: np.ndarray) -> np.ndarray:
    return (u[graph.indices] - u[graph.row]) / graph.dist


def gradient_geometric(graph: SpatialGraph, u) -> np.ndarray:
    """Angle-weighted gradient estimate.

    Each edge's difference quotient is applied along the edge direction and
    weighted by the neighbor's arc ``delta_phi``; the total is divided by pi,
    mirroring the identity grad u = (1/pi) * integral of D_phi u * e_phi.
    """
    u = scalar_field(graph, u)
    q = _difference_quotients(graph, u) * graph.delta_phi
    gx = _row_sum(graph, q * graph.ex)
    gy = _row_sum(graph, q * graph.ey)
    return np.column_stack([gx, gy]) / np.pi


def gradient_weighted_sum(graph: SpatialGraph, u) -> np.ndarray:
    """Plain mean of the edge difference-quotient vectors (every neighbor weighted equally)."""
    u = scalar_field(graph, u)
    q = _difference_quotients(graph, u)
    deg = np.maximum(graph.degree, 1)
    gx = _row_sum(graph, q * graph.ex) / deg
    gy = _row_sum(graph, q * graph.ey) / deg
    return np.column_stack([gx, gy])


def gradient_magnitude_maxdiff(graph: SpatialGraph, u) -> np.ndarray:
    """Largest absolute value difference along any incident edge; 0 for isolated vertices."""
    u = scalar_field(graph, u)
    return np.abs(u[graph.padded_neighbors] - u[:, None]).max(axis=1)


def unit_field(g, eps: float = UNIT_EPS) -> np.ndarray:
    """Normalize each vector; vectors with norm at most ``eps`` map to zero."""
    g = np.asarray(g, dtype=float)
    norm = np.hypot(g[:, 0], g[:, 1])
    ok = norm > eps
    out = np.zeros_like(g)
    out[ok] = g[ok] / norm[ok, None]
    return out


def degenerate_vertices(F) -> np.ndarray:
    """Vertices where the unit field is the zero vector (no defined level-set direction)."""
    F = np.asarray(F, dtype=float)
    return (F[:, 0] == 0.0) & (F[:, 1] == 0.0)


def sector_area(graph: SpatialGraph) -> np.ndarray:
    """Area of the union of circular sectors around each vertex, one per neighbor arc."""
    return _row_sum(graph, 0.5 * graph.delta_phi * graph.dist ** 2)


def curvature_geometric(graph: SpatialGraph, F, eps: float = UNIT_EPS) -> np.ndarray:
    """Divergence of ``F`` as boundary flux over the sector region divided by its area.

    The boundary of the region around ``v`` consists of one arc per neighbor
    (radius ``d(v, w_i)``, from ``omega_i`` to ``omega_{i+1}``) carrying the
    constant value ``F(w_i)``, joined by radial segments at ``omega_{i+1}``
    carrying the normalized mean of ``F(w_i)`` and ``F(w_{i+1})``. The fan is
    closed cyclically, ``w_N`` pairing with ``w_1``. When that mean is shorter
    than ``eps`` the unnormalized mean is used.

    Vertices where ``F`` itself is zero get curvature 0.
    """
    F = vector_field(graph, F)
    if graph.n_edges == 0:
        return np.zeros(graph.n)
    nxt = graph.next_entry
    w = graph.indices
    d = graph.dist
    om0 = graph.omega
    om1 = om0[nxt]
    s0, c0 = np.sin(om0), np.cos(om0)
    s1, c1 = np.sin(om1), np.cos(om1)

    Fw = F[w]
    arc = d * (Fw[:, 0] * (s1 - s0) + Fw[:, 1] * (c0 - c1))

    Fsum = Fw + F[w[nxt]]
    norm = np.hypot(Fsum[:, 0], Fsum[:, 1])
    ok = norm >= eps
    mean = np.where(ok[:, None], Fsum / np.where(ok, norm, 1.0)[:, None], 0.5 * Fsum)
    seg = (d[nxt] - d) * (mean[:, 0] * s1 - mean[:, 1] * c1)

    flux = _row_sum(graph, arc + seg)
    area = sector_area(graph)
    kappa = np.zeros(graph.n)
    has = area > 0
    kappa[has] = flux[has] / area[has]
    kappa[degenerate_vertices(F)] = 0.0
    return kappa


def curvature_gradient_based(graph: SpatialGraph, F) -> np.ndarray:
    """Divergence of ``F`` from the geometric gradient of each component.

    Equal to the x-part of ``gradient_geometric(F[:, 0])`` plus the y-part of
    ``gradient_geometric(F[:, 1])``.
    """
    F = vector_field(graph, F)
    q1 = _difference_quotients(graph, F[:, 0])
    q2 = _difference_quotients(graph, F[:, 1])
    terms = (q1 * graph.ex + q2 * graph.ey) * graph.delta_phi
    kappa = _row_sum(graph, terms) / np.pi
    kappa[degenerate_vertices(F)] = 0.0
    return kappa


CURVATURE_OPERATORS = {
    "geometric": curvature_geometric,
    "gradient-based": curvature_gradient_based,
}
