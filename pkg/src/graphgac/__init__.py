"""Geodesic active contours on arbitrary 2D spatial graphs."""

from .calculus import (
    curvature_geometric,
    curvature_gradient_based,
    gradient_geometric,
    gradient_magnitude_maxdiff,
    gradient_weighted_sum,
    unit_field,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    DivergenceError,
    DuplicatePointError,
    EmptyInputError,
    FieldMismatchError,
    GacError,
    PgmFormatError,
)
from .filters import (
    GaussianParams,
    filter_average,
    filter_median,
    gaussian_derivative_normalized,
    gaussian_normalized,
    gaussian_simple,
    stopping_function,
)
from .gac import GacConfig, GacState, RunSummary, evolve_step, init_embedding, precompute_stopping, run
from .spatial_graph import (
    NeighborFan,
    SpatialGraph,
    build_delaunay,
    build_rgg,
    neighbor_fan,
    random_rgg,
    rgg_radius,
    sample_uniform_points,
)

__version__ = "0.1.0"
