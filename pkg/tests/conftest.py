import numpy as np
import pytest
from hypothesis import settings

from graphgac.spatial_graph import SpatialGraph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def star(angles, dists=None, center=(0.0, 0.0)):
    """Vertex 0 at ``center`` joined to one neighbor per angle."""
    angles = np.asarray(angles, dtype=float)
    dists = np.ones_like(angles) if dists is None else np.asarray(dists, dtype=float)
    pts = [center] + [(center[0] + d * np.cos(a), center[1] + d * np.sin(a)) for a, d in zip(angles, dists)]
    edges = [(0, i + 1) for i in range(len(angles))]
    return SpatialGraph(pts, edges)


@pytest.fixture
def cross():
    return star([0, np.pi / 2, np.pi, 3 * np.pi / 2])


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record a criterion outcome; lines are printed in the terminal summary."""
    def record(number, passed, detail=""):
        _CRITERIA[number] = (bool(passed), detail)
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, detail = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
