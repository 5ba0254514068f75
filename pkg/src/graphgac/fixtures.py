"""Synthetic test scenes: binary disks on random graphs and a coins-like raster."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import RasterImage
from .spatial_graph import SpatialGraph, random_rgg

DISK = ((0.5, 0.5, 0.25),)
TWO_DISKS = ((0.28, 0.5, 0.16), (0.72, 0.5, 0.16))


@dataclass
class Scene:
    graph: SpatialGraph
    intensity: np.ndarray
    truth: np.ndarray
    disks: tuple

    def member(self, k: int) -> np.ndarray:
        """Vertices inside the k-th disk."""
        cx, cy, r = self.disks[k]
        p = self.graph.points
        return np.hypot(p[:, 0] - cx, p[:, 1] - cy) <= r


def disks_mask(points, disks) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    inside = np.zeros(len(p), dtype=bool)
    for cx, cy, r in disks:
        inside |= np.hypot(p[:, 0] - cx, p[:, 1] - cy) <= r
    return inside


def disk_scene(n: int = 5500, C: float = 0.6, seed=0, disks=DISK) -> Scene:
    """Binary image (1 inside any disk, 0 elsewhere) on a random geometric graph."""
    g = random_rgg(n, C, seed=seed)
    truth = disks_mask(g.points, disks)
    return Scene(g, truth.astype(float), truth, tuple(disks))


def two_disks_scene(n: int = 5500, C: float = 0.45, seed=0) -> Scene:
    return disk_scene(n, C, seed, TWO_DISKS)


def jaccard(a, b) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    union = np.count_nonzero(a | b)
    return 1.0 if union == 0 else np.count_nonzero(a & b) / union


def coins_image(size: int = 96, seed=0, noise: float = 0.03) -> RasterImage:
    """Four bright discs of different brightness on a darker, slightly noisy background."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    x = (xx + 0.5) / size
    y = (yy + 0.5) / size
    img = np.full((size, size), 0.25)
    for cx, cy, r, level in ((0.28, 0.28, 0.15, 0.85), (0.72, 0.3, 0.13, 0.7),
                             (0.3, 0.72, 0.12, 0.75), (0.7, 0.7, 0.16, 0.9)):
        img[np.hypot(x - cx, y - cy) <= r] = level
    img += noise * rng.standard_normal(img.shape)
    return RasterImage.from_array(np.clip(img, 0.0, 1.0))


def interior_components(graph: SpatialGraph, labels) -> list:
    """Connected components of the subgraph induced by the labelled vertices, largest first."""
    labels = np.asarray(labels, dtype=bool)
    parent = np.arange(graph.n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    e = graph.edges()
    e = e[labels[e[:, 0]] & labels[e[:, 1]]]
    for a, b in e.tolist():
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(graph.n)])
    comps = [np.flatnonzero((roots == r) & labels) for r in np.unique(roots[labels])]
    return sorted(comps, key=len, reverse=True)


def component_scores(scene: Scene, labels) -> tuple:
    """(number of components, Jaccard of the best-matching component for each disk)."""
    comps = interior_components(scene.graph, labels)
    scores = []
    for k in range(len(scene.disks)):
        m = scene.member(k)
        best = 0.0
        for c in comps:
            mask = np.zeros(scene.graph.n, dtype=bool)
            mask[c] = True
            best = max(best, jaccard(mask, m))
        scores.append(best)
    return len(comps), scores
