"""CSV and JSON formats shared by the command-line tools.

points   x,y[,value]        one row per vertex, in vertex order
edges    src,dst            one row per undirected edge, src < dst
field    vertex,value       or vertex,vx,vy for vector fields
labels   vertex,interior    interior is 0 or 1

Floats are written with ``repr`` so files round-trip exactly and repeated runs
are byte-identical.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .spatial_graph import SpatialGraph


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_rows(path, required):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = [h.strip() for h in next(r, [])]
        missing = [c for c in required if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        rows = [row for row in r if row]
    return header, rows


def fmt(x) -> str:
    return repr(float(x))


def write_points(path, points, values=None):
    points = np.asarray(points, dtype=float)
    if values is None:
        _write_rows(path, ["x", "y"], [[fmt(x), fmt(y)] for x, y in points])
    else:
        _write_rows(path, ["x", "y", "value"],
                    [[fmt(x), fmt(y), fmt(v)] for (x, y), v in zip(points, values)])


def read_points(path):
    """Returns ``(points, values)``; ``values`` is None without a value column."""
    header, rows = _read_rows(path, ["x", "y"])
    ix, iy = header.index("x"), header.index("y")
    pts = np.array([[float(r[ix]), float(r[iy])] for r in rows], dtype=float).reshape(-1, 2)
    if "value" in header:
        iv = header.index("value")
        return pts, np.array([float(r[iv]) for r in rows])
    return pts, None


def write_edges(path, edges):
    _write_rows(path, ["src", "dst"], [[int(a), int(b)] for a, b in np.asarray(edges).reshape(-1, 2)])


def read_edges(path) -> np.ndarray:
    header, rows = _read_rows(path, ["src", "dst"])
    i, j = header.index("src"), header.index("dst")
    return np.array([[int(r[i]), int(r[j])] for r in rows], dtype=np.int64).reshape(-1, 2)


def write_field(path, values):
    a = np.asarray(values, dtype=float)
    if a.ndim == 1:
        _write_rows(path, ["vertex", "value"], [[i, fmt(v)] for i, v in enumerate(a)])
    else:
        _write_rows(path, ["vertex", "vx", "vy"], [[i, fmt(x), fmt(y)] for i, (x, y) in enumerate(a)])


def read_field(path, n: int | None = None) -> np.ndarray:
    """Scalar field from ``vertex,value`` rows or from a points file with a value column."""
    with open(path, newline="") as fh:
        header = [h.strip() for h in next(csv.reader(fh), [])]
    if "vertex" not in header:
        _, vals = read_points(path)
        if vals is None:
            raise ValueError(f"{path}: no value column")
        out = vals
    else:
        header, rows = _read_rows(path, ["vertex", "value"])
        iv, ix = header.index("vertex"), header.index("value")
        idx = np.array([int(r[iv]) for r in rows], dtype=np.int64)
        size = n if n is not None else (idx.max() + 1 if len(idx) else 0)
        if len(idx) != size or len(np.unique(idx)) != size or (size and (idx.min() < 0 or idx.max() >= size)):
            raise ValueError(f"{path}: expected one value for each of {size} vertices")
        out = np.empty(size)
        out[idx] = [float(r[ix]) for r in rows]
    if n is not None and len(out) != n:
        raise ValueError(f"{path}: {len(out)} values for {n} vertices")
    return out


def write_labels(path, labels):
    _write_rows(path, ["vertex", "interior"], [[i, int(bool(v))] for i, v in enumerate(labels)])


def read_labels(path) -> np.ndarray:
    header, rows = _read_rows(path, ["vertex", "interior"])
    iv, il = header.index("vertex"), header.index("interior")
    out = np.zeros(len(rows), dtype=bool)
    for r in rows:
        out[int(r[iv])] = int(r[il]) == 1
    return out


def save_graph(directory, graph: SpatialGraph, values=None):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_points(d / "points.csv", graph.points, values)
    write_edges(d / "edges.csv", graph.edges())


def load_graph(directory):
    """Graph from ``points.csv`` + ``edges.csv``; also returns the points' value column if any."""
    d = Path(directory)
    pts, vals = read_points(d / "points.csv")
    return SpatialGraph(pts, read_edges(d / "edges.csv")), vals


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------- seed regions

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_region(text: str):
    """``"circle cx cy r"`` or ``"rect x0 y0 x1 y1"`` to a predicate on (m, 2) point arrays."""
    parts = text.replace(",", " ").split()
    if not parts:
        raise ValueError("empty seed region")
    kind, nums = parts[0].lower(), parts[1:]
    if not all(re.fullmatch(_NUM, t) for t in nums):
        raise ValueError(f"bad numbers in seed region {text!r}")
    vals = [float(t) for t in nums]
    if kind == "circle" and len(vals) == 3:
        cx, cy, r = vals
        if r <= 0:
            raise ValueError("circle radius must be positive")
        return lambda p: np.hypot(p[:, 0] - cx, p[:, 1] - cy) <= r
    if kind in ("rect", "rectangle") and len(vals) == 4:
        x0, y0, x1, y1 = vals
        lo_x, hi_x = sorted((x0, x1))
        lo_y, hi_y = sorted((y0, y1))
        return lambda p: (p[:, 0] >= lo_x) & (p[:, 0] <= hi_x) & (p[:, 1] >= lo_y) & (p[:, 1] <= hi_y)
    raise ValueError(f"unrecognised seed region {text!r}; use 'circle cx cy r' or 'rect x0 y0 x1 y1'")


def resolve_region(text: str, graph: SpatialGraph) -> np.ndarray:
    """Seed mask from a geometric predicate or from a CSV file of vertex indices."""
    p = Path(text)
    if p.suffix.lower() == ".csv" or p.is_file():
        idx = []
        with open(p, newline="") as fh:
            for row in csv.reader(fh):
                if not row or not row[0].strip():
                    continue
                tok = row[0].strip()
                if tok.lstrip("-").isdigit():
                    idx.append(int(tok))
        idx = np.array(idx, dtype=np.int64)
        if len(idx) and (idx.min() < 0 or idx.max() >= graph.n):
            raise ValueError(f"{text}: vertex index out of range")
        mask = np.zeros(graph.n, dtype=bool)
        mask[idx] = True
        return mask
    return parse_region(text)(graph.points)
