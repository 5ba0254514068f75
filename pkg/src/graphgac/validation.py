"""Analytic test fields and the relative-error experiments built on them.

Two fields are provided. The isotropic Gaussian bump
``exp(-((x-x0)^2 + (y-y0)^2) / (2 s^2))`` has circular level sets whose
curvature is ``-1/r`` (the gradient points toward the center). The conic
function ``sqrt((x-x0)^2/a^2 + (y-y0)^2/b^2)`` has elliptical level sets with
curvature

    (X^2/(a^4 b^2) + Y^2/(b^4 a^2)) / (X^2/a^4 + Y^2/b^4)^(3/2),

``X = x - x0``, ``Y = y - y0``, obtained from
``(u_xx u_y^2 - 2 u_x u_y u_xy + u_yy u_x^2) / |grad u|^3`` applied to the
squared radicand (the level sets are the same).
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import calculus as calc
from . import filters as flt
from .errors import ConfigError, EmptyInputError
from .spatial_graph import random_rgg


@dataclass(frozen=True)
class AnalyticField:
    kind: str
    scale: tuple = (0.25,)
    center: tuple = (0.5, 0.5)

    def __post_init__(self):
        if self.kind not in ("gaussian", "conic"):
            raise ConfigError(f"unknown analytic field {self.kind!r}")
        need = 1 if self.kind == "gaussian" else 2
        if len(self.scale) != need or min(self.scale) <= 0:
            raise ConfigError(f"{self.kind} needs {need} positive scale parameter(s)")

    @classmethod
    def gaussian(cls, sigma: float = 0.25, center=(0.5, 0.5)) -> "AnalyticField":
        return cls("gaussian", (float(sigma),), tuple(map(float, center)))

    @classmethod
    def conic(cls, alpha: float = 0.4, beta: float = 0.3, center=(-0.25, 0.5)) -> "AnalyticField":
        return cls("conic", (float(alpha), float(beta)), tuple(map(float, center)))

    def _offsets(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return pts[:, 0] - self.center[0], pts[:, 1] - self.center[1]

    def value(self, pts) -> np.ndarray:
        X, Y = self._offsets(pts)
        if self.kind == "gaussian":
            s = self.scale[0]
            return np.exp(-(X * X + Y * Y) / (2 * s * s))
        a, b = self.scale
        return np.sqrt(X * X / a ** 2 + Y * Y / b ** 2)

    def gradient(self, pts) -> np.ndarray:
        X, Y = self._offsets(pts)
        if self.kind == "gaussian":
            s = self.scale[0]
            v = np.exp(-(X * X + Y * Y) / (2 * s * s))
            return np.column_stack([-X * v / s ** 2, -Y * v / s ** 2])
        a, b = self.scale
        u = np.sqrt(X * X / a ** 2 + Y * Y / b ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.column_stack([X / (a ** 2 * u), Y / (b ** 2 * u)])
        g[u == 0] = 0.0
        return g

    def curvature(self, pts) -> np.ndarray:
        """Curvature of the level set through each point (div of the unit gradient)."""
        X, Y = self._offsets(pts)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "gaussian":
                k = -1.0 / np.hypot(X, Y)
            else:
                a, b = self.scale
                num = X * X / (a ** 4 * b ** 2) + Y * Y / (b ** 4 * a ** 2)
                k = num / (X * X / a ** 4 + Y * Y / b ** 4) ** 1.5
        return k


def relative_error(approx, exact, exclude=None) -> float:
    """Energy of the error divided by the energy of the exact field over the included vertices."""
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if approx.shape != exact.shape:
        raise ValueError("fields differ in shape")
    keep = np.ones(len(exact), dtype=bool) if exclude is None else ~np.asarray(exclude, dtype=bool)
    diff = (approx - exact)[keep]
    ex = exact[keep]
    den = float(np.sum(ex * ex))
    if den == 0:
        raise ZeroDivisionError("exact field has zero energy on the included vertices")
    return float(np.sum(diff * diff)) / den


# ---------------------------------------------------------------- error tables

@dataclass
class ErrorTable:
    rows: list = field(default_factory=list)

    COLUMNS = ("n", "trial", "operator", "filter", "e_r")

    def add(self, n, trial, operator, filt, e_r):
        if not e_r >= 0:
            raise ValueError("relative error must be non-negative")
        self.rows.append((int(n), int(trial), str(operator), str(filt), float(e_r)))

    def extend(self, rows):
        for r in rows:
            self.add(*r)

    def sizes(self) -> list:
        return sorted({r[0] for r in self.rows})

    def series(self, operator, filt):
        return [r for r in self.rows if r[2] == operator and r[3] == filt]

    def summary(self, operator, filt, how: str = "median") -> dict:
        """``{n: statistic of e_r over trials}``."""
        stat = np.median if how == "median" else np.mean
        out = {}
        for n in self.sizes():
            vals = [r[4] for r in self.series(operator, filt) if r[0] == n]
            if vals:
                out[n] = float(stat(vals))
        return out

    def methods(self) -> list:
        seen = []
        for r in self.rows:
            if (r[2], r[3]) not in seen:
                seen.append((r[2], r[3]))
        return seen

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for n, t, op, f, e in self.rows:
            w.writerow([n, t, op, f, repr(e)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "ErrorTable":
        t = cls()
        with open(path, newline="") as fh:
            r = csv.DictReader(fh)
            if tuple(r.fieldnames or ()) != cls.COLUMNS:
                raise ValueError(f"{path}: expected columns {cls.COLUMNS}")
            for row in r:
                t.add(row["n"], row["trial"], row["operator"], row["filter"], float(row["e_r"]))
        return t

    def summary_rows(self):
        """(operator, filter, n, median, mean) for every method and size."""
        out = []
        for op, f in self.methods():
            med = self.summary(op, f, "median")
            mean = self.summary(op, f, "mean")
            for n in med:
                out.append((op, f, n, med[n], mean[n]))
        return out


def trial_seed(seed: int, n: int, trial: int) -> np.random.SeedSequence:
    """RNG stream for one (size, trial) cell, independent of scheduling."""
    return np.random.SeedSequence([int(seed), int(n), int(trial)])


def worker_count() -> int:
    """Workers for trial-level parallelism from ``GAC_THREADS`` (unset: 1, ``0``: all cores)."""
    raw = os.environ.get("GAC_THREADS")
    if raw is None or raw.strip() == "":
        return 1
    k = int(raw)
    if k < 0:
        raise ConfigError("GAC_THREADS must be non-negative")
    if k == 0:
        return os.cpu_count() or 1
    return k


def _run_cells(fn, sizes, trials, seed, C) -> list:
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    if list(sizes) != sorted(sizes) or len(sizes) == 0:
        raise ConfigError("sizes must be a non-empty ascending list")
    cells = [(n, t) for n in sizes for t in range(trials)]

    def one(cell):
        n, t = cell
        graph = random_rgg(n, C, seed=np.random.default_rng(trial_seed(seed, n, t)))
        return [(n, t) + r for r in fn(graph)]

    k = worker_count()
    if k > 1:
        with ThreadPoolExecutor(max_workers=k) as ex:
            parts = list(ex.map(one, cells))
    else:
        parts = [one(c) for c in cells]
    return [r for p in parts for r in p]


GRADIENT_FILTERS = ("none", "average", "median")


def gradient_errors(graph, fld: AnalyticField):
    """(operator, filter, e_r) rows for the geometric gradient, raw and filtered."""
    u = fld.value(graph.points)
    exact = fld.gradient(graph.points)
    raw = calc.gradient_geometric(graph, u)
    out = []
    for f in GRADIENT_FILTERS:
        est = flt.apply_filter(graph, raw, f)
        out.append(("geometric", f, relative_error(est, exact, graph.isolated)))
    return out


def gradient_convergence_experiment(fld: AnalyticField, sizes=(1000, 2000, 4000, 8000), trials: int = 10,
                                    C: float = 0.6, seed: int = 0) -> ErrorTable:
    t = ErrorTable()
    t.extend(_run_cells(lambda g: gradient_errors(g, fld), sizes, trials, seed, C))
    return t


CURVATURE_FILTERS = ("average", "median")


def curvature_errors(graph, fld: AnalyticField, filters=CURVATURE_FILTERS):
    """(operator, filter, e_r) rows: each filter is applied to the gradient and to the curvature."""
    u = fld.value(graph.points)
    exact = fld.curvature(graph.points)
    raw = calc.gradient_geometric(graph, u)
    out = []
    for f in filters:
        F = calc.unit_field(flt.apply_filter(graph, raw, f))
        for op, fn in calc.CURVATURE_OPERATORS.items():
            k = flt.apply_filter(graph, fn(graph, F), f)
            out.append((op, f, relative_error(k, exact, graph.isolated)))
    return out


def curvature_convergence_experiment(fld: AnalyticField, sizes=(1000, 2000, 4000, 8000), trials: int = 10,
                                     C: float = 0.6, seed: int = 0, filters=CURVATURE_FILTERS) -> ErrorTable:
    t = ErrorTable()
    t.extend(_run_cells(lambda g: curvature_errors(g, fld, filters), sizes, trials, seed, C))
    return t


def error_exponent_fit(table: ErrorTable, operator: str = "geometric", filt: str = "none") -> float:
    """Least-squares slope of log(median e_r) against log(n)."""
    med = table.summary(operator, filt, "median")
    if len(med) < 3:
        raise EmptyInputError("exponent fit needs at least 3 sizes")
    n = np.array(sorted(med), dtype=float)
    e = np.array([med[k] for k in sorted(med)])
    if np.any(e <= 0):
        raise ValueError("cannot fit a power law to zero errors")
    slope, _ = np.polyfit(np.log(n), np.log(e), 1)
    return float(slope)


def riemann_gradient_oracle(fld: AnalyticField, point, partitions: int = 10 ** 6, block: int = 1 << 18) -> np.ndarray:
    """(1/pi) * sum_k D_phi_k u(x) e_phi_k * (2 pi / P) over P equally spaced directions."""
    if partitions < 8:
        raise ConfigError("partitions must be at least 8")
    g = fld.gradient(np.asarray(point, dtype=float).reshape(1, 2))[0]
    h = 2.0 * np.pi / partitions
    acc = np.zeros(2)
    for s in range(0, partitions, block):
        phi = h * np.arange(s, min(s + block, partitions))
        c, sn = np.cos(phi), np.sin(phi)
        d = g[0] * c + g[1] * sn
        acc += [np.sum(d * c), np.sum(d * sn)]
    return acc * h / np.pi


def sample_delta_phi(N: int, count: int, seed=None) -> np.ndarray:
    """Neighbor angles of ``count`` fans with ``N`` uniformly random directions, shape (count, N)."""
    from .spatial_graph import fan_from_angles

    rng = np.random.default_rng(seed)
    phi = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=(count, N)), axis=1)
    indptr = np.arange(0, count * N + 1, N)
    dphi, _ = fan_from_angles(phi.ravel(), indptr)
    return dphi.reshape(count, N)
