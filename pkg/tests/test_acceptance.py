"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (shown in the terminal summary) and then
asserts, so a failing criterion also fails the run.
"""

import time

import numpy as np
import pytest

from graphgac import calculus as calc
from graphgac import filters as flt
from graphgac import validation as V
from graphgac.delaunay import incircle, triangulate
from graphgac.fixtures import component_scores, disk_scene, jaccard, two_disks_scene
from graphgac.gac import GacConfig, run
from graphgac.io import parse_region
from graphgac.spatial_graph import SpatialGraph, build_rgg, fan_from_angles, rgg_radius, sample_uniform_points

SIZES = (1000, 2000, 4000, 8000)
TRIALS = 10


def random_star(rng, N):
    phi = rng.uniform(0, 2 * np.pi, N)
    d = rng.uniform(0.2, 1.0, N)
    pts = np.vstack([[0.0, 0.0], np.column_stack([d * np.cos(phi), d * np.sin(phi)])])
    return SpatialGraph(pts, [(0, i) for i in range(1, N + 1)])


def test_fan_tiling(criterion):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst_sum = worst_gap = 0.0
    for _ in range(1000):
        N = int(rng.integers(1, 31))
        phi = np.sort(rng.uniform(0, 2 * np.pi, N))
        dphi, omega = fan_from_angles(phi, np.array([0, N]))
        worst_sum = max(worst_sum, abs(dphi.sum() - 2 * np.pi))
        gap = (np.roll(omega, -1) - (omega + dphi)) % (2 * np.pi)
        worst_gap = max(worst_gap, np.minimum(gap, 2 * np.pi - gap).max())
    elapsed = time.perf_counter() - t0
    ok = worst_sum <= 1e-9 and worst_gap <= 1e-9 and elapsed < 1.0
    criterion(1, ok, f"max |sum - 2pi| = {worst_sum:.1e}, max gap = {worst_gap:.1e}, {elapsed:.2f} s")
    assert ok


def test_riemann_quadrature(criterion):
    fld = V.AnalyticField.gaussian()
    pts = np.random.default_rng(102).random((20, 2))
    t0 = time.perf_counter()
    err = max(np.abs(V.riemann_gradient_oracle(fld, p, 10 ** 6) - fld.gradient(p.reshape(1, 2))[0]).max()
              for p in pts)
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-6 and elapsed < 10
    criterion(2, ok, f"max error {err:.1e}, {elapsed:.2f} s")
    assert ok


def test_gradient_exactness(criterion):
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(200):
        rot = rng.uniform(0, 2 * np.pi)
        d = rng.uniform(0.1, 2.0, 4)
        phi = rot + np.arange(4) * np.pi / 2
        pts = np.vstack([rng.uniform(-1, 1, 2), np.zeros((4, 2))])
        pts[1:] = pts[0] + np.column_stack([d * np.cos(phi), d * np.sin(phi)])
        g = SpatialGraph(pts, [(0, i) for i in range(1, 5)])
        a = rng.normal(size=2)
        u = pts @ a + rng.normal()
        worst = max(worst, np.abs(calc.gradient_geometric(g, u)[0] - a).max())
    g = random_star(rng, 12)
    u = np.full(g.n, 3.7)
    zero = (np.all(calc.gradient_geometric(g, u) == 0) and np.all(calc.gradient_weighted_sum(g, u) == 0)
            and np.all(calc.gradient_magnitude_maxdiff(g, u) == 0)
            and np.all(flt.gaussian_derivative_normalized(g, u, 0.5) == 0))
    ok = worst <= 1e-12 and zero
    criterion(3, ok, f"max affine error {worst:.1e}, constants give exact zero: {zero}")
    assert ok


def test_telescoping_curvature(criterion):
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(1000):
        g = random_star(rng, int(rng.integers(1, 31)))
        th = rng.uniform(0, 2 * np.pi)
        F = np.tile([np.cos(th), np.sin(th)], (g.n, 1))
        worst = max(worst, np.abs(calc.curvature_geometric(g, F)).max())
    ok = worst <= 1e-12
    criterion(4, ok, f"max |kappa| {worst:.1e}")
    assert ok


@pytest.fixture(scope="module")
def gradient_table():
    t0 = time.perf_counter()
    table = V.gradient_convergence_experiment(V.AnalyticField.gaussian(), SIZES, TRIALS, C=0.6, seed=0)
    return table, time.perf_counter() - t0


def test_gradient_trend(criterion, gradient_table):
    table, elapsed = gradient_table
    raw = table.summary("geometric", "none")
    med = table.summary("geometric", "median")
    avg = table.summary("geometric", "average")
    decreasing = all(raw[a] > raw[b] for a, b in zip(SIZES, SIZES[1:]))
    filtered = all(med[n] < raw[n] and avg[n] < raw[n] for n in SIZES)
    ok = decreasing and filtered and elapsed < 300
    series = ", ".join(f"{n}: {raw[n]:.4f}/{avg[n]:.4f}/{med[n]:.4f}" for n in SIZES)
    criterion(5, ok, f"median e_r none/average/median {series}; {elapsed:.1f} s")
    assert ok


def test_gradient_exponent(criterion, gradient_table):
    slope = V.error_exponent_fit(gradient_table[0], "geometric", "none")
    ok = slope <= -0.15
    criterion(6, ok, f"log-log slope {slope:.3f}")
    assert ok


def test_curvature_trend(criterion):
    t0 = time.perf_counter()
    smooth = V.curvature_convergence_experiment(V.AnalyticField.conic(center=(-0.25, 0.5)), SIZES, TRIALS, seed=0)
    rough = V.curvature_convergence_experiment(V.AnalyticField.conic(center=(0.5, 0.5)), SIZES, TRIALS, seed=0)
    elapsed = time.perf_counter() - t0
    parts = []
    ok_a = ok_b = True
    for op in calc.CURVATURE_OPERATORS:
        s = smooth.summary(op, "median")
        r = rough.summary(op, "median")
        ok_a &= s[SIZES[-1]] < s[SIZES[0]]
        ok_b &= all(r[n] > s[n] for n in SIZES)
        parts.append(f"{op} smooth {s[SIZES[0]]:.3f}->{s[SIZES[-1]]:.3f}, non-smooth "
                     + "/".join(f"{r[n]:.3f}" for n in SIZES))
    ok = ok_a and ok_b and elapsed < 600
    criterion(7, ok, f"(a) {'ok' if ok_a else 'no'}, (b) {'ok' if ok_b else 'no'}; " + "; ".join(parts)
              + f"; {elapsed:.0f} s")
    assert ok


def test_delta_phi_moment(criterion):
    worst = 0.0
    for N in (5, 10, 20):
        d = V.sample_delta_phi(N, 20000, seed=N)
        m2 = np.mean(d ** 2)
        worst = max(worst, abs(m2 / (6 * np.pi ** 2 / (N * (N + 1))) - 1))
    ok = worst <= 0.10
    criterion(8, ok, f"max relative deviation {worst:.3%}")
    assert ok


def test_filter_laws(criterion):
    g = build_rgg(sample_uniform_points(1000, seed=0), rgg_radius(1000, 0.6))
    ones = np.ones(g.n)
    sigma = 0.05
    norm_dev = np.abs(flt.gaussian_normalized(g, ones, sigma) - 1).max()
    simple = flt.gaussian_simple(g, ones, sigma)
    simple_dev = np.abs(simple - 1).max()
    g0 = flt.stopping_function(0.0, 0.05)
    glam = flt.stopping_function(0.05, 0.05)
    ok = norm_dev <= 1e-12 and simple_dev > 0.01 and g0 == 1.0 and glam == 0.5
    criterion(9, ok, f"normalized dev {norm_dev:.1e}, simple dev {simple_dev:.2f}, g(0)={g0}, g(lam)={glam}")
    assert ok


def test_disk_segmentation(criterion):
    scene = disk_scene(5500, C=0.6, seed=0)
    seed = parse_region("circle 0.5 0.5 0.45")(scene.graph.points)
    t0 = time.perf_counter()
    labels, summary, _ = run(scene.graph, scene.intensity, seed, GacConfig())
    elapsed = time.perf_counter() - t0
    J = jaccard(labels, scene.truth)
    ok = J >= 0.85 and summary.iterations <= 2000 and elapsed < 300
    criterion(10, ok, f"Jaccard {J:.3f} after {summary.iterations} iterations "
                      f"(converged: {summary.converged}), {elapsed:.1f} s")
    assert ok


def test_topology_change(criterion):
    scene = two_disks_scene(5500, C=0.45, seed=0)
    seed = parse_region("rect 0.03 0.03 0.97 0.97")(scene.graph.points)
    cfg = GacConfig(sigma=0.005, lam=0.1, c=40.0)
    t0 = time.perf_counter()
    labels, summary, _ = run(scene.graph, scene.intensity, seed, cfg)
    elapsed = time.perf_counter() - t0
    ncomp, scores = component_scores(scene, labels)
    ok = ncomp == 2 and min(scores) >= 0.7 and elapsed < 300
    criterion(11, ok, f"{ncomp} components, Jaccard {[round(s, 3) for s in scores]} "
                      f"after {summary.iterations} iterations, {elapsed:.1f} s")
    assert ok


def brute_pairs(pts, r):
    n = len(pts)
    return [(i, j) for i in range(n) for j in range(i + 1, n) if np.hypot(*(pts[i] - pts[j])) <= r]


def brute_filter(g, u, how):
    out = np.empty(g.n)
    for v in range(g.n):
        vals = [u[v]] + [u[w] for w in g.neighbors(v)]
        out[v] = np.median(vals) if how == "median" else np.mean(vals)
    return out


def brute_gaussian(g, u, sigma):
    p = g.points
    simple = np.zeros(g.n)
    norm = np.zeros(g.n)
    for v in range(g.n):
        num = den = 0.0
        for w in range(g.n):
            k = np.exp(-np.sum((p[w] - p[v]) ** 2) / (2 * sigma ** 2)) / (2 * np.pi * sigma ** 2)
            num += k * u[w]
            den += k
        simple[v], norm[v] = num, num / den
    return simple, norm


def test_oracle_equivalence(criterion):
    checks = {}
    pts = sample_uniform_points(200, seed=12)
    r = rgg_radius(200, 0.6)
    checks["rgg"] = build_rgg(pts, r).edges().tolist() == [list(e) for e in brute_pairs(pts, r)]

    dp = sample_uniform_points(100, seed=13)
    tris = triangulate(dp)
    checks["delaunay"] = all(incircle(*dp[t], dp[k]) <= 0 for t in tris for k in range(100) if k not in t)

    g = build_rgg(pts, r)
    u = np.random.default_rng(14).normal(size=g.n)
    checks["median"] = np.array_equal(flt.filter_median(g, u), brute_filter(g, u, "median"))
    checks["average"] = np.allclose(flt.filter_average(g, u), brute_filter(g, u, "average"), rtol=1e-12, atol=1e-14)

    sigma = 0.05
    p = flt.GaussianParams(sigma, cutoff_mult=8.0)
    simple, norm = brute_gaussian(g, u, sigma)
    rel = lambda a, b: np.abs(a - b).max() / np.abs(b).max()
    e_simple = rel(flt.gaussian_simple(g, u, p), simple)
    e_norm = rel(flt.gaussian_normalized(g, u, p), norm)
    checks["gaussian"] = e_simple <= 1e-9 and e_norm <= 1e-9
    ok = all(checks.values())
    criterion(12, ok, ", ".join(f"{k}: {'ok' if v else 'mismatch'}" for k, v in checks.items())
              + f" (gaussian rel {max(e_simple, e_norm):.1e})")
    assert ok
