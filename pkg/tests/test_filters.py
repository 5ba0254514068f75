import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphgac import filters as flt
from graphgac.errors import ConfigError
from graphgac.spatial_graph import SpatialGraph, random_rgg


def brute_closed(graph, v):
    return [v] + [w for w in range(graph.n) if w != v and w in set(graph.neighbors(v).tolist())]


def brute_median(graph, u):
    return np.array([np.median(u[brute_closed(graph, v)]) for v in range(graph.n)])


def brute_average(graph, u):
    return np.array([np.mean(u[brute_closed(graph, v)]) for v in range(graph.n)])


def double_loop(graph, u, sigma, kind):
    """Untruncated Gaussian sums over every vertex pair, written out longhand."""
    n = graph.n
    p = graph.points
    out = np.zeros(n) if kind != "derivative" else np.zeros((n, 2))
    for v in range(n):
        num = den = 0.0
        sides = [[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]]
        for w in range(n):
            dx, dy = p[w] - p[v]
            k = np.exp(-(dx * dx + dy * dy) / (2 * sigma ** 2)) / (2 * np.pi * sigma ** 2)
            num += k * u[w]
            den += k
            for c, off in enumerate((dx, dy)):
                wt = abs(off) * k / sigma ** 2
                s = sides[c]
                if off >= 0:
                    s[0] += wt * u[w]
                    s[1] += wt
                else:
                    s[2] += wt * u[w]
                    s[3] += wt
        if kind == "simple":
            out[v] = num
        elif kind == "normalized":
            out[v] = num / den
        else:
            for c in range(2):
                s = sides[c]
                out[v, c] = s[0] / s[1] - s[2] / s[3] if s[1] > 0 and s[3] > 0 else 0.0
    return out


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_neighborhood_filters_match_brute_force(seed):
    g = random_rgg(250, seed=seed)
    u = np.random.default_rng(seed).normal(size=g.n)
    assert np.allclose(flt.filter_median(g, u), brute_median(g, u), atol=0)
    assert np.allclose(flt.filter_average(g, u), brute_average(g, u), atol=1e-14)


@given(st.integers(0, 10 ** 6), st.sampled_from(["average", "median"]))
def test_filters_componentwise(seed, kind):
    g = random_rgg(60, seed=seed)
    F = np.random.default_rng(seed).normal(size=(g.n, 2))
    out = flt.filter_vector(g, F, kind)
    for c in range(2):
        assert np.array_equal(out[:, c], flt.FILTERS[kind](g, F[:, c]))


@given(st.integers(0, 10 ** 6), st.floats(-1e3, 1e3))
def test_filters_preserve_constants(seed, c):
    g = random_rgg(80, seed=seed)
    u = np.full(g.n, c)
    assert np.allclose(flt.filter_median(g, u), c, rtol=1e-15, atol=0)
    assert np.allclose(flt.filter_average(g, u), c, rtol=1e-14, atol=1e-12)


def test_median_even_neighborhood_averages_middle():
    g = SpatialGraph([(0, 0), (1, 0)], [(0, 1)])
    assert flt.filter_median(g, [1.0, 4.0]).tolist() == [2.5, 2.5]


def test_median_removes_spike():
    g = random_rgg(400, seed=1)
    u = np.zeros(g.n)
    u[10] = 100.0
    assert flt.filter_median(g, u)[10] == 0.0


def test_apply_filter_none_and_unknown():
    g = random_rgg(10, seed=0)
    u = np.arange(10.0)
    assert np.array_equal(flt.apply_filter(g, u, None), u)
    assert np.array_equal(flt.apply_filter(g, u, "none"), u)
    with pytest.raises(ValueError):
        flt.apply_filter(g, u, "mode")


def empty_half_plane(graph, cutoff):
    """(n, 2) mask: a half-plane of the component has no weighted vertex within ``cutoff``."""
    p = graph.points
    out = np.zeros((graph.n, 2), dtype=bool)
    for v in range(graph.n):
        d = p - p[v]
        near = np.hypot(d[:, 0], d[:, 1]) <= cutoff
        for c in range(2):
            out[v, c] = not (np.any(near & (d[:, c] < 0)) and np.any(near & (d[:, c] > 0)))
    return out


@pytest.mark.parametrize("sigma", [0.03, 0.08])
def test_truncated_gaussians_match_untruncated_loop(sigma):
    g = random_rgg(150, seed=7)
    u = np.sin(6 * g.points[:, 0]) + g.points[:, 1]
    p = flt.GaussianParams(sigma, cutoff_mult=8.0)
    for kind, fn in (("simple", flt.gaussian_simple), ("normalized", flt.gaussian_normalized)):
        ref = double_loop(g, u, sigma, kind)
        got = fn(g, u, p)
        assert np.abs(got - ref).max() <= 1e-9 * np.abs(ref).max(), kind
    # the derivative divides by each half-plane's own weight, so truncation only
    # stays negligible where that half-plane has a vertex well inside the cutoff;
    # where it has none within the cutoff the truncated result is 0 by construction
    ref = double_loop(g, u, sigma, "derivative")
    got = flt.gaussian_derivative_normalized(g, u, p)
    keep = ~empty_half_plane(g, p.cutoff / 2)
    assert np.abs(got - ref)[keep].max() <= 1e-9 * np.abs(ref).max()
    assert np.all(got[empty_half_plane(g, p.cutoff)] == 0)


@pytest.mark.parametrize("sigma", [0.03, 0.08])
def test_dense_path_matches_loop(sigma):
    g = random_rgg(120, seed=3)
    u = g.points[:, 0] ** 2 - g.points[:, 1]
    p = flt.GaussianParams(sigma)
    for kind, fn in (("simple", flt.gaussian_simple), ("normalized", flt.gaussian_normalized),
                     ("derivative", flt.gaussian_derivative_normalized)):
        ref = double_loop(g, u, sigma, kind)
        assert np.abs(fn(g, u, p, dense=True) - ref).max() <= 1e-12 * np.abs(ref).max(), kind


def test_normalized_preserves_constant():
    g = random_rgg(1000, seed=0)
    out = flt.gaussian_normalized(g, np.full(g.n, 0.7), 0.02)
    assert np.abs(out - 0.7).max() <= 1e-12


def test_simple_does_not_preserve_constant():
    g = random_rgg(1000, seed=0)
    out = flt.gaussian_simple(g, np.ones(g.n), 0.02)
    assert np.abs(out - 1.0).max() > 0.01


def test_derivative_unit_ramp():
    g = random_rgg(3000, seed=0)
    u = 2.0 * g.points[:, 0]
    d = flt.gaussian_derivative_normalized(g, u, flt.GaussianParams(0.03), as_derivative=True)
    inner = np.all((g.points > 0.15) & (g.points < 0.85), axis=1)
    assert np.median(d[inner, 0]) == pytest.approx(2.0, rel=0.05)
    assert abs(np.median(d[inner, 1])) < 0.05


def test_derivative_zero_when_half_plane_empty():
    g = SpatialGraph([(0, 0), (0.01, 0)], [(0, 1)])
    d = flt.gaussian_derivative_normalized(g, [0.0, 1.0], 0.05)
    # vertex 0 has a neighbor on the right (and itself counts as right) but none on the left
    assert d[0].tolist() == [0.0, 0.0]


def test_stopping_function_values():
    assert flt.stopping_function(0.0, 0.05) == 1.0
    assert flt.stopping_function(0.05, 0.05) == 0.5
    assert flt.stopping_function([0.1], 0.05)[0] == pytest.approx(0.2)
    with pytest.raises(ConfigError):
        flt.stopping_function(1.0, 0.0)


@given(st.floats(0, 1e6), st.floats(1e-3, 10))
def test_stopping_function_range(m, lam):
    g = flt.stopping_function(m, lam)
    assert 0 < g <= 1


def test_gaussian_params_validated():
    with pytest.raises(ConfigError):
        flt.GaussianParams(0.0)
    with pytest.raises(ConfigError):
        flt.GaussianParams(0.1, cutoff_mult=1.0)
