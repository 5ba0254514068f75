"""Command-line front end: ``graphgac gen-graph | ingest-image | segment | validate``.

Every command writes its outputs plus a ``manifest.json`` into ``--out`` and
exits with status 0 only if it finished and all requested checks passed.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import gac
from . import io as gio
from . import raster
from . import validation as V
from .errors import DivergenceError, GacError
from .filters import GaussianParams, gaussian_normalized, gaussian_simple, stopping_function
from .spatial_graph import SpatialGraph, build_delaunay, build_rgg, rgg_radius, sample_uniform_points

log = logging.getLogger("graphgac")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def write_manifest(out: Path, command: str, config: dict, inputs: dict, outputs: list, seed, t0: float):
    gio.write_json(out / "manifest.json", {
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": sorted(outputs),
        "seed": seed,
        "version": tool_version(),
        "wall_time": time.perf_counter() - t0,
    })


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build(mode: str, points, C: float) -> SpatialGraph:
    if mode == "delaunay":
        return build_delaunay(points)
    return build_rgg(points, rgg_radius(len(points), C))


# ---------------------------------------------------------------- gen-graph

def cmd_gen_graph(args) -> int:
    t0 = time.perf_counter()
    if args.points and args.n is not None:
        raise GacError("--points and --n are mutually exclusive")
    if args.points:
        pts, vals = gio.read_points(args.points)
    else:
        if args.n is None:
            raise GacError("either --n or --points is required")
        pts, vals = sample_uniform_points(args.n, seed=args.seed), None
    graph = _build(args.mode, pts, args.C)
    out = _outdir(args.out)
    gio.save_graph(out, graph, vals)
    write_manifest(out, "gen-graph", {"mode": args.mode, "n": graph.n, "C": args.C},
                   {"points": args.points}, ["points.csv", "edges.csv"], args.seed, t0)
    print(f"{graph!r} -> {out}")
    return 0


# ---------------------------------------------------------------- ingest-image

def cmd_ingest_image(args) -> int:
    t0 = time.perf_counter()
    img = raster.load_pgm(args.image)
    if args.mode == "watershed":
        pts, vals = raster.watershed_vertices(img)
    else:
        if args.n is None:
            raise GacError("--mode random needs --n")
        pts, vals = raster.sample_image_random(img, args.n, seed=args.seed)
    graph = _build(args.graph, pts, args.C)
    out = _outdir(args.out)
    gio.save_graph(out, graph, vals)
    write_manifest(out, "ingest-image",
                   {"mode": args.mode, "graph": args.graph, "C": args.C, "n_vertices": graph.n,
                    "image_size": [img.width, img.height]},
                   {"image": str(args.image)}, ["points.csv", "edges.csv"], args.seed, t0)
    print(f"{args.mode}: {graph.n} vertices -> {out}")
    return 0


# ---------------------------------------------------------------- segment

OVERRIDES = {"dt": "dt", "c": "c", "sigma": "sigma", "lam": "lambda", "max_iters": "max_iters"}


def resolve_config(args) -> gac.GacConfig:
    d = gio.read_json(args.config) if args.config else {}
    for attr, key in OVERRIDES.items():
        v = getattr(args, attr)
        if v is not None:
            d[key] = v
    return gac.GacConfig.from_dict(d)


def cmd_segment(args) -> int:
    t0 = time.perf_counter()
    graph, point_vals = gio.load_graph(args.graph)
    I = gio.read_field(args.values, graph.n) if args.values else point_vals
    if I is None:
        raise GacError("no intensity values: pass --values or a points.csv with a value column")
    X = gio.resolve_region(args.seed_region, graph)
    cfg = resolve_config(args)
    out = _outdir(args.out)
    outputs = ["labels.csv", "summary.json"]

    def snapshot(state):
        if args.snapshot_every and state.iteration % args.snapshot_every == 0:
            name = f"u_{state.iteration:06d}.csv"
            gio.write_field(out / name, state.u)
            outputs.append(name)

    try:
        labels, summary, _ = gac.run(graph, I, X, cfg, callback=snapshot)
    except DivergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    gio.write_labels(out / "labels.csv", labels)
    gio.write_json(out / "summary.json", summary.to_dict())
    write_manifest(out, "segment", cfg.to_dict(),
                   {"graph": str(args.graph), "values": args.values, "seed_region": args.seed_region},
                   outputs, None, t0)
    print(f"{summary.iterations} iterations, {summary.interior_count} interior vertices"
          + ("" if summary.converged else " (not converged)"))
    if summary.warning:
        print(f"warning: {summary.warning}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- validate

def _strictly_decreasing(d: dict) -> bool:
    v = [d[k] for k in sorted(d)]
    return all(b < a for a, b in zip(v, v[1:]))


def gradient_checks(table: V.ErrorTable) -> dict:
    raw = table.summary("geometric", "none")
    checks = {"unfiltered_strictly_decreasing": _strictly_decreasing(raw)}
    for f in ("average", "median"):
        filt = table.summary("geometric", f)
        checks[f"{f}_below_unfiltered"] = all(filt[n] < raw[n] for n in raw)
    return checks


def curvature_checks(smooth: V.ErrorTable, rough: V.ErrorTable) -> dict:
    checks = {}
    for op in ("geometric", "gradient-based"):
        s = smooth.summary(op, "median")
        first, last = min(s), max(s)
        checks[f"smooth_{op}_median_last_below_first"] = s[last] < s[first]
    for op, f in smooth.methods():
        s = smooth.summary(op, f)
        r = rough.summary(op, f)
        checks[f"nonsmooth_above_smooth_{op}_{f}"] = all(r[n] > s[n] for n in s)
    for f in ("average", "median"):
        geo = np.median(list(smooth.summary("geometric", f).values()))
        grad = np.median(list(smooth.summary("gradient-based", f).values()))
        checks[f"geometric_not_worse_{f}"] = bool(geo <= grad)
    return checks


def filter_checks(n: int, seed: int, sigma: float = 0.05) -> dict:
    from .spatial_graph import random_rgg

    g = random_rgg(n, 0.6, seed=seed)
    ones = np.ones(g.n)
    p = GaussianParams(sigma)
    norm = gaussian_normalized(g, ones, p)
    simple = gaussian_simple(g, ones, p)
    interior = np.all((g.points > 4 * sigma) & (g.points < 1 - 4 * sigma), axis=1)
    mean_simple = simple[interior].mean()
    return {
        "normalized_preserves_constants": bool(np.max(np.abs(norm - 1.0)) <= 1e-12),
        "simple_deviates_over_1pct": bool(np.max(np.abs(simple[interior] / mean_simple - 1.0)) > 0.01),
        "stopping_at_zero_is_one": bool(stopping_function(0.0, 0.05) == 1.0),
        "stopping_at_lambda_is_half": bool(stopping_function(0.05, 0.05) == 0.5),
    }


def _svg(table: V.ErrorTable, path: Path, title: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for op, f in table.methods():
        s = table.summary(op, f)
        ax.loglog(list(s), list(s.values()), marker="o", label=f"{op}/{f}")
    ax.set_xlabel("n")
    ax.set_ylabel("median e_r")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_validate(args) -> int:
    t0 = time.perf_counter()
    out = _outdir(args.out)
    sizes = sorted(args.sizes)
    outputs = ["checks.json"]
    result = {}
    tables = {}
    if args.suite in ("gradient", "exponent"):
        tables["gradient"] = V.gradient_convergence_experiment(V.AnalyticField.gaussian(), sizes, args.trials,
                                                               args.C, args.seed)
        if args.suite == "gradient":
            result = gradient_checks(tables["gradient"])
        else:
            slope = V.error_exponent_fit(tables["gradient"])
            result = {"slope": slope, "slope_at_most_-0.15": slope <= -0.15}
    elif args.suite == "curvature":
        tables["curvature_smooth"] = V.curvature_convergence_experiment(
            V.AnalyticField.conic(center=(-0.25, 0.5)), sizes, args.trials, args.C, args.seed)
        tables["curvature_nonsmooth"] = V.curvature_convergence_experiment(
            V.AnalyticField.conic(center=(0.5, 0.5)), sizes, args.trials, args.C, args.seed)
        result = curvature_checks(tables["curvature_smooth"], tables["curvature_nonsmooth"])
    elif args.suite == "filters":
        result = filter_checks(sizes[0], args.seed)
    for name, t in tables.items():
        t.to_csv(out / f"{name}.csv")
        outputs.append(f"{name}.csv")
        if args.svg:
            _svg(t, out / f"{name}.svg", name)
            outputs.append(f"{name}.svg")
    passed = all(v for k, v in result.items() if isinstance(v, bool))
    gio.write_json(out / "checks.json", {"suite": args.suite, "passed": passed, "checks": result})
    write_manifest(out, "validate", {"suite": args.suite, "sizes": sizes, "trials": args.trials, "C": args.C},
                   {}, outputs, args.seed, t0)
    for k, v in result.items():
        print(f"{k}: {v}")
    print("PASS" if passed else "FAIL")
    return 0 if passed else 1


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphgac", description="Geodesic active contours on spatial graphs.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="random geometric graph or Delaunay triangulation")
    p.add_argument("--mode", choices=["rgg", "delaunay"], default="rgg")
    p.add_argument("--n", type=int, help="number of uniformly random points in the unit square")
    p.add_argument("--points", help="CSV with x,y[,value] columns instead of random points")
    p.add_argument("--C", type=float, default=0.6, help="RGG radius constant, radius = C n^(-1/3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("ingest-image", help="turn a PGM image into graph vertices with intensities")
    p.add_argument("--image", required=True, help="P2 or P5 PGM file")
    p.add_argument("--mode", choices=["watershed", "random"], default="watershed")
    p.add_argument("--n", type=int, help="number of random samples (random mode)")
    p.add_argument("--graph", choices=["rgg", "delaunay"], default="delaunay")
    p.add_argument("--C", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest_image)

    p = sub.add_parser("segment", help="run the active contour on a graph")
    p.add_argument("--graph", required=True, help="directory with points.csv and edges.csv")
    p.add_argument("--values", help="intensity CSV (vertex,value); default: value column of points.csv")
    p.add_argument("--seed-region", required=True,
                   help="'circle cx cy r', 'rect x0 y0 x1 y1', or a CSV of vertex indices")
    p.add_argument("--config", help="JSON file with GacConfig keys")
    p.add_argument("--dt", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--snapshot-every", type=int, default=0, help="write u every k iterations")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("validate", help="relative-error experiments on analytic fields")
    p.add_argument("--suite", choices=["gradient", "curvature", "filters", "exponent"], required=True)
    p.add_argument("--sizes", type=int, nargs="+", default=[1000, 2000, 4000, 8000])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--C", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svg", action="store_true", help="also write log-log plots (needs matplotlib)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (GacError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
