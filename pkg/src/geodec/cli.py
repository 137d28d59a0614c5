"""Command-line entry point: ``geodec {simulate,check,frechet,spectrum}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .consensus import FrechetSolverConfig, weighted_frechet_mean
from .manifolds.base import InvalidInput, NumericalError
from .network import graph_from_spec, metropolis_weights, ring_knn_graph, sigma2
from .optimizer import RunAborted

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


def _cmd_simulate(args) -> int:
    from .harness.io import load_config, read_points, write_states_csv, write_summary_json, write_trace_csv
    from .harness.simulate import RunConfig, preset_config, simulate_config

    if (args.config is None) == (args.preset is None):
        raise InvalidInput("give exactly one of CONFIG or --preset")
    raw = load_config(args.config) if args.config else preset_config(args.preset)
    scn = raw.setdefault("scenario", {}) or {}
    raw["scenario"] = scn
    if args.seed is not None:
        raw.pop("seed", None)
        scn["seed"] = args.seed
    if args.T0 is not None:
        scn["T0"] = args.T0
    if args.T is not None:
        scn["T"] = args.T
    for key in ("variant", "eta", "gamma"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    if args.no_timing:
        raw["record_runtime"] = False
    cfg = RunConfig.from_dict(raw)

    comparators = None
    if cfg.comparators:
        base = Path(args.config).parent if args.config else Path.cwd()
        _, comparators = read_points(base / cfg.comparators)

    traces = simulate_config(cfg, comparators=comparators, keep_states=args.states)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for variant, trace in traces.items():
        trace.config["source"] = args.config or f"preset:{args.preset}"
        write_trace_csv(trace, out / f"trace_{variant}.csv")
        write_summary_json(trace, out / f"summary_{variant}.json")
        if args.states:
            write_states_csv(
                cfg.scenario.make_manifold(), trace, trace.comparators, out / f"states_{variant}.csv"
            )
        s = trace.summary
        print(
            f"{variant:8s} T={len(trace.rows)} cum_regret={s['cum_regret']:.6g} "
            f"bound={s['bound_theorem']:.6g} P_T={s['P_T']:.6g} sigma2={s['sigma2']:.6g} "
            f"eta={s['eta']:.6g} runtime={s['runtime_total_ns'] / 1e9:.3f}s"
        )
    print(f"wrote {len(traces)} trace(s) to {out}")
    return EXIT_OK


def _cmd_check(args) -> int:
    from .harness.checks import run_all

    results = run_all(seed=args.seed, scale=args.scale)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _cmd_frechet(args) -> int:
    from .harness.io import read_points, read_weights

    M, points = read_points(args.points)
    k = points.shape[0]
    weights = read_weights(args.weights, k) if args.weights else np.full(k, 1.0 / k)
    cfg = FrechetSolverConfig(max_iters=args.max_iters, tol=args.tol)
    res = weighted_frechet_mean(M, points, weights, cfg, init=M.centroid_guess(points, weights))
    variance = float(np.dot(weights, M.dist(res.point, points) ** 2))
    print(f"manifold: {M!r}")
    print("mean:", " ".join("%.17g" % v for v in M.flatten(res.point)))
    print("variance: %.17g" % variance)
    print(f"grad_norm: {res.grad_norm:.3e} converged: {res.converged} iterations: {res.iterations}")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    from .harness.io import load_config

    if (args.graph is None) == (args.ring is None):
        raise InvalidInput("give exactly one of GRAPHFILE or --ring N K")
    if args.ring is not None:
        g = ring_knn_graph(*args.ring)
    else:
        raw = load_config(args.graph)
        g = graph_from_spec(raw.get("graph", raw))
    W = metropolis_weights(g)
    with np.printoptions(precision=6, suppress=True, linewidth=200, threshold=sys.maxsize):
        print(W)
    print(f"n: {g.n}  edges: {len(g.edges)}")
    print(f"sigma2: {sigma2(W):.17g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geodec", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario and write traces")
    s.add_argument("config", nargs="?", help="YAML or JSON run config")
    s.add_argument("--preset", choices=["static", "abrupt", "general", "spd"])
    s.add_argument("--variant", choices=["exact", "onestep", "both"])
    s.add_argument("--eta", type=_eta_arg, help="stepsize, or 'balanced' for the regret-balancing value")
    s.add_argument("--gamma", type=_auto_float, help="one-step consensus stepsize or 'auto'")
    s.add_argument("--seed", type=int)
    s.add_argument("--T", type=int, help="override the horizon")
    s.add_argument("--T0", type=int, help="override the block length")
    s.add_argument("--out", default="out", help="output directory (default: ./out)")
    s.add_argument("--no-timing", action="store_true", help="write runtime_ns = 0 for bitwise reproducible traces")
    s.add_argument("--states", action="store_true", help="also write per-round agent states")
    s.set_defaults(func=_cmd_simulate)

    c = sub.add_parser("check", help="run the randomised inequality suites")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--scale", type=float, default=1.0, help="multiply the case counts (e.g. 0.1 for a quick pass)")
    c.set_defaults(func=_cmd_check)

    f = sub.add_parser("frechet", help="weighted Fréchet mean and variance of a points file")
    f.add_argument("points")
    f.add_argument("--weights", help="file with one weight per point")
    f.add_argument("--max-iters", type=int, default=1000)
    f.add_argument("--tol", type=float, default=1e-10)
    f.set_defaults(func=_cmd_frechet)

    g = sub.add_parser("spectrum", help="Metropolis weights and sigma2 of a graph")
    g.add_argument("graph", nargs="?", help="YAML or JSON graph spec")
    g.add_argument("--ring", nargs=2, type=int, metavar=("N", "K"), help="ring graph with K nearest neighbours")
    g.set_defaults(func=_cmd_spectrum)
    return p


def _auto_float(text: str):
    return text if text == "auto" else float(text)


def _eta_arg(text: str):
    return text if text == "balanced" else float(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InvalidInput, NumericalError, RunAborted, OSError) as exc:
        print(f"geodec {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
