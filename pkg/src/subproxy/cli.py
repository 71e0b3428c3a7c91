"""Command-line front end.

Machine-readable results go to stdout as JSON; the resolved configuration
and all diagnostics go to stderr. Exit codes: 0 success, 1 oracle check
mismatch, 2 configuration or input error, 3 simulation blow-up, 4 CI
backend failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import FORMAT_VERSION, __version__
from .bench import ConfigError, ExperimentConfig, run_grid, score, score_files
from .discovery import DiscoveryError, discover
from .graph_core import GraphError, format_mag, format_summary, parse_summary, write_text
from .svar_sim import BlowUpError, SimulationError, TimeSeriesDataset, random_mechanism, random_summary_graph, simulate

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_BLOWUP, EXIT_BACKEND = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _diag(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _resolved(args, **extra) -> None:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg.update(extra)
    _diag("resolved config: " + json.dumps(cfg, sort_keys=True, default=str))


def _read_graph(path) -> "SummaryGraph":
    try:
        return parse_summary(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read graph {path}: {exc}") from exc


def _parse_k(text: str):
    if text == "unknown":
        return None
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("k must be an integer or 'unknown'") from None
    if k < 2:
        raise argparse.ArgumentTypeError(f"subsampling factor must satisfy k >= 2, got {k}")
    return k


def _k_at_least_2(text: str) -> int:
    k = _parse_k(text)
    if k is None:
        raise argparse.ArgumentTypeError("k must be known here")
    return k


def cmd_simulate(args) -> int:
    if args.graph:
        g = _read_graph(args.graph)
    else:
        d, p = args.random
        try:
            g = random_summary_graph(int(d), float(p), seed=[args.seed, 0])
        except ValueError as exc:
            raise UsageError(f"--random expects D P: {exc}") from exc
    T = args.T if args.T is not None else args.k + 1
    _resolved(args, T=T, seed=args.seed)
    mech = random_mechanism(g, seed=[args.seed, 1])
    ds = simulate(g, mech, args.n, T, args.k, burn_in=args.burn_in, seed=args.seed)
    files = ds.save(args.out, truth=g)
    _emit({"files": [str(f) for f in files], "n": ds.n, "frames": ds.m, "k": ds.k,
           "weight_scale": ds.meta["weight_scale"]})
    return EXIT_OK


def cmd_discover(args) -> int:
    if args.data:
        if not Path(args.data).is_dir():
            raise UsageError(f"data directory {args.data} not found")
        source = TimeSeriesDataset.load(args.data)
    else:
        source = _read_graph(args.oracle)
    _resolved(args, seed=args.seed)
    result = discover(source, k=args.k, alpha=args.alpha, seed=args.seed, max_cond=args.max_cond,
                      oracle_k=args.oracle_k)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_text(out / "graph.graph", format_summary(result.graph))
    write_text(out / "mag.graph", format_mag(result.mag, result.graph.names))
    write_text(out / "trace.jsonl", result.trace_jsonl())
    _emit({"files": [str(out / n) for n in ("graph.graph", "mag.graph", "trace.jsonl")],
           "edges": [[result.graph.names[a], result.graph.names[b]] for a, b in sorted(result.graph.edges)]})
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    if args.truth:
        graphs = [("truth", _read_graph(args.truth))]
    else:
        d, p = args.random
        graphs = [(f"seed{s}", random_summary_graph(int(d), float(p), seed=[s, 0])) for s in range(args.seeds)]
    _resolved(args, seed=None)
    failures = []
    for label, g in graphs:
        for k in args.k:
            est = discover(g, k=k).graph
            if est.edges != g.edges:
                failures.append({"graph": label, "k": k, "f1": score(est, g).f1})
    _emit({"checked": len(graphs) * len(args.k), "exact": not failures, "failures": failures})
    return EXIT_OK if not failures else EXIT_MISMATCH


def cmd_bench(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    _resolved(args, experiment=cfg.to_dict(), seed=list(cfg.seeds))
    res = run_grid(cfg, args.out, threads=args.threads)
    out = Path(args.out)
    _emit({"results": str(out / "results.csv"), "summary": str(out / "summary.csv"),
           "manifest": str(out / "manifest.json"), "plots": res["plots"],
           "errors": sum(1 for r in res["rows"] if r["error"])})
    return EXIT_OK


def cmd_score(args) -> int:
    _resolved(args, seed=None)
    try:
        sc = score_files(args.est, args.truth)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    _emit(asdict(sc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subproxy", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"subproxy {__version__} (graph format {FORMAT_VERSION})")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker cap (default: all cores)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a subsampled SVAR dataset")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="summary graph file")
    src.add_argument("--random", nargs=2, metavar=("D", "P"), help="random ER DAG with D vertices, edge prob P")
    s.add_argument("--k", type=_k_at_least_2, required=True)
    s.add_argument("--T", type=int, help="steps after burn-in (default k+1: two observed frames)")
    s.add_argument("--n", type=int, required=True, help="replicates")
    s.add_argument("--burn-in", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("discover", help="recover the summary graph")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="dataset directory written by 'simulate'")
    src.add_argument("--oracle", help="ground-truth graph for the d-separation oracle")
    d.add_argument("--k", type=_parse_k, required=True, help="subsampling factor or 'unknown'")
    d.add_argument("--oracle-k", type=_k_at_least_2, default=2,
                   help="true factor used by the oracle when --k unknown (default 2)")
    d.add_argument("--alpha", type=float, default=0.05)
    d.add_argument("--seed", type=int, default=None, help="seeded pick order for step (b); default ascending")
    d.add_argument("--max-cond", type=int, default=None)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_discover)

    o = sub.add_parser("oracle-check", help="check oracle discovery reproduces the truth")
    src = o.add_mutually_exclusive_group(required=True)
    src.add_argument("--truth", help="summary graph file")
    src.add_argument("--random", nargs=2, metavar=("D", "P"))
    o.add_argument("--seeds", type=int, default=100, help="number of random graphs")
    o.add_argument("--k", type=_k_at_least_2, nargs="+", default=[2, 3, 4, 5])
    o.set_defaults(func=cmd_oracle_check)

    b = sub.add_parser("bench", help="run an experiment grid")
    b.add_argument("--config", required=True, help="JSON experiment config")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("score", help="score an estimated graph against the truth")
    c.add_argument("--est", required=True)
    c.add_argument("--truth", required=True)
    c.set_defaults(func=cmd_score)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except BlowUpError as exc:
        _diag(f"error: {exc}")
        return EXIT_BLOWUP
    except DiscoveryError as exc:
        _diag(f"error: {exc}")
        _diag("offending query: " + json.dumps(exc.context, sort_keys=True))
        return EXIT_BACKEND
    except (UsageError, ConfigError, GraphError, SimulationError, ValueError) as exc:
        _diag(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
