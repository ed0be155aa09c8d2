"""Command-line interface: simulate, fit, eval and bench.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
``TSCG_WORKERS`` sets the number of worker processes used by ``bench``
(an integer, or ``max`` for one per CPU); ``--workers`` overrides it.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .bench import METRIC_KEYS, WORKERS_ENV, bench, evaluate
from .config import EstimationConfig
from .errors import InvalidInputError, NumericalError, StageError, TSCGError
from .graph import ChainGraph, CoefficientPair, is_feasible
from .io import graph_to_dot, read_json, read_panel_csv, write_json, write_panel_csv
from .pipeline import fit
from .simgen import DESIGNS, DesignSpec, generate_graph, simulate_panel

log = logging.getLogger("tscg")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

FULL_GRID = [
    {"design": d, "p": p, "T": T}
    for d in ("two_layer", "random_order")
    for p in (30, 60)
    for T in (500, 1000)
]


def _load_config(path: Optional[str], standardize: bool) -> EstimationConfig:
    d = {} if path is None else read_json(path)
    if not isinstance(d, dict):
        raise InvalidInputError(f"{path}: configuration must be a JSON object")
    if standardize:
        d = {**d, "standardize": True}
    return EstimationConfig.from_dict(d)


def _graph_from_json(doc) -> ChainGraph:
    # accepts a bare graph, a fit report, or a ground-truth document
    if isinstance(doc, dict) and "graph" in doc:
        doc = doc["graph"]
    if not isinstance(doc, dict):
        raise InvalidInputError("expected a graph JSON object")
    return ChainGraph.from_dict(doc)


def cmd_simulate(args) -> int:
    spec = DesignSpec(
        design=args.design,
        p=7 if args.design == "fixture" else args.p,
        T=args.T,
        seed=args.seed,
        within_edge_prob=args.within_edge_prob,
        directed_edge_prob=args.directed_edge_prob,
        hub_prob=args.hub_prob,
        layer1_frac=args.layer1_frac,
        burn_in=args.burn_in,
        noise_scale=args.noise_scale,
    )
    truth = generate_graph(spec)
    panel = simulate_panel(truth, spec.T, spec.seed)
    write_panel_csv(args.panel, panel)
    write_json(args.truth, {"spec": spec.to_dict(), **truth.to_dict()})
    log.info("wrote %s (%d x %d) and %s", args.panel, panel.T, panel.p, args.truth)
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _load_config(args.config, args.standardize)
    panel = read_panel_csv(args.panel)
    report = fit(panel, cfg)
    write_json(args.report, report.to_dict(include_timings=args.timings))
    if args.graph:
        write_json(args.graph, report.estimated.to_dict())
    if args.dot:
        Path(args.dot).write_text(
            graph_to_dot(report.estimated, report.coeffs, report.names), encoding="utf-8"
        )
    log.info(
        "%d undirected, %d directed edges; ADMM %s after %d iterations",
        len(report.estimated.undirected),
        len(report.estimated.directed),
        "converged" if report.admm.converged else "did not converge",
        report.admm.iterations,
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    est_doc = read_json(args.estimate)
    truth_doc = read_json(args.truth)
    est = _graph_from_json(est_doc)
    truth = _graph_from_json(truth_doc)
    if est.p != truth.p:
        raise InvalidInputError(f"estimate has p={est.p}, truth has p={truth.p}")
    metrics = evaluate(est, truth)
    if isinstance(est_doc, dict) and "A" in est_doc and "B" in est_doc:
        rep = is_feasible(est, CoefficientPair(est_doc["A"], est_doc["B"]))
        metrics["feasible"] = rep.feasible
    write_json(args.out, metrics)
    return EXIT_OK


def _bench_rows(cells) -> List[dict]:
    rows = []
    for cell in cells:
        s = cell.summary()
        row = {"design": cell.design, "p": cell.p, "T": cell.T, "n_ok": s["n_ok"], "n_failed": s["n_failed"]}
        for key in METRIC_KEYS:
            row[f"{key}_mean"] = s[key]["mean"]
            row[f"{key}_se"] = s[key]["se"]
        rows.append(row)
    return rows


def cmd_bench(args) -> int:
    grid = {} if args.grid is None else read_json(args.grid)
    if not isinstance(grid, dict):
        raise InvalidInputError("bench grid must be a JSON object")
    cells = FULL_GRID if args.full_grid else grid.get("cells")
    if not cells:
        raise InvalidInputError("bench grid has no cells (give --grid or --full-grid)")
    reps = args.replications or grid.get("replications") or (100 if args.full_grid else 20)
    master = args.master_seed if args.master_seed is not None else grid.get("master_seed", 0)
    cfg_dict = dict(grid.get("config", {}))
    if args.config:
        cfg_dict.update(read_json(args.config))
    cfg = EstimationConfig.from_dict(cfg_dict)
    try:
        specs = [DesignSpec(**{"seed": 0, **c}) for c in cells]
    except TypeError as exc:
        raise InvalidInputError(f"bad bench cell: {exc}") from exc
    result = bench(specs, int(reps), cfg, master_seed=int(master), workers=args.workers)
    rows = _bench_rows(result)
    write_json(
        args.out,
        {
            "master_seed": int(master),
            "replications": int(reps),
            "config": cfg.to_dict(),
            "cells": [c.to_dict() for c in result],
        },
    )
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    for r in rows:
        log.info(
            "%s p=%d T=%d: MCC(Eu)=%.3f MCC(A)=%.3f MCC(B)=%.3f SHD=%.2f (%d failed)",
            r["design"], r["p"], r["T"], r["Eu_mcc_mean"], r["A_mcc_mean"],
            r["B_mcc_mean"], r["shd_mean"], r["n_failed"],
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tscg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="draw a ground truth and a panel")
    s.add_argument("--design", choices=DESIGNS, required=True)
    s.add_argument("--p", type=int, default=30)
    s.add_argument("--T", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--within-edge-prob", type=float, default=0.02)
    s.add_argument("--directed-edge-prob", type=float, default=0.8)
    s.add_argument("--hub-prob", type=float, default=0.1)
    s.add_argument("--layer1-frac", type=float, default=0.1)
    s.add_argument("--burn-in", type=int, default=200)
    s.add_argument("--noise-scale", choices=("unit", "literal"), default="unit")
    s.add_argument("--panel", required=True, help="output CSV")
    s.add_argument("--truth", required=True, help="output ground-truth JSON")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="estimate a chain graph from a CSV panel")
    f.add_argument("--panel", required=True, help="input CSV (header row, one row per time point)")
    f.add_argument("--config", help="EstimationConfig JSON (missing keys take defaults)")
    f.add_argument("--standardize", action="store_true", help="scale columns to unit variance")
    f.add_argument("--report", required=True, help="output report JSON")
    f.add_argument("--graph", help="output graph JSON")
    f.add_argument("--dot", help="output Graphviz file")
    f.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", help="compare an estimated graph with the truth")
    e.add_argument("--estimate", required=True, help="graph or report JSON")
    e.add_argument("--truth", required=True, help="graph or ground-truth JSON")
    e.add_argument("--out", required=True, help="output metrics JSON")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="Monte Carlo benchmark over design cells")
    b.add_argument("--grid", help="JSON with cells, replications, master_seed, config")
    b.add_argument("--full-grid", action="store_true", help="both designs, p in {30,60}, T in {500,1000}")
    b.add_argument("--replications", type=int)
    b.add_argument("--master-seed", type=int)
    b.add_argument("--config", help="EstimationConfig JSON overriding the grid's config")
    b.add_argument("--workers", type=int, help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    b.add_argument("--out", required=True, help="output JSON with per-replication results")
    b.add_argument("--csv", help="output summary table CSV")
    b.set_defaults(func=cmd_bench)
    return ap


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    return EXIT_NUMERIC if isinstance(exc, NumericalError) else EXIT_INPUT


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except TSCGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
