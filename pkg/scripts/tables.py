"""Simulation tables for the two benchmark designs (two_layer and random_order).

Desk scale by default: (p, T) = (30, 1000) with 20 replications. --full-grid
runs p in {30, 60}, T in {500, 1000} with 100 replications, which takes hours.

    python scripts/tables.py --table 2
    TSCG_WORKERS=max python scripts/tables.py --table both --full-grid --out tables.json
"""
from __future__ import annotations

import argparse
import itertools
import warnings

from tscg.bench import bench
from tscg.config import EstimationConfig
from tscg.io import read_json, write_json
from tscg.simgen import DesignSpec

DESIGN_OF_TABLE = {"2": "two_layer", "3": "random_order"}  # --table 2 is two_layer, 3 is random_order


def fmt(stat):
    return f"{stat['mean']:.3f} ({stat['se']:.3f})"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--table", choices=("2", "3", "both"), default="both")
    ap.add_argument("--full-grid", action="store_true")
    ap.add_argument("--replications", type=int)
    ap.add_argument("--master-seed", type=int, default=2026)
    ap.add_argument("--config", help="EstimationConfig JSON")
    ap.add_argument("--out", help="write per-replication results as JSON")
    args = ap.parse_args()
    warnings.simplefilter("ignore")

    tables = ("2", "3") if args.table == "both" else (args.table,)
    sizes = list(itertools.product((30, 60), (500, 1000))) if args.full_grid else [(30, 1000)]
    reps = args.replications or (100 if args.full_grid else 20)
    cfg = EstimationConfig.from_dict(read_json(args.config)) if args.config else EstimationConfig()

    cells = [DesignSpec(DESIGN_OF_TABLE[t], p, T) for t in tables for p, T in sizes]
    result = bench(cells, reps, cfg, master_seed=args.master_seed)
    for cell in result:
        s = cell.summary()
        print(f"\n{cell.design} p={cell.p} T={cell.T} ({s['n_ok']} ok, {s['n_failed']} failed)")
        print(f"{'':6}{'recall':>16}{'precision':>16}{'MCC':>16}")
        for name in ("Eu", "A", "B"):
            row = [fmt(s[f"{name}_{m}"]) for m in ("recall", "precision", "mcc")]
            print(f"{name:6}" + "".join(f"{v:>16}" for v in row))
        print(f"SHD   {fmt(s['shd'])}")
    if args.out:
        write_json(args.out, {"master_seed": args.master_seed, "replications": reps,
                              "config": cfg.to_dict(), "cells": [c.to_dict() for c in result]})


if __name__ == "__main__":
    main()
