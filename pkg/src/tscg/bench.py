"""Monte Carlo benchmark over simulated designs.

Replications run in worker processes when ``TSCG_WORKERS`` (or the
``workers`` argument) is above 1. Every replication draws its seed from the
master seed and its (cell, replication) index only, and results are collected
in submission order, so the output does not depend on the worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .config import EstimationConfig
from .errors import ConfigurationError, TSCGError
from .graph import ChainGraph, edge_metrics, shd
from .pipeline import fit
from .simgen import DesignSpec, generate_graph, simulate_panel

__all__ = [
    "WORKERS_ENV",
    "METRIC_KEYS",
    "evaluate",
    "replication_seed",
    "resolve_workers",
    "run_replication",
    "bench",
    "BenchCell",
    "summarize",
]

WORKERS_ENV = "TSCG_WORKERS"

METRIC_KEYS = (
    "Eu_recall", "Eu_precision", "Eu_mcc",
    "A_recall", "A_precision", "A_mcc",
    "B_recall", "B_precision", "B_mcc",
    "shd",
)


def evaluate(estimated: ChainGraph, truth: ChainGraph) -> dict:
    """Edge-recovery metrics of an estimate against the true chain graph."""
    p = truth.p
    out = {}
    for name, est, tru, n in (
        ("Eu", estimated.undirected, truth.undirected, p * (p - 1) // 2),
        ("A", estimated.directed_edges("A"), truth.directed_edges("A"), p * (p - 1)),
        ("B", estimated.directed_edges("B"), truth.directed_edges("B"), p * (p - 1)),
    ):
        m = edge_metrics(est, tru, n)
        out[f"{name}_recall"] = m.recall
        out[f"{name}_precision"] = m.precision
        out[f"{name}_mcc"] = m.mcc
    out["shd"] = shd(estimated, truth)
    return out


def replication_seed(master_seed: int, cell: int, rep: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(cell, rep))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "1").strip().lower()
        if raw in ("max", "0", ""):
            return os.cpu_count() or 1
        try:
            workers = int(raw)
        except ValueError as exc:
            raise ConfigurationError(f"{WORKERS_ENV} must be an integer or 'max', got {raw!r}") from exc
    if workers < 1:
        raise ConfigurationError(f"worker count must be >= 1, got {workers}")
    return workers


def run_replication(spec: DesignSpec, cfg: EstimationConfig) -> dict:
    """One simulate-fit-evaluate cycle; failures are reported, not raised."""
    try:
        truth = generate_graph(spec)
        panel = simulate_panel(truth, spec.T, spec.seed)
        report = fit(panel, cfg)
        metrics = evaluate(report.estimated, truth.graph)
        return {
            "seed": spec.seed,
            "status": "ok",
            "metrics": metrics,
            "admm_converged": bool(report.admm.converged),
            "rescale_applied": bool(truth.rescale_applied),
        }
    except (TSCGError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return {"seed": spec.seed, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def _job(args):
    spec_dict, cfg_dict = args
    return run_replication(DesignSpec.from_dict(spec_dict), EstimationConfig.from_dict(cfg_dict))


@dataclass(frozen=True)
class BenchCell:
    design: str
    p: int
    T: int
    replications: List[dict]

    def summary(self) -> dict:
        return summarize(self.replications)

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "p": self.p,
            "T": self.T,
            "summary": self.summary(),
            "replications": self.replications,
        }


def summarize(reps: Sequence[dict]) -> dict:
    """Mean and standard error of each metric over successful replications."""
    ok = [r["metrics"] for r in reps if r["status"] == "ok"]
    out = {"n_ok": len(ok), "n_failed": len(reps) - len(ok)}
    for key in METRIC_KEYS:
        vals = np.array([m[key] for m in ok], dtype=float)
        if vals.size == 0:
            mean = se = float("nan")
        else:
            mean = float(vals.mean())
            se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        out[key] = {"mean": mean, "se": se}
    return out


def bench(
    cells: Sequence[DesignSpec],
    replications: int,
    cfg: Optional[EstimationConfig] = None,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> List[BenchCell]:
    """Run ``replications`` simulate-fit-evaluate cycles for each design cell.

    The seed stored on each cell's DesignSpec is ignored; replication seeds are
    derived from ``master_seed``.
    """
    if replications < 1:
        raise ConfigurationError(f"replications must be >= 1, got {replications}")
    cfg = cfg or EstimationConfig()
    n_workers = resolve_workers(workers)
    cfg_dict = cfg.to_dict()
    jobs = []
    for c, spec in enumerate(cells):
        for r in range(replications):
            s = replace(spec, seed=replication_seed(master_seed, c, r))
            jobs.append((s.to_dict(), cfg_dict))
    if n_workers == 1 or len(jobs) == 1:
        results = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(n_workers, len(jobs))) as pool:
            results = list(pool.map(_job, jobs))
    out = []
    for c, spec in enumerate(cells):
        chunk = results[c * replications:(c + 1) * replications]
        out.append(BenchCell(spec.design, spec.p, spec.T, chunk))
    return out
