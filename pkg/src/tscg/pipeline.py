"""End-to-end three-stage chain graph learning."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from . import causal
from .admm import AdmmConfig, AdmmResult, solve
from .config import EstimationConfig, Tuning, resolve_tuning
from .errors import StageError, TSCGError
from .graph import ChainGraph, CoefficientPair, components_from_undirected
from .spectral import HermitianStack, TimeSeriesPanel, averaged_periodogram, dft, make_grid

__all__ = ["RunReport", "fit"]


@dataclass
class RunReport:
    estimated: ChainGraph
    coeffs: CoefficientPair
    tuning: Tuning
    config: EstimationConfig
    admm: AdmmResult
    ordering: causal.OrderingResult
    fhat: HermitianStack
    timings: dict = field(default_factory=dict)
    names: tuple = ()
    metrics: Optional[dict] = None

    def to_dict(self, include_timings: bool = True) -> dict:
        comps = self.ordering.components
        out = {
            "graph": self.estimated.to_dict(),
            "A": self.coeffs.A.tolist(),
            "B": self.coeffs.B.tolist(),
            "names": list(self.names),
            "tuning": self.tuning.to_dict(),
            "config": self.config.to_dict(),
            "admm": self.admm.summary(),
            "ordering_trace": [
                {str(g + 1): v for g, v in sorted(step.items())} for step in self.ordering.trace
            ],
            "ordering": [[v + 1 for v in comps[g]] for g in self.ordering.ordering],
        }
        if include_timings:
            out["timings"] = dict(self.timings)
        if self.metrics is not None:
            out["metrics"] = self.metrics
        return out


def _stage(label, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except TSCGError as exc:
        if isinstance(exc, StageError):
            raise
        raise StageError(label, exc) from exc


def fit(panel, cfg: Optional[EstimationConfig] = None) -> RunReport:
    cfg = cfg or EstimationConfig()
    timings = {}

    t0 = time.perf_counter()
    if not isinstance(panel, TimeSeriesPanel):
        panel = _stage("input", TimeSeriesPanel, panel)
    if cfg.standardize:
        panel = _stage("input", panel.standardized)
    elif cfg.center:
        panel = panel.centered()
    tuning = _stage("tuning", resolve_tuning, panel.T, panel.p, cfg)
    grid = _stage("spectral", make_grid, panel.T, tuning.m)
    fhat = _stage("spectral", averaged_periodogram, dft(panel), grid)
    timings["spectral"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    admm_cfg = _stage(
        "stage1",
        AdmmConfig,
        lambda1=tuning.lambda1,
        lambda2=tuning.lambda2,
        rho=cfg.rho,
        varrho=cfg.varrho,
        max_iter=cfg.max_iter,
        tol_primal=cfg.tol_primal,
        tol_dual=cfg.tol_dual,
        adaptive_rho=cfg.adaptive_rho,
    )
    res = _stage("stage1", solve, fhat, admm_cfg)
    undirected = frozenset(res.support)
    comps = components_from_undirected(panel.p, undirected)
    timings["stage1"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    order = _stage("stage2", causal.order_components, fhat, res.omega, comps, cfg.ordering_ridge)
    timings["stage2"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    s3cfg = causal.Stage3Config(kappa=tuning.kappa, nu=tuning.nu, ridge=cfg.stage3_ridge)
    s3 = _stage("stage3", causal.estimate_directed, panel, order, s3cfg)
    graph = ChainGraph(panel.p, undirected, s3.directed, comps, order.ordering)
    timings["stage3"] = time.perf_counter() - t0

    return RunReport(
        estimated=graph,
        coeffs=s3.coeffs,
        tuning=tuning,
        config=cfg,
        admm=res,
        ordering=order,
        fhat=fhat,
        timings=timings,
        names=panel.names,
    )
