"""Causal ordering of chain components and estimation of directed edges.

Stage 2 orders the estimated chain components top-down with a
conditional-variance discrepancy; Stage 3 regresses each component on the
contemporaneous and lagged values of everything ordered before it, then
hard-thresholds singular values and entries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, InvalidInputError, NumericalError
from .graph import CoefficientPair, Edge
from .spectral import TimeSeriesPanel

__all__ = [
    "Stage3Config",
    "OrderingResult",
    "Stage3Result",
    "discrepancy",
    "order_components",
    "svd_hard_threshold",
    "estimate_directed",
]


@dataclass(frozen=True)
class Stage3Config:
    kappa: float
    nu: float
    ridge: Optional[float] = None  # None: 1e-8 * tr(Gram)/dim

    def __post_init__(self):
        if self.kappa < 0 or self.nu < 0:
            raise ConfigurationError(f"thresholds must be >= 0, got kappa={self.kappa}, nu={self.nu}")
        if self.ridge is not None and self.ridge < 0:
            raise ConfigurationError(f"ridge must be >= 0, got {self.ridge}")


@dataclass(frozen=True)
class OrderingResult:
    components: Tuple[Tuple[int, ...], ...]
    ordering: Tuple[int, ...]
    trace: List[Dict[int, float]] = field(default_factory=list)

    def ordered_components(self) -> List[Tuple[int, ...]]:
        return [self.components[g] for g in self.ordering]


def _inv_diag(omega: np.ndarray) -> np.ndarray:
    """Real diagonals of the slice-wise inverses, shape (M, p)."""
    try:
        inv = np.linalg.inv(omega)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Omega slice is singular: {exc}") from exc
    return np.real(np.einsum("jkk->jk", inv))


def _discrepancy(f: np.ndarray, inv_diag: np.ndarray, comp, cond, ridge) -> float:
    comp = list(comp)
    cond = sorted(cond)
    fkk = np.real(f[:, comp, comp])  # (M, |comp|)
    if cond:
        fMM = f[:, cond][:, :, cond]
        if ridge is None:
            tr = np.real(np.trace(fMM, axis1=1, axis2=2)) / len(cond)
            reg = 1e-6 * tr[:, None, None] * np.eye(len(cond))
        else:
            reg = ridge * np.eye(len(cond))
        fMk = f[:, cond][:, :, comp]  # (M, |cond|, |comp|)
        try:
            sol = np.linalg.solve(fMM + reg, fMk)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                "singular spectral block for the conditioning set; use a positive ridge"
            ) from exc
        schur = np.real(np.einsum("jmk,jmk->jk", np.conj(fMk), sol))
        fkk = fkk - schur
    return float(np.max(np.abs(fkk - inv_diag[:, comp])))


def discrepancy(fhat, omega, component, conditioning=(), ridge=None) -> float:
    """max over k in component and all frequencies of
    |f_kk - f_kM (f_MM + ridge I)^{-1} f_Mk - (Omega^{-1})_kk|."""
    comp = set(component)
    cond = set(conditioning)
    if comp & cond:
        raise InvalidInputError(f"component and conditioning set overlap: {sorted(comp & cond)}")
    f = np.asarray(fhat, dtype=complex)
    om = np.asarray(omega, dtype=complex)
    return _discrepancy(f, _inv_diag(om), sorted(comp), cond, ridge)


def order_components(fhat, omega, components: Sequence[Sequence[int]], ridge=None) -> OrderingResult:
    """Greedy top-down ordering: repeatedly pick the remaining component that is
    best explained by the ones already chosen. Ties go to the smallest label."""
    f = np.asarray(fhat, dtype=complex)
    inv_diag = _inv_diag(np.asarray(omega, dtype=complex))
    comps = tuple(tuple(sorted(c)) for c in components)
    remaining = list(range(len(comps)))
    chosen: List[int] = []
    cond: set = set()
    trace = []
    while remaining:
        scores = {g: _discrepancy(f, inv_diag, comps[g], cond, ridge) for g in remaining}
        best = min(remaining, key=lambda g: (scores[g], g))
        trace.append(scores)
        chosen.append(best)
        remaining.remove(best)
        cond |= set(comps[best])
    return OrderingResult(comps, tuple(chosen), trace)


def svd_hard_threshold(mat: np.ndarray, kappa: float) -> np.ndarray:
    """Zero out singular values <= kappa. Returns the input unchanged if only
    zero singular values would be dropped."""
    u, d, vt = np.linalg.svd(mat)
    keep = d > kappa
    if np.all(keep | (d == 0)):
        return mat.copy()
    return (u[:, keep] * d[keep]) @ vt[keep]


@dataclass(frozen=True)
class Stage3Result:
    coeffs: CoefficientPair
    A_reg: np.ndarray
    B_reg: np.ndarray
    directed: Dict[Edge, frozenset]


def estimate_directed(panel, ordering: OrderingResult, cfg: Stage3Config) -> Stage3Result:
    x = panel.data if isinstance(panel, TimeSeriesPanel) else np.asarray(panel, dtype=float)
    T, p = x.shape
    A_reg = np.zeros((p, p))
    B_reg = np.zeros((p, p))
    rank = np.empty(p, dtype=int)  # position of each node's component in the ordering
    ordered = ordering.ordered_components()
    for pos, comp in enumerate(ordered):
        rank[list(comp)] = pos
    if sorted(int(v) for c in ordered for v in c) != list(range(p)):
        raise InvalidInputError("ordering components do not partition the panel's columns")

    before: List[int] = []
    for pos, comp in enumerate(ordered):
        if pos > 0:
            mset = sorted(before)
            y = x[1:, list(comp)]
            z = np.hstack([x[1:, mset], x[:-1, mset]])
            gram = z.T @ z
            dim = gram.shape[0]
            if T - 1 < dim and (cfg.ridge == 0):
                raise NumericalError(
                    f"{T - 1} observations for {dim} regressors; set a positive ridge"
                )
            if cfg.ridge is None:
                tr = np.trace(gram)
                # all-zero regressors: any positive ridge gives zero coefficients
                ridge = 1e-8 * tr / dim if tr > 0 else 1.0
            else:
                ridge = cfg.ridge
            try:
                coef = np.linalg.solve(gram + ridge * np.eye(dim), z.T @ y).T
            except np.linalg.LinAlgError as exc:
                raise NumericalError(
                    f"singular regression Gram matrix for component {comp}; use a positive ridge"
                ) from exc
            if not np.all(np.isfinite(coef)):
                raise NumericalError(f"non-finite regression coefficients for component {comp}")
            n = len(mset)
            A_reg[np.ix_(comp, mset)] = coef[:, :n]
            B_reg[np.ix_(comp, mset)] = coef[:, n:]
        before.extend(comp)

    mask = rank[:, None] > rank[None, :]
    out = []
    for reg in (A_reg, B_reg):
        svd = svd_hard_threshold(reg, cfg.kappa)
        out.append(np.where(mask & (np.abs(svd) > cfg.nu), svd, 0.0))
    A, B = out
    directed: Dict[Edge, set] = {}
    for tag, mat in (("A", A), ("B", B)):
        for k, l in zip(*np.nonzero(mat)):
            directed.setdefault((int(l), int(k)), set()).add(tag)
    return Stage3Result(
        coeffs=CoefficientPair(A, B),
        A_reg=A_reg,
        B_reg=B_reg,
        directed={e: frozenset(t) for e, t in directed.items()},
    )
