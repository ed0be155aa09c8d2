"""Proximal and projection operators on stacks of Hermitian matrices.

All functions accept either a :class:`HermitianStack` or a raw complex array
of shape (M, p, p). Group indices are 0-based ``(k, l)`` pairs with k < l.
"""
from __future__ import annotations

from typing import Dict, Set, Tuple

import numpy as np

from .errors import InvalidInputError, NumericalError
from .spectral import HermitianStack, hermitize

GroupIndex = Tuple[int, int]

__all__ = [
    "GroupIndex",
    "group_norm_matrix",
    "group_norms",
    "group_soft_threshold",
    "unfold",
    "fold",
    "nuclear_norm",
    "svt_unfolding",
    "svt_mode1",
    "logdet_prox",
    "logdet_prox_stack",
    "eig_clip",
    "eig_clip_stack",
    "slice_ranks",
]


def _arr(stack) -> np.ndarray:
    a = np.asarray(stack, dtype=complex)
    if a.ndim == 2:
        a = a[None]
    return a


def group_norm_matrix(stack) -> np.ndarray:
    """p x p real matrix of cross-frequency l2 norms, sqrt(sum_j |S_kl(w_j)|^2)."""
    a = _arr(stack)
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=0))


def group_norms(stack) -> Dict[GroupIndex, float]:
    g = group_norm_matrix(stack)
    p = g.shape[0]
    return {(k, l): float(g[k, l]) for k in range(p) for l in range(k + 1, p)}


def _group_shrink(a: np.ndarray, threshold: float):
    g = group_norm_matrix(a)
    # only the off-diagonal groups carry the penalty
    np.fill_diagonal(g, np.inf)
    keep = g > threshold
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(keep, 1.0 - threshold / g, 0.0)
    np.fill_diagonal(scale, 1.0)
    out = a * scale[None]
    iu = np.triu_indices(a.shape[1], 1)
    support = {(int(k), int(l)) for k, l in zip(*iu) if keep[k, l]}
    return out, support


def group_soft_threshold(stack, threshold: float) -> Tuple[HermitianStack, Set[GroupIndex]]:
    """Block soft-thresholding of every off-diagonal (k, l) group across frequencies.

    Groups whose norm is <= threshold become exact zeros in all slices;
    the others are scaled by (1 - threshold/norm). Diagonals are untouched.
    """
    if threshold < 0:
        raise InvalidInputError(f"threshold must be >= 0, got {threshold}")
    out, support = _group_shrink(hermitize(_arr(stack)), float(threshold))
    return HermitianStack(out), support


def unfold(stack, mode: int) -> np.ndarray:
    """Mode-1 or mode-2 matricization to a p x (p*M) matrix.

    Mode-1 column j*p + l holds column l of slice j; mode-2 column j*p + k
    holds row k of slice j.
    """
    a = _arr(stack)
    M, p, _ = a.shape
    if mode == 1:
        return a.transpose(1, 0, 2).reshape(p, M * p)
    if mode == 2:
        return a.transpose(2, 0, 1).reshape(p, M * p)
    raise ValueError(f"mode must be 1 or 2, got {mode}")


def fold(mat: np.ndarray, mode: int, M: int) -> np.ndarray:
    p = mat.shape[0]
    if mode == 1:
        return mat.reshape(p, M, p).transpose(1, 0, 2)
    if mode == 2:
        return mat.reshape(p, M, p).transpose(1, 2, 0)
    raise ValueError(f"mode must be 1 or 2, got {mode}")


def nuclear_norm(mat: np.ndarray) -> float:
    return float(np.linalg.svd(mat, compute_uv=False).sum())


def svt_unfolding(stack, threshold: float) -> np.ndarray:
    """Singular-value soft thresholding of the mode-1 unfolding, refolded.

    The result is *not* Hermitian-symmetrized; see :func:`svt_mode1`.
    """
    if threshold < 0:
        raise InvalidInputError(f"threshold must be >= 0, got {threshold}")
    a = _arr(stack)
    M = a.shape[0]
    x = unfold(a, 1)
    try:
        u, s, vh = np.linalg.svd(x, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD of the {x.shape[0]}x{x.shape[1]} mode-1 unfolding failed ({exc})"
        ) from exc
    s = np.maximum(s - threshold, 0.0)
    r = int(np.count_nonzero(s))
    y = (u[:, :r] * s[:r]) @ vh[:r]
    return fold(y, 1, M)


def svt_mode1(stack, threshold: float) -> HermitianStack:
    return HermitianStack(svt_unfolding(stack, threshold))


def logdet_prox_stack(fhat, s, rho: float) -> np.ndarray:
    """Slice-wise argmin_{Theta > 0} -log det Theta + tr(Theta f) + rho/2 ||Theta - S||_F^2."""
    if rho <= 0:
        raise InvalidInputError(f"rho must be > 0, got {rho}")
    f = _arr(fhat)
    s = _arr(s)
    mu, v = np.linalg.eigh(hermitize(rho * s - f))
    theta_ev = (mu + np.sqrt(mu * mu + 4.0 * rho)) / (2.0 * rho)
    out = (v * theta_ev[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return hermitize(out)


def logdet_prox(fhat_slice, s_slice, rho: float) -> np.ndarray:
    return logdet_prox_stack(fhat_slice, s_slice, rho)[0]


def eig_clip_stack(stack, floor: float) -> np.ndarray:
    """Raise every slice's eigenvalues below ``floor`` to ``floor``."""
    if floor < 0:
        raise InvalidInputError(f"floor must be >= 0, got {floor}")
    a = hermitize(_arr(stack))
    ev, v = np.linalg.eigh(a)
    out = a.copy()
    low = ev.min(axis=1) < floor
    if np.any(low):
        evc = np.maximum(ev[low], floor)
        vl = v[low]
        out[low] = hermitize((vl * evc[:, None, :]) @ np.conj(np.swapaxes(vl, -1, -2)))
    return out


def eig_clip(slice_, floor: float) -> np.ndarray:
    return eig_clip_stack(slice_, floor)[0]


def slice_ranks(stack, rel_tol: float = 1e-6) -> list:
    """Per-slice numerical rank with tolerance rel_tol * sigma_max of that slice."""
    ranks = []
    for s in _arr(stack):
        sv = np.linalg.svd(s, compute_uv=False)
        if sv.size == 0 or sv[0] == 0:
            ranks.append(0)
        else:
            ranks.append(int(np.count_nonzero(sv > rel_tol * sv[0])))
    return ranks
