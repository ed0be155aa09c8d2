"""Ground-truth chain graphs and simulated panels.

Two random designs (two-layer and random-order) plus a fixed 7-node toy
system. Noise inside each chain component is a VAR(1) with innovation
covariance (I - C)(I - C)^T; components are mutually independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from .errors import ConfigurationError, InvalidInputError
from .graph import ChainGraph, CoefficientPair, components_from_undirected, graph_from_coefficients
from .spectral import TimeSeriesPanel

__all__ = [
    "DESIGNS",
    "DesignSpec",
    "GroundTruth",
    "FIXTURE_NOISE_C",
    "FIXTURE_NOISE_SIGMA",
    "generate_graph",
    "simulate_noise",
    "simulate_panel",
    "noise_spectral_density",
    "noise_inverse_spectral_density",
    "x_spectral_density",
]

DESIGNS = ("two_layer", "random_order", "fixture")
NOISE_SCALES = ("unit", "literal")

# VAR(1) noise on the {1, 3, 5} component of the 7-node toy system
FIXTURE_NOISE_C = np.array([[0.6, 0.2, 0.0], [0.0, 0.6, 0.0], [0.0, 0.0, 0.6]])
FIXTURE_NOISE_SIGMA = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.0, 0.5, 1.0]])

_STATIONARITY_CAP = 0.95
_SUPPORT_FREQS = (0.37, 1.21, 2.53)


@dataclass(frozen=True)
class DesignSpec:
    design: str
    p: int
    T: int
    seed: int = 0
    within_edge_prob: float = 0.02
    directed_edge_prob: float = 0.8
    hub_prob: float = 0.1
    layer1_frac: float = 0.1
    burn_in: int = 200
    independent_ab: bool = False
    noise_scale: str = "unit"  # "unit": rescale each noise series to unit variance; "literal": no rescale

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ConfigurationError(f"unknown design {self.design!r}; choose from {DESIGNS}")
        if self.design == "fixture" and self.p != 7:
            raise ConfigurationError("the fixture design has p = 7")
        if self.p < 2:
            raise ConfigurationError(f"p must be >= 2, got {self.p}")
        if self.T < 2:
            raise ConfigurationError(f"T must be >= 2, got {self.T}")
        for name in ("within_edge_prob", "directed_edge_prob", "hub_prob", "layer1_frac"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")
        if self.noise_scale not in NOISE_SCALES:
            raise ConfigurationError(f"noise_scale must be one of {NOISE_SCALES}, got {self.noise_scale!r}")
        if self.burn_in < 0:
            raise ConfigurationError(f"burn_in must be >= 0, got {self.burn_in}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "DesignSpec":
        return cls(**d)


@dataclass(frozen=True)
class GroundTruth:
    graph: ChainGraph
    coeffs: CoefficientPair
    noise_var_coeffs: Tuple[np.ndarray, ...]
    noise_innovation_cov: Tuple[np.ndarray, ...]
    spectral_radius_x: float
    rescale_applied: bool = False
    rescale_factor: float = 1.0
    burn_in: int = 200
    noise_scale: Optional[Tuple[np.ndarray, ...]] = None  # per-component std divisors

    def __post_init__(self):
        if self.noise_scale is None:
            ones = tuple(np.ones(len(c)) for c in self.graph.components)
            object.__setattr__(self, "noise_scale", ones)

    @property
    def p(self) -> int:
        return self.graph.p

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "A": self.coeffs.A.tolist(),
            "B": self.coeffs.B.tolist(),
            "noise_var_coeffs": [c.tolist() for c in self.noise_var_coeffs],
            "noise_innovation_cov": [s.tolist() for s in self.noise_innovation_cov],
            "spectral_radius_x": self.spectral_radius_x,
            "rescale_applied": self.rescale_applied,
            "rescale_factor": self.rescale_factor,
            "burn_in": self.burn_in,
            "noise_scale": [s.tolist() for s in self.noise_scale],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        graph = ChainGraph.from_dict(d["graph"])
        return cls(
            graph=graph,
            coeffs=CoefficientPair(np.asarray(d["A"]), np.asarray(d["B"])),
            noise_var_coeffs=tuple(np.atleast_2d(np.asarray(c, dtype=float)) for c in d["noise_var_coeffs"]),
            noise_innovation_cov=tuple(np.atleast_2d(np.asarray(s, dtype=float)) for s in d["noise_innovation_cov"]),
            spectral_radius_x=float(d["spectral_radius_x"]),
            rescale_applied=bool(d.get("rescale_applied", False)),
            rescale_factor=float(d.get("rescale_factor", 1.0)),
            burn_in=int(d.get("burn_in", 200)),
            noise_scale=(
                None if d.get("noise_scale") is None
                else tuple(np.atleast_1d(np.asarray(v, dtype=float)) for v in d["noise_scale"])
            ),
        )


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def _signed_uniform(rng, size, lo, hi) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=size) * rng.uniform(lo, hi, size=size)


def _noise_var(rng, n: int) -> Tuple[np.ndarray, np.ndarray]:
    c_check = _signed_uniform(rng, (n, n), 0.5, 1.0)
    radius = np.max(np.abs(np.linalg.eigvals(c_check)))
    iota = rng.uniform(0.5, 1.0)
    C = iota * c_check / radius
    I = np.eye(n)
    return C, (I - C) @ (I - C).T


def _unit_scale(C: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Marginal standard deviations of the stationary VAR(1) e_t = C e_{t-1} + eps_t."""
    return np.sqrt(np.diag(solve_discrete_lyapunov(C, S)))


def _omega_support(comps, noise_c, noise_s) -> List[Tuple[int, int]]:
    """Undirected edges = nonzero off-diagonal pattern of Omega(w) = f_e(w)^{-1}.

    Omega_tau(w) is proportional to (I - C^T e^{iw}) Sigma^{-1} (I - C e^{-iw});
    a diagonal rescale of the noise leaves the pattern unchanged.
    """
    edges = []
    for comp, C, S in zip(comps, noise_c, noise_s):
        n = len(comp)
        if n < 2:
            continue
        Si = np.linalg.inv(S)
        pattern = np.zeros((n, n), dtype=bool)
        for w in _SUPPORT_FREQS:
            G = np.eye(n) - C * np.exp(-1j * w)
            om = G.conj().T @ Si @ G
            pattern |= np.abs(om) > 1e-10 * np.abs(om).max()
        for a in range(n):
            for b in range(a + 1, n):
                if pattern[a, b]:
                    edges.append((comp[a], comp[b]))
    return edges


def _finish(p, drawn, directed_edges, rng, spec) -> GroundTruth:
    A = np.zeros((p, p))
    B = np.zeros((p, p))
    for src, dst in directed_edges:
        if spec.independent_ab:
            in_a, in_b = rng.random() < 0.5, rng.random() < 0.5
        else:
            in_a = in_b = True
        if in_a:
            A[dst, src] = _signed_uniform(rng, (), 0.5, 1.5)
        if in_b:
            B[dst, src] = _signed_uniform(rng, (), 0.5, 1.5)
    coeffs = CoefficientPair(A, B)
    radius = coeffs.spectral_radius()
    rescaled, factor = False, 1.0
    if radius >= _STATIONARITY_CAP:
        factor = _STATIONARITY_CAP / radius
        coeffs = CoefficientPair(A, B * factor)
        radius = coeffs.spectral_radius()
        rescaled = True
    comps = components_from_undirected(p, drawn)
    pairs = [_noise_var(rng, len(c)) for c in comps]
    noise_c = tuple(c for c, _ in pairs)
    noise_s = tuple(s for _, s in pairs)
    if spec.noise_scale == "unit":
        scale = tuple(_unit_scale(c, s) for c, s in pairs)
    else:
        scale = tuple(np.ones(len(c)) for c in comps)
    # the drawn pairs only fix the components; the CIG inside each one is the
    # support of Omega, which is generically complete
    undirected = _omega_support(comps, noise_c, noise_s)
    graph = graph_from_coefficients(p, undirected, coeffs, ordering=tuple(range(len(comps))))
    return GroundTruth(
        graph=graph,
        coeffs=coeffs,
        noise_var_coeffs=noise_c,
        noise_innovation_cov=noise_s,
        spectral_radius_x=radius,
        rescale_applied=rescaled,
        rescale_factor=factor,
        burn_in=spec.burn_in,
        noise_scale=scale,
    )


def _bernoulli_pairs(rng, nodes, prob) -> List[Tuple[int, int]]:
    out = []
    for i, k in enumerate(nodes):
        for l in nodes[i + 1:]:
            if rng.random() < prob:
                out.append((k, l))
    return out


def _fixture(spec: DesignSpec) -> GroundTruth:
    # nodes 1..7 -> 0..6; components {1,3,5}, {2,4}, {6}, {7}
    undirected = [(0, 2), (2, 4), (1, 3)]
    A = np.zeros((7, 7))
    B = np.zeros((7, 7))
    A[5, 2] = 0.8   # 3 -> 6, contemporaneous
    B[1, 4] = 0.8   # 5 -> 2, lagged
    A[6, 3] = 0.8   # 4 -> 7, both
    B[6, 3] = -0.8
    coeffs = CoefficientPair(A, B)
    comps = components_from_undirected(7, undirected)
    graph = graph_from_coefficients(7, undirected, coeffs, ordering=tuple(range(len(comps))))
    C = (FIXTURE_NOISE_C, np.zeros((2, 2)), np.zeros((1, 1)), np.zeros((1, 1)))
    S = (FIXTURE_NOISE_SIGMA, np.array([[1.0, 0.5], [0.5, 1.0]]), np.eye(1), np.eye(1))
    return GroundTruth(graph, coeffs, C, S, coeffs.spectral_radius(), burn_in=spec.burn_in)


def generate_graph(spec: DesignSpec) -> GroundTruth:
    if spec.design == "fixture":
        return _fixture(spec)
    rng = _rng(spec.seed, 0)
    p = spec.p
    if spec.design == "two_layer":
        n1 = math.ceil(spec.layer1_frac * p)
        layer1, layer2 = list(range(n1)), list(range(n1, p))
        undirected = _bernoulli_pairs(rng, layer1, spec.within_edge_prob)
        undirected += _bernoulli_pairs(rng, layer2, spec.within_edge_prob)
        directed = [
            (l, k) for l in layer1 for k in layer2 if rng.random() < spec.directed_edge_prob
        ]
    else:
        undirected = _bernoulli_pairs(rng, list(range(p)), spec.within_edge_prob)
        comps = components_from_undirected(p, undirected)
        directed = []
        for g, comp in enumerate(comps):
            later = [k for c in comps[g + 1:] for k in c]
            for l in comp:
                if rng.random() < spec.hub_prob:
                    directed.extend((l, k) for k in later if rng.random() < spec.directed_edge_prob)
    return _finish(p, undirected, directed, rng, spec)


def _chol(S: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(S)
        return v * np.sqrt(np.clip(w, 0.0, None))


def simulate_noise(truth: GroundTruth, T: int, seed: int, burn_in: Optional[int] = None) -> np.ndarray:
    """T x p draw of the component-wise VAR(1) noise, burn-in discarded."""
    burn = truth.burn_in if burn_in is None else burn_in
    comps = truth.graph.components
    streams = np.random.SeedSequence(seed, spawn_key=(1,)).spawn(len(comps))
    e = np.zeros((T, truth.p))
    for comp, C, S, sc, ss in zip(
        comps, truth.noise_var_coeffs, truth.noise_innovation_cov, truth.noise_scale, streams
    ):
        rng = np.random.Generator(np.random.PCG64(ss))
        n = len(comp)
        eps = rng.standard_normal((T + burn, n)) @ _chol(S).T
        cur = np.zeros(n)
        out = np.empty((T + burn, n))
        for t in range(T + burn):
            cur = C @ cur + eps[t]
            out[t] = cur
        e[:, list(comp)] = out[burn:] / sc
    return e


def simulate_panel(truth: GroundTruth, T: int, seed: int) -> TimeSeriesPanel:
    """x_t = (I - A)^{-1} B x_{t-1} + (I - A)^{-1} e_t, burn-in discarded."""
    radius = truth.coeffs.spectral_radius()
    if radius >= 1:
        raise InvalidInputError(
            f"rho((I - A)^-1 B) = {radius:.4f} >= 1; the process is not stationary"
        )
    burn = truth.burn_in
    p = truth.p
    e = simulate_noise(truth, T + burn, seed)
    inv = np.linalg.inv(np.eye(p) - truth.coeffs.A)
    F = inv @ truth.coeffs.B
    u = e @ inv.T
    if not np.any(F):
        return TimeSeriesPanel(u[burn:])
    x = np.empty_like(u)
    prev = np.zeros(p)
    for t in range(T + burn):
        prev = F @ prev + u[t]
        x[t] = prev
    return TimeSeriesPanel(x[burn:])


def noise_spectral_density(truth: GroundTruth, freqs) -> np.ndarray:
    """f_e at each frequency, shape (len(freqs), p, p)."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    p = truth.p
    out = np.zeros((freqs.size, p, p), dtype=complex)
    for comp, C, S, sc in zip(
        truth.graph.components, truth.noise_var_coeffs, truth.noise_innovation_cov, truth.noise_scale
    ):
        n = len(comp)
        for j, w in enumerate(freqs):
            H = np.linalg.inv(np.eye(n) - C * np.exp(-1j * w))
            out[j][np.ix_(comp, comp)] = H @ S @ H.conj().T / np.outer(sc, sc) / (2 * np.pi)
    return out


def noise_inverse_spectral_density(truth: GroundTruth, freqs) -> np.ndarray:
    """Omega(w) = f_e(w)^{-1}."""
    return np.linalg.inv(noise_spectral_density(truth, freqs))


def x_spectral_density(truth: GroundTruth, freqs) -> np.ndarray:
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    fe = noise_spectral_density(truth, freqs)
    p = truth.p
    out = np.empty_like(fe)
    for j, w in enumerate(freqs):
        K = np.eye(p) - truth.coeffs.A - truth.coeffs.B * np.exp(-1j * w)
        Ki = np.linalg.inv(K)
        out[j] = Ki @ fe[j] @ Ki.conj().T
    return out
