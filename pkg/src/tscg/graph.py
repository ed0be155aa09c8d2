"""Chain graph data model, feasibility checks and edge-recovery metrics.

Nodes are 0-based in memory. A directed edge is stored as ``(src, dst)``,
i.e. ``(l, k)`` for l -> k, which corresponds to A[k, l] != 0 or B[k, l] != 0.
Undirected edges are stored as ``(k, l)`` with k < l.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError

Edge = Tuple[int, int]

__all__ = [
    "ChainGraph",
    "CoefficientPair",
    "EdgeMetrics",
    "FeasibilityReport",
    "components_from_undirected",
    "is_feasible",
    "edge_metrics",
    "shd",
    "support_of",
    "graph_from_coefficients",
]


def _norm_pair(k: int, l: int) -> Edge:
    return (k, l) if k < l else (l, k)


def components_from_undirected(p: int, undirected: Iterable[Edge]) -> Tuple[Tuple[int, ...], ...]:
    """Connected components, each sorted, ordered by smallest member."""
    parent = list(range(p))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for k, l in undirected:
        if not (0 <= k < p and 0 <= l < p):
            raise InvalidInputError(f"edge ({k}, {l}) out of range for p={p}")
        rk, rl = find(k), find(l)
        if rk != rl:
            parent[max(rk, rl)] = min(rk, rl)
    groups: Dict[int, List[int]] = {}
    for v in range(p):
        groups.setdefault(find(v), []).append(v)
    return tuple(sorted((tuple(g) for g in groups.values()), key=lambda g: g[0]))


@dataclass(frozen=True)
class CoefficientPair:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise InvalidInputError(f"A and B must be equal square matrices, got {A.shape}, {B.shape}")
        if np.any(np.diag(A) != 0):
            raise InvalidInputError("A must have a zero diagonal")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @classmethod
    def zeros(cls, p: int) -> "CoefficientPair":
        return cls(np.zeros((p, p)), np.zeros((p, p)))

    def spectral_radius(self) -> float:
        """rho((I - A)^{-1} B), the stationarity-relevant radius of the reduced form."""
        p = self.p
        F = np.linalg.solve(np.eye(p) - self.A, self.B)
        return float(np.max(np.abs(np.linalg.eigvals(F)))) if p else 0.0


def support_of(mat: np.ndarray) -> FrozenSet[Edge]:
    """Off-diagonal nonzeros of a coefficient matrix as (src, dst) edges."""
    k, l = np.nonzero(mat)
    return frozenset((int(b), int(a)) for a, b in zip(k, l) if a != b)


@dataclass(frozen=True)
class ChainGraph:
    p: int
    undirected: FrozenSet[Edge] = frozenset()
    directed: Mapping[Edge, FrozenSet[str]] = field(default_factory=dict)
    components: Optional[Tuple[Tuple[int, ...], ...]] = None
    ordering: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        p = int(self.p)
        und = frozenset(_norm_pair(int(k), int(l)) for k, l in self.undirected)
        for k, l in und:
            if k == l or not (0 <= k < p and 0 <= l < p):
                raise InvalidInputError(f"invalid undirected edge ({k}, {l}) for p={p}")
        directed = {}
        for (src, dst), tags in dict(self.directed).items():
            src, dst = int(src), int(dst)
            if src == dst or not (0 <= src < p and 0 <= dst < p):
                raise InvalidInputError(f"invalid directed edge ({src} -> {dst}) for p={p}")
            directed[(src, dst)] = frozenset(tags)
        pairs = [_norm_pair(*e) for e in directed]
        if len(set(pairs)) != len(pairs):
            raise InvalidInputError("a node pair carries directed edges in both directions")
        both = und & set(pairs)
        if both:
            raise InvalidInputError(f"pairs {sorted(both)} are both undirected and directed")
        comps = components_from_undirected(p, und)
        if self.components is not None:
            given = tuple(sorted((tuple(sorted(c)) for c in self.components), key=lambda c: c[0]))
            if given != comps:
                raise InvalidInputError("components do not match the undirected edge set")
        ordering = None
        if self.ordering is not None:
            ordering = tuple(int(g) for g in self.ordering)
            if sorted(ordering) != list(range(len(comps))):
                raise InvalidInputError(f"ordering {ordering} is not a permutation of {len(comps)} components")
            pos = {g: i for i, g in enumerate(ordering)}
            label = self._labels(p, comps)
            for src, dst in directed:
                if not pos[label[src]] < pos[label[dst]]:
                    raise InvalidInputError(
                        f"directed edge {src} -> {dst} violates the component ordering"
                    )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "undirected", und)
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "ordering", ordering)

    @staticmethod
    def _labels(p, comps):
        label = [0] * p
        for g, c in enumerate(comps):
            for v in c:
                label[v] = g
        return label

    @property
    def component_of(self) -> List[int]:
        return self._labels(self.p, self.components)

    def directed_edges(self, kind: Optional[str] = None) -> FrozenSet[Edge]:
        if kind is None:
            return frozenset(self.directed)
        return frozenset(e for e, t in self.directed.items() if kind in t)

    def to_dict(self) -> dict:
        """JSON-ready dict with 1-based node labels."""
        return {
            "p": self.p,
            "undirected": [[k + 1, l + 1] for k, l in sorted(self.undirected)],
            "directed": [
                {"from": s + 1, "to": d + 1, "in_A": "A" in t, "in_B": "B" in t}
                for (s, d), t in sorted(self.directed.items())
            ],
            "components": [[v + 1 for v in c] for c in self.components],
            "ordering": None if self.ordering is None else [g + 1 for g in self.ordering],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ChainGraph":
        try:
            p = int(d["p"])
            und = [(int(a) - 1, int(b) - 1) for a, b in d.get("undirected", [])]
            dirs = {}
            for e in d.get("directed", []):
                tags = set()
                if e.get("in_A", True):
                    tags.add("A")
                if e.get("in_B", False):
                    tags.add("B")
                dirs[(int(e["from"]) - 1, int(e["to"]) - 1)] = frozenset(tags)
            comps = d.get("components")
            if comps is not None:
                comps = [tuple(int(v) - 1 for v in c) for c in comps]
            ordering = d.get("ordering")
            if ordering is not None:
                ordering = [int(g) - 1 for g in ordering]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed graph JSON: {exc}") from exc
        return cls(p, und, dirs, comps, ordering)


def graph_from_coefficients(
    p: int,
    undirected: Iterable[Edge],
    coeffs: CoefficientPair,
    ordering: Optional[Sequence[int]] = None,
) -> ChainGraph:
    directed: Dict[Edge, set] = {}
    for tag, mat in (("A", coeffs.A), ("B", coeffs.B)):
        for e in support_of(mat):
            directed.setdefault(e, set()).add(tag)
    return ChainGraph(p, frozenset(undirected), {e: frozenset(t) for e, t in directed.items()},
                      ordering=ordering)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: Tuple[str, ...] = ()

    def __bool__(self):
        return self.feasible


def is_feasible(graph: ChainGraph, coeffs: CoefficientPair) -> FeasibilityReport:
    """Check that A and B are block lower triangular with zero diagonal blocks
    under some ordering of the graph's chain components."""
    if coeffs.p != graph.p:
        raise InvalidInputError(f"graph has p={graph.p}, coefficients have p={coeffs.p}")
    label = graph.component_of
    G = len(graph.components)
    violations = []
    arcs = set()
    for name, mat in (("A", coeffs.A), ("B", coeffs.B)):
        for k, l in zip(*np.nonzero(mat)):
            k, l = int(k), int(l)
            if label[k] == label[l]:
                violations.append(f"{name}[{k + 1},{l + 1}] lies inside component {label[k] + 1}")
            else:
                arcs.add((label[l], label[k]))
    supp = set(support_of(coeffs.A)) | set(support_of(coeffs.B))
    if supp != set(graph.directed):
        extra = sorted(set(graph.directed) - supp)
        missing = sorted(supp - set(graph.directed))
        if extra:
            violations.append(f"graph edges without coefficients: {[(s + 1, d + 1) for s, d in extra]}")
        if missing:
            violations.append(f"coefficients without graph edges: {[(s + 1, d + 1) for s, d in missing]}")
    if graph.ordering is not None:
        pos = {g: i for i, g in enumerate(graph.ordering)}
        for a, b in sorted(arcs):
            if not pos[a] < pos[b]:
                violations.append(f"component {a + 1} -> {b + 1} violates the ordering")
    else:
        # Kahn's algorithm; leftover components sit on a cycle
        indeg = [0] * G
        succ: Dict[int, List[int]] = {}
        for a, b in arcs:
            indeg[b] += 1
            succ.setdefault(a, []).append(b)
        queue = [g for g in range(G) if indeg[g] == 0]
        seen = 0
        while queue:
            g = queue.pop()
            seen += 1
            for h in succ.get(g, []):
                indeg[h] -= 1
                if indeg[h] == 0:
                    queue.append(h)
        if seen < G:
            violations.append("directed edges form a cycle across chain components")
    return FeasibilityReport(not violations, tuple(violations))


@dataclass(frozen=True)
class EdgeMetrics:
    recall: float
    precision: float
    mcc: float
    tp: int
    fp: int
    fn: int
    tn: int

    def as_dict(self) -> dict:
        return {
            "recall": self.recall, "precision": self.precision, "mcc": self.mcc,
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
        }


def edge_metrics(estimated, truth, universe) -> EdgeMetrics:
    """Recall / precision / MCC over a finite universe of candidate edges.

    ``universe`` is either the collection of candidate edges or just its size.
    Rates with an empty denominator are reported as 0.
    """
    est, tru = set(estimated), set(truth)
    if isinstance(universe, int):
        n = universe
        if len(est | tru) > n:
            raise InvalidInputError("edge sets are larger than the universe")
    else:
        uni = set(universe)
        n = len(uni)
        if not est <= uni:
            raise InvalidInputError(f"estimated edges outside the universe: {sorted(est - uni)[:5]}")
        if not tru <= uni:
            raise InvalidInputError(f"true edges outside the universe: {sorted(tru - uni)[:5]}")
    tp = len(est & tru)
    fp = len(est - tru)
    fn = len(tru - est)
    tn = n - tp - fp - fn
    recall = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(denom) if denom else 0.0
    return EdgeMetrics(recall, precision, mcc, tp, fp, fn, tn)


def _pair_kinds(g: ChainGraph) -> Dict[Edge, tuple]:
    kinds = {e: ("u",) for e in g.undirected}
    for src, dst in g.directed:
        kinds[_norm_pair(src, dst)] = ("d", src)
    return kinds


def shd(estimated: ChainGraph, truth: ChainGraph) -> int:
    """Structural Hamming distance: one unit per pair that is missing, extra,
    or of mismatched kind/orientation."""
    if estimated.p != truth.p:
        raise InvalidInputError(f"graphs differ in size: {estimated.p} vs {truth.p}")
    a, b = _pair_kinds(estimated), _pair_kinds(truth)
    return sum(1 for pair in set(a) | set(b) if a.get(pair) != b.get(pair))
