"""File formats: CSV panels, JSON documents and DOT graph export."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError
from .graph import ChainGraph, CoefficientPair
from .spectral import TimeSeriesPanel

__all__ = [
    "read_panel_csv",
    "write_panel_csv",
    "dumps_json",
    "write_json",
    "read_json",
    "graph_to_dot",
]


def read_panel_csv(path) -> TimeSeriesPanel:
    """Header row of series names, then one row per time point."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InvalidInputError(f"{path} is empty")
    names = [h.strip() for h in rows[0]]
    if not names or any(not n for n in names):
        raise InvalidInputError(f"{path}: header row must name every column")
    data = np.empty((len(rows) - 1, len(names)))
    for i, row in enumerate(rows[1:]):
        line = i + 2
        if len(row) != len(names):
            raise InvalidInputError(
                f"{path}: row {line} has {len(row)} fields, expected {len(names)}"
            )
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise InvalidInputError(
                    f"{path}: row {line}, column {j + 1} ({names[j]!r}): cannot parse {cell!r}"
                ) from None
    return TimeSeriesPanel(data, tuple(names))


def write_panel_csv(path, panel: TimeSeriesPanel) -> None:
    names = panel.names or tuple(f"x{k + 1}" for k in range(panel.p))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in panel.data:
            w.writerow([repr(float(v)) for v in row])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    """Canonical JSON text: sorted keys, non-finite floats as null."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def graph_to_dot(
    graph: ChainGraph,
    coeffs: Optional[CoefficientPair] = None,
    names: Optional[Sequence[str]] = None,
) -> str:
    """Graphviz text. Directed edges are solid when the larger-magnitude
    coefficient is positive and dashed when it is negative."""
    names = list(names) if names else [str(k + 1) for k in range(graph.p)]
    lines = ["digraph tscg {"]
    for g, comp in enumerate(graph.components):
        lines.append(f"  subgraph cluster_{g + 1} {{")
        lines.append(f'    label="component {g + 1}";')
        for v in comp:
            lines.append(f'    "{names[v]}";')
        lines.append("  }")
    for k, l in sorted(graph.undirected):
        lines.append(f'  "{names[k]}" -> "{names[l]}" [dir=none];')
    for (src, dst), tags in sorted(graph.directed.items()):
        style = "solid"
        if coeffs is not None:
            a, b = coeffs.A[dst, src], coeffs.B[dst, src]
            if (a if abs(a) >= abs(b) else b) < 0:
                style = "dashed"
        label = "+".join(sorted(tags))
        lines.append(f'  "{names[src]}" -> "{names[dst]}" [style={style}, label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
