import json
import warnings

import numpy as np
import pytest

from tscg.bench import replication_seed
from tscg.config import EstimationConfig
from tscg.errors import StageError
from tscg.graph import is_feasible, shd
from tscg.io import dumps_json
from tscg.pipeline import fit
from tscg.simgen import DesignSpec, generate_graph, simulate_panel


def small_panel(seed=0, p=8, T=400):
    truth = generate_graph(DesignSpec("random_order", p, T, seed=seed, within_edge_prob=0.1))
    return truth, simulate_panel(truth, T, seed)


def test_non_finite_panel_error_names_stage():
    x = np.random.default_rng(0).standard_normal((100, 3))
    x[10, 1] = np.nan
    with pytest.raises(StageError, match=r"\[input\].*row 10, column 1") as info:
        fit(x)
    assert info.value.stage == "input"


def test_short_panel_error_names_tuning_stage():
    with pytest.raises(StageError, match=r"\[tuning\]"):
        fit(np.random.default_rng(1).standard_normal((10, 3)))


def test_report_contents():
    truth, panel = small_panel()
    rep = fit(panel)
    d = rep.to_dict()
    assert set(d) >= {"graph", "A", "B", "tuning", "config", "admm", "ordering", "ordering_trace", "timings"}
    assert set(rep.timings) == {"spectral", "stage1", "stage2", "stage3"}
    assert "timings" not in rep.to_dict(include_timings=False)
    assert EstimationConfig.from_dict(d["config"]) == rep.config
    assert len(d["ordering_trace"]) == len(rep.estimated.components)
    assert sorted(v for comp in d["ordering"] for v in comp) == list(range(1, 9))
    assert is_feasible(rep.estimated, rep.coeffs)


def test_fit_is_deterministic():
    _, panel = small_panel(seed=2)
    a = dumps_json(fit(panel).to_dict(include_timings=False))
    b = dumps_json(fit(panel).to_dict(include_timings=False))
    assert a == b
    json.loads(a)


def test_fit_accepts_plain_arrays_and_names():
    _, panel = small_panel(seed=3)
    rep = fit(panel.data)
    assert rep.names == tuple(f"x{k + 1}" for k in range(8))
    assert rep.estimated == fit(panel).estimated


def test_white_noise_gives_empty_graph():
    empty = 0
    for r in range(10):
        x = np.random.default_rng(replication_seed(21, 0, r)).standard_normal((1000, 5))
        g = fit(x).estimated
        empty += not g.undirected and not g.directed
    assert empty >= 9


def test_fit_output_feasible_on_designs():
    warnings.simplefilter("ignore")
    for design, seed in (("two_layer", 1), ("random_order", 2)):
        truth = generate_graph(DesignSpec(design, 12, 400, seed=seed))
        rep = fit(simulate_panel(truth, 400, seed))
        assert is_feasible(rep.estimated, rep.coeffs)


@pytest.mark.xfail(
    reason="the toy system's directed edges make L nearly full rank, so Stage 1 "
    "cannot separate them from Omega; see the decisions ledger",
    strict=False,
)
def test_hub_toy_recovery():
    truth = generate_graph(DesignSpec("fixture", 7, 4000))
    ok = 0
    for r in range(20):
        est = fit(simulate_panel(truth, 4000, replication_seed(3, 0, r))).estimated
        ok += est.components == truth.graph.components and shd(est, truth.graph) <= 2
    assert ok >= 16
