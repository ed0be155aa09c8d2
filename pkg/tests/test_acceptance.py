"""Acceptance criteria. Each test prints one PASS/FAIL line with its measured values.

Monte Carlo seeds come from master seed 2026, which was not used for calibration.
"""
import warnings

import numpy as np
import pytest

from oracles import (
    clip_objective,
    clip_reference,
    group_objective,
    group_reference,
    hermitian_stack,
    logdet_objective,
    logdet_reference,
    pd_matrix,
    svt_objective,
    svt_reference,
)
from tscg import proximal as px
from tscg.bench import bench, replication_seed
from tscg.causal import OrderingResult, Stage3Config, estimate_directed
from tscg.cli import main
from tscg.config import EstimationConfig, resolve_tuning
from tscg.graph import is_feasible, shd
from tscg.io import dumps_json
from tscg.pipeline import fit
from tscg.simgen import DesignSpec, generate_graph, noise_inverse_spectral_density, simulate_panel
from tscg.spectral import HermitianStack, dft, whittle_loglik

MASTER = 2026


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}")
        assert ok, detail

    return emit


def _bench_means(design, reps=20):
    warnings.simplefilter("ignore")
    (cell,) = bench([DesignSpec(design, 30, 1000)], reps, master_seed=MASTER, workers=None)
    s = cell.summary()
    return s, {k: s[k]["mean"] for k in ("Eu_mcc", "A_mcc", "B_mcc", "shd")}


@pytest.mark.slow
def test_criterion_1_design1_table(verdict):
    s, m = _bench_means("two_layer")
    ok = s["n_failed"] == 0 and m["Eu_mcc"] >= 0.80 and m["A_mcc"] >= 0.75 and m["B_mcc"] >= 0.75 \
        and m["shd"] <= 20
    verdict(1, "Design 1 (30, 1000), 20 reps", ok,
            f"MCC(Eu)={m['Eu_mcc']:.3f}>=0.80 MCC(A)={m['A_mcc']:.3f}>=0.75 "
            f"MCC(B)={m['B_mcc']:.3f}>=0.75 SHD={m['shd']:.2f}<=20 failed={s['n_failed']}")


@pytest.mark.slow
def test_criterion_2_design2_table(verdict):
    s, m = _bench_means("random_order")
    ok = s["n_failed"] == 0 and m["Eu_mcc"] >= 0.80 and m["shd"] <= 18
    verdict(2, "Design 2 (30, 1000), 20 reps", ok,
            f"MCC(Eu)={m['Eu_mcc']:.3f}>=0.80 SHD={m['shd']:.2f}<=18 failed={s['n_failed']}")


def test_criterion_3_fixture_component(verdict):
    warnings.simplefilter("ignore")
    truth = generate_graph(DesignSpec("fixture", 7, 4000))
    comp = [0, 2, 4]
    # analytic Omega from the VAR transfer function fixes the target pattern
    om = noise_inverse_spectral_density(truth, np.linspace(0.1, 3.0, 7))
    target = {(comp[a], comp[b]) for a in range(3) for b in range(a + 1, 3)
              if np.abs(om[:, comp[a], comp[b]]).max() > 1e-10}
    assert target == {(0, 2), (2, 4)}
    hits = 0
    for r in range(20):
        est = fit(simulate_panel(truth, 4000, replication_seed(MASTER, 3, r))).estimated
        hits += {e for e in est.undirected if set(e) <= set(comp)} == target
    verdict(3, "fixture {1,3,5} edges exactly (1-3),(3-5)", hits >= 18, f"{hits}/20 seeds (need >= 18)")


def test_criterion_4_null_control(verdict):
    empty = 0
    for r in range(20):
        x = np.random.default_rng(replication_seed(MASTER, 4, r)).standard_normal((1000, 5))
        g = fit(x).estimated
        empty += not g.undirected and not g.directed
    verdict(4, "white noise p=5, T=1000 gives an empty graph", empty >= 18, f"{empty}/20 seeds (need >= 18)")


@pytest.mark.slow
def test_criterion_5_prox_oracles(verdict):
    rng = np.random.default_rng(MASTER)
    gaps = {"logdet": [], "group": [], "svt": [], "clip": []}
    for i in range(20):
        p, M = 2 + i % 3, 1 + (i // 3) % 3
        rho, t = rng.uniform(0.3, 3.0), rng.uniform(0.05, 1.5)
        f, s = pd_matrix(rng, p), hermitian_stack(rng, 1, p)[0]
        _, ref = logdet_reference(f, s, rho)
        gaps["logdet"].append(abs(logdet_objective(px.logdet_prox(f, s, rho), f, s, rho) - ref))
        g = hermitian_stack(rng, M, p)
        _, ref = group_reference(g, t)
        gaps["group"].append(abs(group_objective(np.asarray(px.group_soft_threshold(g, t)[0]), g, t) - ref))
        # mode-1 SVT before symmetrization acts on arbitrary complex stacks
        g = rng.standard_normal((M, p, p)) + 1j * rng.standard_normal((M, p, p))
        _, ref = svt_reference(g, t, px.unfold, px.fold)
        gaps["svt"].append(abs(svt_objective(px.svt_unfolding(g, t), g, t, px.unfold) - ref))
        s, floor = hermitian_stack(rng, 1, p)[0], rng.uniform(0.0, 1.0)
        _, ref = clip_reference(s, floor)
        gaps["clip"].append(abs(clip_objective(px.eig_clip(s, floor), s) - ref))
    worst = {k: max(v) for k, v in gaps.items()}
    detail = " ".join(f"{k}={v:.1e}" for k, v in worst.items())
    verdict(5, "prox operators match numerical minimizers, 20 instances each", max(worst.values()) <= 1e-5,
            f"max objective gap {detail} (need <= 1e-5)")


def test_criterion_6_identities(verdict):
    rng = np.random.default_rng(MASTER)
    x = rng.standard_normal((1000, 6))
    d = dft(x).coeffs
    parseval = abs(np.sum(np.abs(d) ** 2) - np.sum(x ** 2)) / np.sum(x ** 2)
    whittle = [whittle_loglik(HermitianStack.identity(p, M), HermitianStack.identity(p, M)) + p * M
               for p, M in ((1, 1), (4, 5), (9, 3))]
    stacks = [hermitian_stack(rng, M, p) for p, M in ((3, 2), (5, 4), (8, 6))]
    unfold_gap = max(abs(px.nuclear_norm(px.unfold(s, 1)) - px.nuclear_norm(px.unfold(s, 2))) for s in stacks)
    clip_gap = 0.0
    for s in stacks:
        once = px.eig_clip_stack(s, 0.3)
        clip_gap = max(clip_gap, np.abs(px.eig_clip_stack(once, 0.3) - once).max())
    ok = parseval < 1e-10 and all(w == 0 for w in whittle) and unfold_gap < 1e-9 and clip_gap < 1e-12
    verdict(6, "exact identities", ok,
            f"Parseval rel={parseval:.1e}<1e-10 whittle(I,I)+pM={max(map(abs, whittle))} "
            f"unfolding gap={unfold_gap:.1e}<1e-9 clip idempotence={clip_gap:.1e}<1e-12")


def test_criterion_7_stage3_two_node(verdict):
    T = 500
    rng = np.random.default_rng(MASTER)
    x1 = rng.standard_normal(T + 1)
    x2 = 0.8 * x1[1:] + 0.5 * x1[:-1] + 0.01 * rng.standard_normal(T)
    x = np.column_stack([x1[1:], x2])
    tune = resolve_tuning(T, 2, EstimationConfig(kappa_const=1.0, nu_const=1.0))
    res = estimate_directed(x, OrderingResult(((0,), (1,)), (0, 1)), Stage3Config(tune.kappa, tune.nu))
    A, B = res.coeffs.A, res.coeffs.B
    err = max(abs(A[1, 0] - 0.8), abs(B[1, 0] - 0.5))
    signs = np.array_equal(np.sign(A), [[0, 0], [1, 0]]) and np.array_equal(np.sign(B), [[0, 0], [1, 0]])
    verdict(7, "two-node Stage-3 regression", err < 0.02 and signs,
            f"A21={A[1, 0]:.4f} B21={B[1, 0]:.4f} max error={err:.1e}<0.02 sign pattern exact={signs}")


def _fuzzed_spec(rng, i):
    design = ("two_layer", "random_order")[i % 2]
    return DesignSpec(
        design,
        p=int(rng.integers(2, 13)),
        T=int(rng.integers(50, 151)) * 2,
        seed=int(rng.integers(0, 2 ** 63)),
        within_edge_prob=float(rng.uniform(0.0, 0.4)),
        directed_edge_prob=float(rng.uniform(0.0, 1.0)),
        hub_prob=float(rng.uniform(0.0, 0.6)),
        layer1_frac=float(rng.uniform(0.05, 0.5)),
        independent_ab=bool(rng.random() < 0.3),
    )


@pytest.mark.slow
def test_criterion_8_structural_invariants(verdict):
    warnings.simplefilter("ignore")
    rng = np.random.default_rng(MASTER)
    bad_truth = bad_radius = bad_fit = bad_shd = 0
    graphs = []
    for i in range(1000):
        spec = _fuzzed_spec(rng, i)
        truth = generate_graph(spec)
        bad_truth += not is_feasible(truth.graph, truth.coeffs)
        bad_radius += not truth.coeffs.spectral_radius() < 1
        rep = fit(simulate_panel(truth, spec.T, spec.seed))
        bad_fit += not is_feasible(rep.estimated, rep.coeffs)
        graphs.append(truth.graph)
        graphs.append(rep.estimated)
    for a, b in zip(graphs[0::2], graphs[1::2]):
        bad_shd += shd(a, a) != 0 or shd(b, b) != 0 or shd(a, b) != shd(b, a)
    ok = bad_truth == bad_radius == bad_fit == bad_shd == 0
    verdict(8, "1000 fuzzed (spec, seed) pairs", ok,
            f"infeasible truths={bad_truth} rho>=1={bad_radius} infeasible fits={bad_fit} "
            f"SHD identity/symmetry violations={bad_shd}")


def test_criterion_9_determinism(verdict, tmp_path, monkeypatch):
    warnings.simplefilter("ignore")
    panel, truth_path = tmp_path / "panel.csv", tmp_path / "truth.json"
    assert main(["simulate", "--design", "two_layer", "--p", "12", "--T", "400", "--seed", str(MASTER),
                 "--panel", str(panel), "--truth", str(truth_path)]) == 0
    outputs = []
    for run in range(2):
        rep, graph = tmp_path / f"r{run}.json", tmp_path / f"g{run}.json"
        assert main(["fit", "--panel", str(panel), "--report", str(rep), "--graph", str(graph)]) == 0
        outputs.append((rep.read_bytes(), graph.read_bytes()))
    same_fit = outputs[0] == outputs[1]
    cells = [DesignSpec("two_layer", 10, 300), DesignSpec("random_order", 10, 300)]
    runs = {}
    for label, workers in (("1", 1), ("2", 2), ("max", "max")):
        monkeypatch.setenv("TSCG_WORKERS", str(workers))
        runs[label] = dumps_json([c.to_dict() for c in bench(cells, 3, master_seed=MASTER)])
    same_bench = runs["1"] == runs["2"] == runs["max"]
    verdict(9, "byte-identical outputs", same_fit and same_bench,
            f"fit report/graph across two runs identical={same_fit}; "
            f"bench JSON across workers 1, 2, max identical={same_bench}")
