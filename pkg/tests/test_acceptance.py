"""Acceptance criteria, one test each, with a PASS/FAIL line printed per criterion."""
import json
import time
from pathlib import Path

import numpy as np
import pytest

from hiercent import cli, datasets
from hiercent.analysis import MeasureParams, binarize_and_rank, combination_matrix, compute_measures, kmeans, schulze
from hiercent.centrality import betweenness_centrality, current_flow_closeness, katz_centrality, pagerank_centrality
from hiercent.evaluation import EvalParams, kendall_tau_b, rbo_ranked
from hiercent.graph import Graph, all_pairs_distances, graph_stats
from hiercent.hierarchy import core_numbers, edge_trussness
from oracles import (
    betweenness_brute,
    condorcet_winner,
    connected_graphs,
    katz_series,
    random_connected_graph,
    random_graph,
    tau_b_pairs,
)

CORRELATION_EVALS = [EvalParams("pearson"), EvalParams("spearman"), EvalParams("kendall_b")]
RBO_EVALS = [EvalParams("rbo", 0.5), EvalParams("rbo", 0.9)]


@pytest.fixture
def report(capsys):
    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {num}: {'PASS' if ok else 'FAIL'} {detail}")
    return emit


def meaningful(measures, evals):
    mats = [combination_matrix(measures, e) for e in evals]
    return binarize_and_rank({"n": mats}).counts["n"]


def check_stats(name, expected, tol):
    t0 = time.perf_counter()
    s = graph_stats(datasets.load(name))
    elapsed = time.perf_counter() - t0
    fails = []
    for key, want in expected.items():
        got = getattr(s, key)
        if abs(got - want) > tol.get(key, 0):
            fails.append(f"{key}={got:.4f} want {want}")
    if elapsed >= 1.0:
        fails.append(f"runtime {elapsed:.2f}s")
    return fails, s, elapsed


def test_criterion_1_karate_table(report):
    fails, s, dt = check_stats(
        "karate",
        dict(density=0.139, transitivity=0.255, assortativity=-0.475, avg_k=4.58, k_max=17, gamma_max=4, phi_max=5),
        dict(density=1e-3, transitivity=1e-3, assortativity=2e-3, avg_k=1e-2),
    )
    report(1, not fails, f"density={s.density:.4f} transitivity={s.transitivity:.4f} "
                         f"assortativity={s.assortativity:.4f} avg_k={s.avg_k:.3f} k_max={s.k_max} "
                         f"gamma_max={s.gamma_max} phi_max={s.phi_max} runtime={dt:.3f}s {fails or ''}")
    assert not fails


def test_criterion_2_lesmis_table(report):
    fails, s, dt = check_stats(
        "lesmis",
        dict(density=0.086, transitivity=0.498, assortativity=-0.165, gamma_max=9, phi_max=10),
        dict(density=1e-3, transitivity=2e-3, assortativity=5e-3),
    )
    report(2, not fails, f"density={s.density:.4f} transitivity={s.transitivity:.4f} "
                         f"assortativity={s.assortativity:.4f} gamma_max={s.gamma_max} phi_max={s.phi_max} "
                         f"runtime={dt:.3f}s {fails or ''}")
    assert not fails


def test_criterion_3_karate_correlation_count(report, capsys):
    g = datasets.karate()
    lam_c = meaningful(compute_measures(g, "karate"), CORRELATION_EVALS)
    # sensitivity to the two conventions the target leaves open
    lam_max = katz_centrality(g).params["lambda_max"]
    rows = []
    for frac in (0.1, 0.5, 0.9, 0.99):
        for distinct in (False, True):
            m = compute_measures(g, "karate", MeasureParams(katz_s=frac / lam_max, local_distinct=distinct))
            rows.append(f"katz s={frac:.2f}/lambda local_distinct={distinct}: {meaningful(m, CORRELATION_EVALS)}/72")
    with capsys.disabled():
        print("\n  lambda_c sensitivity (Zachary):\n    " + "\n    ".join(rows))
    ok = abs(lam_c - 55) <= 5
    report(3, ok, f"lambda_c={lam_c}/72 target 55 +/- 5")
    assert ok


def test_criterion_4_karate_similarity_counts(report, capsys):
    g = datasets.karate()
    m = compute_measures(g, "karate")
    lam_j = meaningful(m, [EvalParams("jaccard")])
    lam_rbo = meaningful(m, RBO_EVALS)
    group = meaningful(m, [EvalParams("rbo", p, rbo_ties="group") for p in (0.5, 0.9)])
    rng = np.random.default_rng(0)
    perm_counts = []
    for _ in range(10):
        perm = rng.permutation(g.n_nodes)
        perm_counts.append(meaningful(compute_measures(g.relabel(perm), "karate"), RBO_EVALS))
    with capsys.disabled():
        print(f"\n  lambda_RBO sensitivity (Zachary): tie-aware prefixes {group}/48; "
              f"10 random node orders {sorted(perm_counts)}")
    ok = abs(lam_j - 11) <= 3 and abs(lam_rbo - 18) <= 5
    report(4, ok, f"lambda_J={lam_j}/24 target 11 +/- 3; lambda_RBO={lam_rbo}/48 target 18 +/- 5")
    assert ok


def _tree(rng, n):
    return Graph.from_edges([(i, int(rng.integers(0, i))) for i in range(1, n)], n=n)


def test_criterion_5_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    fails = []

    corpus = [g for n in range(3, 6) for g in connected_graphs(n)]
    corpus += [random_connected_graph(rng, int(rng.integers(6, 9)), float(rng.uniform(0.1, 0.7))) for _ in range(300)]
    corpus += [random_graph(rng, int(rng.integers(3, 13)), float(rng.uniform(0.1, 0.6))) for _ in range(100)]
    worst = max(np.abs(betweenness_centrality(g).values - betweenness_brute(g)).max() for g in corpus)
    if worst > 1e-9:
        fails.append(f"betweenness err {worst:.2e}")

    k3 = current_flow_closeness(Graph.from_edges([(0, 1), (1, 2), (0, 2)])).values
    cf_err = float(np.abs(k3 - 2.25).max())
    for _ in range(50):
        n = int(rng.integers(2, 20))
        t = _tree(rng, n)
        cf_err = max(cf_err, float(np.abs(current_flow_closeness(t).values - n / all_pairs_distances(t).sum(1)).max()))
    if cf_err > 1e-9:
        fails.append(f"current-flow err {cf_err:.2e}")

    katz_err = 0.0
    for _ in range(50):
        g = random_graph(rng, int(rng.integers(2, 15)), 0.3)
        katz_err = max(katz_err, float(np.abs(katz_centrality(g, 0.05).values - katz_series(g, 0.05)).max()))
    if katz_err > 1e-9:
        fails.append(f"katz err {katz_err:.2e}")

    tau_bad = 0
    for _ in range(300):
        n = int(rng.integers(3, 30))
        x, y = rng.integers(0, 5, n), rng.integers(0, 5, n)
        try:
            want = tau_b_pairs(x, y)
        except ZeroDivisionError:
            continue
        tau_bad += kendall_tau_b(x, y) != want

    if tau_bad:
        fails.append(f"tau-b mismatches {tau_bad}")

    sch_bad = 0
    for _ in range(200):
        m = int(rng.integers(2, 7))
        ballots = np.array([rng.permutation(m) for _ in range(int(rng.integers(1, 10)))], dtype=float)
        cw = condorcet_winner(ballots)
        if cw is not None and schulze(ballots).ranking[0] != cw:
            sch_bad += 1
        same = np.tile(ballots[0], (3, 1))
        if schulze(same).ranking != list(np.argsort(-same[0], kind="stable")):
            sch_bad += 1
    if sch_bad:
        fails.append(f"schulze failures {sch_bad}")

    report(5, not fails, f"betweenness on {len(corpus)} graphs max err {worst:.1e}; "
                         f"current-flow {cf_err:.1e}; katz {katz_err:.1e}; tau-b exact; schulze 200 profiles "
                         f"{fails or ''}")
    assert not fails


def _nesting_ok(g):
    core = core_numbers(g)
    for k in range(1, int(core.max()) + 1):
        keep = {v for v in range(g.n_nodes) if core[v] >= k}
        if any(len(set(g.neighbors(v)) & keep) < k for v in keep):
            return False
    truss = edge_trussness(g)
    prev = set(truss)
    for k in range(2, max(truss.values(), default=2) + 1):
        es = {e for e, t in truss.items() if t >= k}
        if not es <= prev:
            return False
        prev = es
        nbr = {}
        for u, v in es:
            nbr.setdefault(u, set()).add(v)
            nbr.setdefault(v, set()).add(u)
        if any(len(nbr[u] & nbr[v]) < k - 2 for u, v in es):
            return False
    return True


def _run_tree(root: Path):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()
            and p.name != "manifest.json"}


def test_criterion_6_invariants(report, tmp_path):
    rng = np.random.default_rng(6)
    fails = []
    for _ in range(100):
        g = random_connected_graph(rng, int(rng.integers(2, 30)), float(rng.uniform(0.05, 0.4)))
        v = pagerank_centrality(g).values
        if abs(v.sum() - 1) > 1e-9 or not np.all(v > 0):
            fails.append("pagerank")
            break
    graphs = [random_graph(rng, int(rng.integers(4, 20)), float(rng.uniform(0.1, 0.6))) for _ in range(100)]
    if not all(_nesting_ok(g) for g in graphs):
        fails.append("core/truss nesting")
    for _ in range(500):
        n = int(rng.integers(1, 30))
        k = int(rng.integers(1, n + 1))
        p = float(rng.uniform(0.01, 0.99))
        r = rbo_ranked(rng.permutation(n), rng.permutation(n), p, k)
        if not r.base <= r.extrapolated <= r.base + p ** k + 1e-12:
            fails.append("rbo bounds")
            break
    from hiercent.analysis import CombinationMatrix
    for _ in range(200):
        vals = rng.uniform(-1, 1, 24)
        before = binarize_and_rank({"n": [CombinationMatrix("n", "x", vals.reshape(4, 6))]}).counts["n"]
        vals[rng.integers(24)] *= 1 / 0.9 if rng.random() < 0.5 else 1.0
        vals = np.clip(vals, -1, 1)
        after = binarize_and_rank({"n": [CombinationMatrix("n", "x", vals.reshape(4, 6))]}).counts["n"]
        if after < before:
            fails.append("binarize monotonicity")
            break
    feats = rng.normal(size=(28, 24))
    a, b = kmeans(feats, 3, seed=11), kmeans(feats, 3, seed=11)
    if not (np.array_equal(a.labels, b.labels) and a.centroids.tobytes() == b.centroids.tobytes()):
        fails.append("kmeans determinism")
    args = ["pipeline", "-i", "bundled:karate", "bundled:lesmis", "-o"]
    cli.main(args + [str(tmp_path / "r1")])
    cli.main(args + [str(tmp_path / "r2")])
    if _run_tree(tmp_path / "r1") != _run_tree(tmp_path / "r2"):
        fails.append("pipeline rerun differs")
    report(6, not fails, f"pagerank, nesting, rbo bounds, binarize, kmeans and pipeline determinism {fails or ''}")
    assert not fails


def test_criterion_7_smoke(report, tmp_path):
    out = tmp_path / "out"
    t0 = time.perf_counter()
    code = cli.main(["pipeline", "-i", "bundled:karate", "bundled:lesmis", "-o", str(out)])
    dt = time.perf_counter() - t0
    fails = [] if code == 0 else [f"exit {code}"]
    if dt >= 10:
        fails.append(f"runtime {dt:.1f}s")
    evals = ["pearson", "spearman", "kendall_b", "jaccard",
             "rbo_topk_p0.5", "rbo_topk_p0.9", "rbo_all_p0.5", "rbo_all_p0.9"]
    declared = [f"{net}/stats.csv" for net in ("karate", "lesmis")]
    declared += [f"{net}/combos_{e}.csv" for net in ("karate", "lesmis") for e in evals]
    declared += [f"{net}/measures/{f}.csv" for net in ("karate", "lesmis") for f in
                 ("hierarchy_core", "hierarchy_truss", "hierarchy_lrc", "hierarchy_tp", "degree", "local",
                  "betweenness", "cf_closeness", "katz", "pagerank")]
    declared += [f"aggregate/{kind}_{e}.{ext}" for e in evals for kind, ext in
                 (("netcorr", "csv"), ("ranking", "csv"), ("clusters", "json"), ("schulze", "json"))]
    missing = [f for f in declared if not (out / f).is_file()]
    if missing:
        fails.append(f"missing {missing[:3]}")
    man = json.loads((out / "aggregate" / "manifest.json").read_text())
    on_disk = {str(p.relative_to(out)) for p in out.rglob("*") if p.is_file()} - {"aggregate/manifest.json"}
    listed = {f["path"] for f in man["files"]}
    if listed != on_disk or not man["complete"] or "versions" not in man or "config" not in man:
        fails.append("manifest invalid")
    report(7, not fails, f"pipeline on 2 networks in {dt:.2f}s, {len(on_disk)} files, manifest ok={not fails}")
    assert not fails
