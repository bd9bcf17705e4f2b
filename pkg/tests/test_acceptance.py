"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from oracles import brute_nmi, brute_omega, brute_projection, naive_qov
from slpa.bench import run_bench, sizes_for_edges
from slpa.core import RunConfig, evolve
from slpa.graph import AttributeTable, Cover, Graph, project_bipartite
from slpa.metrics import extended_nmi, omega_index, overlap_fscore, overlapping_modularity
from slpa.pipeline import slpa
from slpa.postprocess import DEFAULT_R_SWEEP, attribute_match, containment_forest, detect
from slpa.synth import PlantedConfig, homogeneous_random_graph, planted_cover_graph


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_criterion_01_linear_scaling(verdict):
    start = time.perf_counter()
    ladder = [25_000, 50_000, 100_000, 200_000, 400_000]
    result = run_bench(sizes_for_edges(ladder, 10), mean_degree=10, T=100)
    total = time.perf_counter() - start
    ok = result.r_squared >= 0.98 and total < 600 and len(result.rungs()) == 5
    verdict(1, ok, f"{result.summary()}; total {total:.1f}s")


def _test_graphs(karate):
    yield "karate", karate
    yield "two-triangles", Graph.from_edges([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    yield "random", homogeneous_random_graph(500, 6, seed=1)
    yield "planted", planted_cover_graph(PlantedConfig(120, [30] * 5, overlapping=30, seed=2))[0]
    yield "isolated", Graph.from_edges([(0, 1), (1, 2)], n=6)
    yield "bipartite", Graph.from_edges([(0, 3), (1, 3), (1, 4), (2, 5)], side=[1, 1, 1, 2, 2, 2])


def test_criterion_02_disjoint_reduction(verdict, karate):
    bad = []
    for name, g in _test_graphs(karate):
        for seed in range(10):
            if not slpa(g, r=0.5, seed=seed).cover.is_partition_of(g.n):
                bad.append((name, seed))
    verdict(2, not bad, f"r=0.5 partitions on 6 graphs x 10 seeds; violations {bad}")


def test_criterion_03_memory_totals(verdict, karate):
    bad = 0
    for _, g in _test_graphs(karate):
        for seed in range(3):
            mem = evolve(g, RunConfig(100, seed))
            expect = np.where(g.degrees > 0, 101, 1)
            bad += int((mem.sizes != expect).sum())
            bad += sum(sum(mem[i].values()) != expect[i] for i in range(g.n))
    verdict(3, bad == 0, f"memory totals 101 (non-isolated) / 1 (isolated); mismatches {bad}")


def test_criterion_04_planted_recovery(verdict):
    evolve(Graph.from_edges([(0, 1)]), RunConfig(2, 0))  # compile outside the timed region
    scores = []
    start = time.perf_counter()
    for seed in range(10):
        g, truth = planted_cover_graph(PlantedConfig(300, [30] * 10, p_in=0.3, mu=0.1, seed=seed))
        scores.append(extended_nmi(slpa(g, T=100, r=0.3, seed=seed).cover, truth, g.n))
    elapsed = time.perf_counter() - start
    mean = float(np.mean(scores))
    verdict(4, mean >= 0.95 and elapsed < 5, f"mean NMI {mean:.4f} over 10 seeds in {elapsed:.2f}s")


def test_criterion_05_overlap_detection(verdict):
    per_r = {r: [] for r in DEFAULT_R_SWEEP}
    for seed in range(10):
        cfg = PlantedConfig(300, [30] * 11, overlapping=30, memberships=2, p_in=0.3, mu=0.1, seed=seed)
        g, truth = planted_cover_graph(cfg)
        mem = evolve(g, RunConfig(100, seed))
        for r in DEFAULT_R_SWEEP:
            conf = overlap_fscore(detect(g, mem, r).cover, truth, g.n)
            per_r[r].append((float(conf.f_score), conf.detected / conf.actual))
    means = {r: np.mean(v, axis=0) for r, v in per_r.items()}
    best = max(means, key=lambda r: means[r][0])
    f, ratio = means[best]
    verdict(5, f >= 0.5 and 0.5 <= ratio <= 1.5, f"best r={best}: mean F {f:.3f}, O_n^d/O_n {ratio:.3f}")


def _random_cover(rng, n, full):
    k = int(rng.integers(1, 6))
    comms = [set(np.flatnonzero(rng.random(n) < rng.uniform(0.15, 0.7)).tolist()) for _ in range(k)]
    if full:
        for v in range(n):
            if not any(v in c for c in comms):
                comms[int(rng.integers(k))].add(v)
    comms = [c for c in comms if c] or [{0}]
    return Cover.from_sets(comms)


def test_criterion_06_metric_oracles(verdict):
    rng = np.random.default_rng(2024)
    worst = dict(omega=0.0, nmi=0.0, qov=0.0)
    for _ in range(200):
        n = int(rng.integers(2, 13))
        a, b = _random_cover(rng, n, True), _random_cover(rng, n, bool(rng.integers(2)))
        om, ref = omega_index(a, b, n), brute_omega(a, b, n)
        worst["omega"] = max(worst["omega"], 0.0 if math.isnan(om) and math.isnan(ref) else abs(om - ref))
        worst["nmi"] = max(worst["nmi"], abs(extended_nmi(a, b, n) - brute_nmi(a, b, n)))
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4] or [(0, 1)]
        g = Graph.from_edges(pairs, n=n)
        worst["qov"] = max(worst["qov"], abs(overlapping_modularity(g, a) - naive_qov(g, a)))
    ok = worst["omega"] <= 1e-12 and worst["nmi"] <= 1e-12 and worst["qov"] <= 1e-9
    verdict(6, ok, "max deviation " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))


def _covers_for(tp, fp, fn):
    """Covers over tp+fp+fn+1 nodes realising the given overlap confusion counts."""
    n = tp + fp + fn + 1
    everyone = frozenset(range(n))
    det_over = set(range(tp + fp))
    true_over = set(range(tp)) | set(range(tp + fp, tp + fp + fn))
    detected = Cover.from_sets([everyone] + ([det_over] if det_over else []))
    truth = Cover.from_sets([everyone] + ([true_over] if true_over else []))
    return detected, truth, n


def test_criterion_07_fscore_identity(verdict):
    rng = np.random.default_rng(7)
    triples = [(0, 0, 0), (0, 3, 0), (0, 0, 3), (0, 2, 5)]
    triples += [tuple(int(x) for x in rng.integers(0, 12, 3)) for _ in range(1000 - len(triples))]
    bad = []
    for tp, fp, fn in triples:
        conf = overlap_fscore(*_covers_for(tp, fp, fn))
        if tp + fp + fn == 0:
            expect = Fraction(1)  # detected equals truth: vacuously perfect
        else:
            p = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
            r = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
            expect = 2 * p * r / (p + r) if p + r else Fraction(0)
        if (conf.true_positives, conf.false_positives, conf.false_negatives) != (tp, fp, fn) or conf.f_score != expect:
            bad.append((tp, fp, fn))
    verdict(7, not bad, f"1000 triples, exact rational F = 2pr/(p+r); mismatches {bad[:5]}")


def _bipartite_blocks(seed):
    """Two planted co-communities of 15 users x 15 items each, sparse noise across."""
    rng = np.random.default_rng(seed)
    users, items = 30, 30
    side = [1] * users + [2] * items
    edges = []
    for u in range(users):
        for i in range(items):
            same = (u < 15) == (i < 15)
            if rng.random() < (0.4 if same else 0.02):
                edges.append((u, users + i))
    return Graph.from_edges(edges, n=users + items, side=side)


def test_criterion_08_bipartite_pipeline(verdict):
    g = _bipartite_blocks(3)
    cover = slpa(g, r=0.1, seed=0).cover
    scores, proj_ok = {}, True
    for side in (1, 2):
        proj = project_bipartite(g, side)
        proj_ok &= set(proj.edges()) == brute_projection(g, side)
        scores[side] = overlapping_modularity(proj, cover.restrict(g.subgraph_nodes(side)))
    ok = proj_ok and all(math.isfinite(q) for q in scores.values())
    verdict(8, ok, f"projection matches oracle: {proj_ok}; Q_ov side1 {scores[1]:.3f}, side2 {scores[2]:.3f}")


def test_criterion_09_karate(verdict, karate):
    counts = {}
    for r in DEFAULT_R_SWEEP:
        counts[r] = [len(slpa(karate, r=r, seed=s).cover) for s in range(10)]
    in_range = {r: sum(2 <= c <= 8 for c in cs) for r, cs in counts.items()}
    ok = karate.n == 34 and abs(karate.mean_degree - 4.5) <= 0.1 and min(in_range.values()) >= 8
    verdict(9, ok, f"n={karate.n}, mean degree {karate.mean_degree:.3f}, seeds with 2-8 communities per r {in_range}")


def test_criterion_10_hierarchy(verdict):
    cover = Cover.from_sets(
        [set(range(12)), set(range(6)), set(range(6, 12)), {0, 1, 2}, {2, 3}, {10, 11}, {0, 1}]
    )
    grade = ["9", "9", "9", "9", "10", "10", "11", "11", "11", "12", "12", None]
    sex = ["F", "F", "M", "M", "F", "M", "M", "F", "F", "M", "M", "M"]
    table = AttributeTable(("grade", "sex"), tuple(zip(grade, sex)))
    expected_parent = (None, 0, 0, 1, 1, 2, 3)
    expected_match = [
        ("sex", 7 / 12), ("grade", 4 / 6), ("sex", 4 / 6), ("grade", 1.0),
        ("grade", 1.0), ("sex", 1.0), ("grade", 1.0),
    ]
    forest = containment_forest(cover)
    matches = [attribute_match(c, table) for c in cover]
    ok = forest.parent == expected_parent and not forest.ambiguous and all(
        a == ea and abs(s - es) <= 1e-12 for (a, s), (ea, es) in zip(matches, expected_match)
    )
    verdict(10, ok, f"parents {forest.parent}; matches {[(a, round(s, 3)) for a, s in matches]}")
