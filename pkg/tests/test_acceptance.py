"""The fourteen acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or as part of ``pytest``.
"""

import math
import os
import sys
import time
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from conftest import ACCEPTANCE_LINES
from stitchwalk.apps import estimate_mixing, random_spanning_tree
from stitchwalk.cli import ExperimentSpec, emit, fit_exponent, resolve_lambda, run_experiment
from stitchwalk.congest import SimConfig
from stitchwalk.graph import Graph, generate
from stitchwalk.oracle import (enumerate_spanning_trees, expected_visits, l1_to_stationary, lazy_chain,
                               spanning_tree_count, tv_distance)
from stitchwalk.walk import (WalkParams, k_rw_sod, many_random_walks, mh_random_walk, phase1_distribute,
                             regenerate_walks, sample_coupon, send_more_coupons, single_random_walk)
from stitchwalk.walk.params import graph_diameter, log2c

GRAPHS = {
    "path5": generate("path", 5),
    "cycle8": generate("cycle", 8),
    "star9": generate("star", 9),
    "grid4x4": generate("grid", 16),
    "complete6": generate("complete", 6),
}
VERIFICATION = {
    **GRAPHS,
    "cycle4": generate("cycle", 4),
    "cycle5": generate("cycle", 5),
    "cycle9": generate("cycle", 9),
    "complete4": generate("complete", 4),
    "complete16": generate("complete", 16),
    "chord4": Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
}


def report(num: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE #{num}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def freq(values, n):
    return np.bincount(values, minlength=n) / len(values)


def test_01_destination_law(frozen):
    t0 = time.perf_counter()
    worst = 0.0
    where = ""
    for name, g in GRAPHS.items():
        for ell in (4, 12, 20):
            lam = 2 if ell == 4 else 3
            ends = [single_random_walk(g, 0, WalkParams(ell, lam, 1), SimConfig(seed=s)).destination
                    for s in range(20000)]
            tv = tv_distance(freq(ends, g.n), frozen["rows"][f"{name}/0/{ell}"])
            if tv > worst:
                worst, where = tv, f"{name} ell={ell}"
    elapsed = time.perf_counter() - t0
    report(1, worst <= 0.02 and elapsed <= 300,
           f"max TV {worst:.4f} at {where} (limit 0.02); runtime {elapsed:.0f}s (limit 300s)")


def test_02_short_walk_lengths():
    g = generate("complete", 6)
    pvals = {}
    for lam in (2, 3, 5):
        delta, _, _ = send_more_coupons(g, 0, WalkParams(2 * lam, lam, 10000), SimConfig(seed=lam))
        lengths = [d for coupons in delta for _, d in coupons]
        counts = np.bincount(lengths, minlength=2 * lam)[lam:2 * lam]
        pvals[lam] = chisquare(counts).pvalue
    report(2, min(pvals.values()) >= 0.001,
           "chi-square p " + ", ".join(f"lam={k}: {v:.3g}" for k, v in pvals.items()) + " (limit 0.001)")


def test_03_sample_coupon_uniform():
    g = generate("star", 4)
    placement = [[], [(0, 2)], [(0, 2)], [(0, 3)]]
    picks = [sample_coupon(g, 0, placement, SimConfig(seed=s))[0][0] for s in range(10000)]
    f = freq(picks, 4)[1:]
    dev = float(np.max(np.abs(f - 1 / 3)))
    report(3, dev <= 0.02, f"frequencies {np.round(f, 4).tolist()}, max deviation {dev:.4f} (limit 0.02)")


def test_04_visits_bound():
    violations = checked = 0
    for name in ("cycle16", "grid4x4"):
        g = generate("cycle", 16) if name == "cycle16" else GRAPHS["grid4x4"]
        ell = g.m ** 2
        lam = resolve_lambda("sqrt", ell, graph_diameter(g))
        L = log2c(g.n)
        for k in (1, 4):
            for seed in range(100):
                outs = many_random_walks(g, [0] * k, WalkParams(ell, lam), SimConfig(seed=seed), trace=True)
                regenerate_walks(outs)
                total = np.sum([o.visit_counts for o in outs], axis=0)
                bound = np.array([32 * g.degree(x) * math.sqrt(k * ell + 1) * L + k for x in range(g.n)])
                violations += int(np.sum(total > bound))
                checked += 1
    report(4, violations == 0, f"{violations} violations over {checked} runs")


def test_05_phase1_congestion():
    g = generate("complete", 8)
    lam = 4
    ok_means = []
    frac_ok = []
    for eta in (1, 2):
        loads, below = [], []
        for seed in range(200):
            _, _, per = phase1_distribute(g, WalkParams(2 * lam, lam, eta), SimConfig(seed=seed), record_loads=True)
            for j in range(1, lam + 1):
                for u, v in g.edges():
                    x = per[j][(u, v)] + per[j][(v, u)]
                    loads.append(x)
                    below.append(x < 4 * eta * math.log2(g.n))
        mean = float(np.mean(loads))
        ok_means.append((eta, mean, 1.6 * eta <= mean <= 2.4 * eta))
        frac_ok.append((eta, float(np.mean(below))))
    ok = all(m[2] for m in ok_means) and all(f >= 0.99 for _, f in frac_ok)
    detail = "; ".join(f"eta={e}: mean {m:.3f}, below-cap {f:.4f}" for (e, m, _), (_, f) in zip(ok_means, frac_ok))
    report(5, ok, detail + " (mean in [1.6eta, 2.4eta], cap share >= 0.99)")


def test_06_round_separation():
    g = generate("cycle", 64)
    D = graph_diameter(g)
    ells = [256, 1024, 4096]
    med = []
    beat = 0
    for ell in ells:
        lam = resolve_lambda("sqrt", ell, D)
        rounds = [single_random_walk(g, 0, WalkParams(ell, lam), SimConfig(seed=s)).stats.rounds_total
                  for s in range(50)]
        med.append(float(np.median(rounds)))
        if ell == 4096:
            beat = sum(r < ell for r in rounds)
    slope = fit_exponent(ells, med)
    ok = beat >= 0.95 * 50 and 0.4 <= slope <= 0.7
    report(6, ok, f"stitched < naive in {beat}/50 at ell=4096; medians {med}; exponent {slope:.3f} (in [0.4, 0.7])")


def test_07_independence():
    g = GRAPHS["cycle8"]
    trials = 50000
    joint = np.zeros((8, 8))
    for s in range(trials):
        a, b = many_random_walks(g, [0, 0], WalkParams(8, 2, 1), SimConfig(seed=s))
        joint[a.destination, b.destination] += 1
    joint /= trials
    tv = 0.5 * float(np.abs(joint - np.outer(joint.sum(1), joint.sum(0))).sum())
    report(7, tv <= 0.05, f"TV(joint, product) {tv:.4f} (limit 0.05)")


def test_08_sod_delivery():
    g = GRAPHS["grid4x4"]
    D = graph_diameter(g)
    k = 5
    mismatches = 0
    worst = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        sources = rng.integers(0, g.n, k).tolist()
        r = k_rw_sod(g, sources, WalkParams(16, 4), SimConfig(seed=seed))
        mismatches += r.delivered != [o.destination for o in r.outcomes]
        worst = max(worst, r.sod_rounds)
    ok = mismatches == 0 and worst <= 4 * (D + k)
    report(8, ok, f"{mismatches} mismatched runs of 100; max delivery rounds {worst} (limit {4 * (D + k)})")


def test_09_metropolis_hastings(frozen):
    g = generate("complete", 4)
    ends = [mh_random_walk(g, 0, [0.4, 0.3, 0.2, 0.1], 0.5, WalkParams(10, 2), SimConfig(seed=s)).destination
            for s in range(20000)]
    tv = tv_distance(freq(ends, 4), frozen["rows"]["mh/complete4/0/10"])
    report(9, tv <= 0.02, f"TV {tv:.4f} (limit 0.02)")


def test_10_rst_uniform(frozen):
    parts = []
    ok = True
    for name, runs in (("cycle4", 20000), ("complete4", 50000)):
        g = VERIFICATION[name]
        trees = enumerate_spanning_trees(g)
        assert len(trees) == spanning_tree_count(g) == frozen["tree_counts"][name]
        counts = Counter()
        invalid = 0
        for s in range(runs):
            t = random_spanning_tree(g, 0, SimConfig(seed=s))
            try:
                t.validate(g)
            except ValueError:
                invalid += 1
            counts[t.edges] += 1
        p = chisquare([counts[t] for t in trees]).pvalue
        ok &= p >= 0.001 and invalid == 0 and set(counts) <= set(trees)
        parts.append(f"{name}: p={p:.3g}, invalid={invalid}")
    report(10, ok, "; ".join(parts) + " (p limit 0.001)")


def test_11_mixing_sandwich(frozen):
    parts = []
    ok = True
    for name in ("complete16", "cycle9"):
        g = VERIFICATION[name]
        lo, hi = frozen["mixing"][name]["tau_mix"], frozen["mixing"][name]["tau_delta"]
        est = [estimate_mixing(g, 0, SimConfig(seed=s)).tau_estimate for s in range(20)]
        inside = sum(lo <= t <= hi for t in est)
        ok &= inside >= 19
        parts.append(f"{name}: {inside}/20 in [{lo}, {hi}] (estimates {min(est)}..{max(est)})")
    report(11, ok, "; ".join(parts) + " (need >= 19/20)")


def test_12_monotonicity():
    violations = 0
    for g in VERIFICATION.values():
        for x in range(g.n):
            d = l1_to_stationary(g, x, 200)
            violations += int(np.sum(np.diff(d) > 1e-10))
    report(12, violations == 0, f"{violations} increases beyond 1e-10 over {len(VERIFICATION)} graphs, t <= 200")


def test_13_expected_visits():
    violations = 0
    worst = 0.0
    for g in VERIFICATION.values():
        if g.n > 16:
            continue
        Q = lazy_chain(g).transition
        deg = np.array(g.degrees(), dtype=float)
        cur = np.eye(g.n)
        acc = np.eye(g.n)
        for t in range(g.m ** 2 + 1):
            if t > 0:
                cur = cur @ Q
                acc += cur
            ratio = acc / (8 * deg[None, :] * math.sqrt(t + 1))
            worst = max(worst, float(ratio.max()))
            violations += int(np.sum(ratio > 1))
        assert np.allclose(acc, expected_visits(lazy_chain(g), g.m ** 2))
    report(13, violations == 0, f"{violations} violations; largest E[N]/bound {worst:.4f}")


def test_14_determinism(tmp_path):
    specs = [
        dict(graph="cycle:16", protocol="single", ell=[64, 128], lam="sqrt", trials=3),
        dict(graph="grid:16", protocol="many", ell=[32], lam=4, k=3, trials=3),
        dict(graph="grid:16", protocol="sod", ell=[24], lam=3, k=4, trials=2),
        dict(graph="cycle:9", protocol="pos", ell=[27], lam=3, trials=2),
        dict(graph="complete:5", protocol="mh", ell=[12], lam=2, trials=3, target="uniform"),
        dict(graph="complete:4", protocol="rst", ell=[0], trials=5),
        dict(graph="complete:9", protocol="mixing", ell=[0], trials=1),
        dict(graph="path:10", protocol="naive", ell=[30], trials=2),
    ]
    differing = []
    for i, d in enumerate(specs):
        for fmt in ("csv", "json"):
            a, b = tmp_path / f"a{i}.{fmt}", tmp_path / f"b{i}.{fmt}"
            emit(run_experiment(ExperimentSpec(**d, seed=7)), fmt, str(a))
            emit(run_experiment(ExperimentSpec(**d, seed=7)), fmt, str(b))
            if a.read_bytes() != b.read_bytes():
                differing.append(f"{d['protocol']}/{fmt}")
    report(14, not differing, f"{2 * len(specs) - len(differing)}/{2 * len(specs)} output files byte-identical"
           + (f"; differing: {differing}" if differing else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([os.path.abspath(__file__), "-q", "-s", "-p", "no:cacheprovider"]))
