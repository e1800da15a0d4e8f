import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stitchwalk.graph import Graph, generate
from stitchwalk.oracle import (ChainSpec, Distribution, OracleError, enumerate_spanning_trees, exact_mixing,
                               expected_visits, is_spanning_tree, l1_to_stationary, lazy_chain, mh_chain,
                               mixing_threshold, naive_walk, simple_chain, spanning_tree_count, spectral_gap,
                               stationary, transition_matrix, tv_distance, walk_distribution)

GRID4 = generate("grid", 16)


def chord4():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])


def test_walk_distribution_small_cases():
    g = generate("path", 5)
    assert walk_distribution(g, 2, 0).probs.tolist() == [0, 0, 1, 0, 0]
    assert walk_distribution(generate("path", 2), 0, 1).probs.tolist() == [0, 1]
    assert np.allclose(walk_distribution(generate("cycle", 4), 0, 2).probs, [0.5, 0, 0.5, 0])
    with pytest.raises(OracleError):
        walk_distribution(g, 0, -1)


@pytest.mark.parametrize("key", ["path5/0/4", "cycle8/0/12", "star9/0/20", "grid4x4/0/12", "complete6/0/20",
                                 "cycle8/3/3", "complete5/0/4", "path4/0/1000000"])
def test_walk_distribution_matches_frozen(frozen, key):
    name, s, t = key.split("/")
    kinds = {"path5": ("path", 5), "cycle8": ("cycle", 8), "star9": ("star", 9), "grid4x4": ("grid", 16),
             "complete6": ("complete", 6), "complete5": ("complete", 5), "path4": ("path", 4)}
    g = generate(*kinds[name])
    got = walk_distribution(g, int(s), int(t)).probs
    assert np.max(np.abs(got - np.array(frozen["rows"][key]))) < 1e-9


def test_mh_matrix_matches_frozen(frozen):
    chain = mh_chain(generate("complete", 4), [0.4, 0.3, 0.2, 0.1], 0.5)
    got = walk_distribution(generate("complete", 4), 0, 10, chain).probs
    assert np.max(np.abs(got - frozen["rows"]["mh/complete4/0/10"])) < 1e-12
    cyc = mh_chain(generate("cycle", 6), [2] * 6, 0.5)
    assert np.allclose(cyc.transition[0], frozen["rows"]["mh/cycle6/0/1"])
    assert np.allclose(cyc.transition[0], [0.5, 0.25, 0, 0, 0, 0.25])


def test_one_step_row_exact():
    g = generate("grid", 9)
    for s in range(9):
        row = walk_distribution(g, s, 1).probs
        for v in range(9):
            assert row[v] == (1 / g.degree(s) if g.has_edge(s, v) else 0.0)


def test_naive_walk_examples():
    g = generate("star", 6)
    assert naive_walk(g, 0, 0, seed=1) == [0]
    path = naive_walk(g, 0, 2, seed=5)
    assert path[0] == 0 and path[2] == 0 and path[1] != 0
    assert naive_walk(g, 0, 20, seed=4) == naive_walk(g, 0, 20, seed=4)


def test_naive_walk_sampling_self_consistency():
    g = generate("cycle", 8)
    t = 10 ** 4
    ends = np.bincount([naive_walk(g, 0, t, seed=i)[-1] for i in range(600)], minlength=8) / 600
    exact = walk_distribution(g, 0, t).probs
    # 600 samples over 4 live cells: generous slack; the 10^4-sample version lives in the slow suite
    assert tv_distance(ends, exact) < 0.08


def test_stationary_examples(frozen):
    assert np.allclose(stationary(generate("complete", 4)).probs, 0.25)
    assert np.allclose(stationary(generate("star", 5)).probs, [0.5] + [0.125] * 4)
    assert np.allclose(stationary(generate("grid", 9)).probs, frozen["misc"]["grid3x3_stationary"])


@pytest.mark.parametrize("g", [generate("grid", 16), generate("star", 7), chord4(), generate("cycle", 9)])
def test_stationary_fixed_point(g):
    pi = stationary(g).probs
    assert np.abs(transition_matrix(g).T @ pi - pi).sum() <= 1e-10


def test_exact_mixing_frozen(frozen):
    from stitchwalk.apps.mixing import default_delta

    for name, (kind, n) in {"complete16": ("complete", 16), "cycle9": ("cycle", 9), "complete4": ("complete", 4),
                            "cycle5": ("cycle", 5)}.items():
        g = generate(kind, n)
        assert exact_mixing(g, 0, mixing_threshold()) == frozen["mixing"][name]["tau_mix"]
        assert exact_mixing(g, 0, default_delta(n)) == frozen["mixing"][name]["tau_delta"]


def test_exact_mixing_edges():
    k4 = generate("complete", 4)
    assert exact_mixing(k4, 0, 2) == 0
    assert exact_mixing(k4, 1, 1 / (2 * math.e)) == exact_mixing(k4, 2, 1 / (2 * math.e))
    with pytest.raises(OracleError, match="bipartite"):
        exact_mixing(generate("cycle", 8), 0, 0.1)
    g = generate("cycle", 5)
    taus = [exact_mixing(g, 0, d) for d in np.linspace(0.01, 1.9, 25)]
    assert all(a >= b for a, b in zip(taus, taus[1:]))


def test_spanning_tree_counts(frozen):
    assert spanning_tree_count(generate("path", 5)) == 1
    assert spanning_tree_count(generate("cycle", 4)) == 4
    assert spanning_tree_count(generate("complete", 4)) == 16
    graphs = {"chord4": chord4(), "grid3x3": generate("grid", 9), "grid4x4": GRID4,
              "complete6": generate("complete", 6), "cycle8": generate("cycle", 8), "star9": generate("star", 9)}
    for name, g in graphs.items():
        assert spanning_tree_count(g) == frozen["tree_counts"][name]
    with pytest.raises(OracleError):
        spanning_tree_count(generate("path", 80))


def test_enumerate_trees_agrees_with_count():
    for g in (generate("cycle", 4), generate("complete", 4), chord4()):
        trees = enumerate_spanning_trees(g)
        assert len(trees) == spanning_tree_count(g)
        assert all(is_spanning_tree(g.n, t) for t in trees)
    assert not is_spanning_tree(3, [(0, 1), (1, 0)])


def test_chain_constants():
    g = generate("grid", 9)
    assert simple_chain(g).c == 1 / (2 * g.m)
    Q = lazy_chain(g)
    assert np.allclose(np.diag(Q.transition), 0.5)
    with pytest.raises(OracleError):
        ChainSpec(np.array([[0.5, 0.4], [0.5, 0.5]]), 0.1)
    with pytest.raises(OracleError):
        Distribution(np.array([0.5, 0.6]))


def test_spectral_gap_frozen(frozen):
    assert abs(spectral_gap(generate("complete", 16)) - frozen["misc"]["complete16_gap"]) < 1e-9


def test_distribution_csv(tmp_path):
    d = stationary(generate("star", 4))
    d.to_csv(str(tmp_path / "d.csv"))
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "node,prob" and len(lines) == 5


def test_expected_visits_matches_sampling():
    g = generate("cycle", 5)
    E = expected_visits(lazy_chain(g), 6)
    assert np.allclose(E.sum(axis=1), 7)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 12), st.integers(0, 40), st.data())
def test_l1_monotone_property(n, t, data):
    kind = data.draw(st.sampled_from(["cycle", "complete", "star", "path"]))
    g = generate(kind, n)
    x = data.draw(st.integers(0, n - 1))
    d = l1_to_stationary(g, x, t + 1)
    assert np.all(np.diff(d) <= 1e-10)
