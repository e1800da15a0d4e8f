"""Recompute reference values without the package and freeze them into tests/data/frozen_oracles.json.

Graphs are built with networkx, walk laws use exact fractions, and mixing
thresholds are compared at 60 significant digits with mpmath. The package's
own oracle module is deliberately not imported here.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction

import mpmath
import networkx as nx
import numpy as np

mpmath.mp.dps = 60
OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "data", "frozen_oracles.json")


def relabel(G):
    return nx.convert_node_labels_to_integers(G, ordering="sorted")


GRAPHS = {
    "path5": nx.path_graph(5),
    "path4": nx.path_graph(4),
    "cycle4": nx.cycle_graph(4),
    "cycle5": nx.cycle_graph(5),
    "cycle6": nx.cycle_graph(6),
    "cycle8": nx.cycle_graph(8),
    "cycle9": nx.cycle_graph(9),
    "star5": nx.star_graph(4),
    "star9": nx.star_graph(8),
    "grid3x3": relabel(nx.grid_2d_graph(3, 3)),
    "grid4x4": relabel(nx.grid_2d_graph(4, 4)),
    "complete4": nx.complete_graph(4),
    "complete5": nx.complete_graph(5),
    "complete6": nx.complete_graph(6),
    "complete16": nx.complete_graph(16),
    "chord4": nx.Graph([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
}


def exact_matrix(G, weights=None, alpha=None):
    n = G.number_of_nodes()
    P = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        nb = sorted(G[i])
        if weights is None:
            for j in nb:
                P[i][j] = Fraction(1, len(nb))
        else:
            for j in nb:
                P[i][j] = alpha * min(Fraction(1, len(nb)), weights[j] / (weights[i] * len(G[j])))
            P[i][i] = 1 - sum(P[i])
    return P


def row_power(P, s, t):
    n = len(P)
    row = [Fraction(0)] * n
    row[s] = Fraction(1)
    for _ in range(t):
        row = [sum(row[i] * P[i][j] for i in range(n) if row[i]) for j in range(n)]
    return row


def mixing(G, x, delta):
    n = G.number_of_nodes()
    m = G.number_of_edges()
    P = exact_matrix(G)
    pi = [Fraction(G.degree(v), 2 * m) for v in range(n)]
    row = [Fraction(0)] * n
    row[x] = Fraction(1)
    t = 0
    while True:
        l1 = sum(abs(a - b) for a, b in zip(row, pi))
        if mpmath.mpf(l1.numerator) / l1.denominator < delta:
            return t
        row = [sum(row[i] * P[i][j] for i in range(n) if row[i]) for j in range(n)]
        t += 1


def floats(row):
    return [float(x) for x in row]


def main():
    out: dict = {"rows": {}, "tree_counts": {}, "mixing": {}, "misc": {}}
    for name in ("path5", "cycle8", "star9", "grid4x4", "complete6"):
        P = exact_matrix(GRAPHS[name])
        for t in (4, 12, 20):
            out["rows"][f"{name}/0/{t}"] = floats(row_power(P, 0, t))
    P8 = exact_matrix(GRAPHS["cycle8"])
    for s in range(8):
        for t in (2, 3):
            out["rows"][f"cycle8/{s}/{t}"] = floats(row_power(P8, s, t))
    out["rows"]["cycle8/0/8"] = floats(row_power(P8, 0, 8))
    out["rows"]["complete5/0/4"] = floats(row_power(exact_matrix(GRAPHS["complete5"]), 0, 4))
    out["rows"]["complete5/3/4"] = floats(row_power(exact_matrix(GRAPHS["complete5"]), 3, 4))
    out["rows"]["cycle4/0/2"] = floats(row_power(exact_matrix(GRAPHS["cycle4"]), 0, 2))
    # very long walk on a path: spectral decomposition of the symmetrized matrix, float64
    G = GRAPHS["path4"]
    A = nx.to_numpy_array(G, nodelist=range(4))
    d = A.sum(axis=1)
    S = A / np.sqrt(np.outer(d, d))
    w, V = np.linalg.eigh(S)
    t = 10 ** 6
    Pt = np.diag(d ** -0.5) @ V @ np.diag(w ** t) @ V.T @ np.diag(d ** 0.5)
    out["rows"]["path4/0/1000000"] = [float(x) for x in np.clip(Pt[0], 0, None)]
    wts = [Fraction(4, 10), Fraction(3, 10), Fraction(2, 10), Fraction(1, 10)]
    Pm = exact_matrix(GRAPHS["complete4"], wts, Fraction(1, 2))
    out["rows"]["mh/complete4/0/10"] = floats(row_power(Pm, 0, 10))
    degs = [Fraction(2)] * 6
    out["rows"]["mh/cycle6/0/1"] = floats(row_power(exact_matrix(GRAPHS["cycle6"], degs, Fraction(1, 2)), 0, 1))
    Ps = exact_matrix(GRAPHS["star5"], [Fraction(1)] * 5, Fraction(1, 2))
    # stationary vector of the MH chain on the star: solve pi P = pi exactly
    M = stationary_by_balance(Ps)
    out["misc"]["mh_star5_stationary"] = floats(M)
    for name in ("cycle4", "complete4", "chord4", "path5", "star9", "grid3x3", "grid4x4", "cycle8", "complete6"):
        out["tree_counts"][name] = int(round(nx.number_of_spanning_trees(GRAPHS[name])))
    e = mpmath.e
    for name, n in (("complete16", 16), ("cycle9", 9), ("complete4", 4), ("cycle5", 5)):
        L = max(1, int(mpmath.ceil(mpmath.log(n, 2))))
        delta = 1 / (6912 * e * mpmath.sqrt(n) * L)
        out["mixing"][name] = {"tau_mix": mixing(GRAPHS[name], 0, 1 / (2 * e)),
                               "tau_delta": mixing(GRAPHS[name], 0, delta)}
    grid = GRAPHS["grid3x3"]
    out["misc"]["grid3x3_stationary"] = [grid.degree(v) / (2 * grid.number_of_edges()) for v in range(9)]
    Lap = nx.normalized_laplacian_matrix(GRAPHS["complete16"]).toarray()
    out["misc"]["complete16_gap"] = float(np.sort(np.linalg.eigvalsh(Lap))[1])
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as fh:
        json.dump(out, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print("wrote", os.path.normpath(OUT))


def stationary_by_balance(P):
    """Power iteration in exact arithmetic would not terminate; use detailed balance along a spanning tree."""
    n = len(P)
    pi = [None] * n
    pi[0] = Fraction(1)
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(n):
            if j != i and P[i][j] and pi[j] is None:
                pi[j] = pi[i] * P[i][j] / P[j][i]
                frontier.append(j)
    z = sum(pi)
    return [p / z for p in pi]


if __name__ == "__main__":
    main()
