"""Centralized exact references: walk distributions, stationary laws, mixing times, spanning-tree counts.

Nothing here touches the round engine. Everything is computed from the full
graph in float64 (or exact integers for tree counts) and is meant for checking
the distributed protocols.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import Graph, GraphError

MASS_TOL = 1e-10


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class Distribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or np.any(p < -MASS_TOL) or abs(p.sum() - 1.0) > MASS_TOL:
            raise OracleError("not a probability vector")
        object.__setattr__(self, "probs", p)

    def __getitem__(self, v: int) -> float:
        return float(self.probs[v])

    def __len__(self) -> int:
        return len(self.probs)

    def l1(self, other: "Distribution | np.ndarray") -> float:
        q = other.probs if isinstance(other, Distribution) else np.asarray(other, dtype=float)
        return float(np.abs(self.probs - q).sum())

    def tv(self, other: "Distribution | np.ndarray") -> float:
        return 0.5 * self.l1(other)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "prob"])
            for v, p in enumerate(self.probs):
                w.writerow([v, repr(float(p))])


@dataclass(frozen=True)
class ChainSpec:
    """A row-stochastic transition matrix and c = min pi(x) Q(x, y) over moving pairs."""

    transition: np.ndarray
    c: float

    def __post_init__(self):
        T = np.asarray(self.transition, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise OracleError("transition must be square")
        if np.any(T < -MASS_TOL) or np.max(np.abs(T.sum(axis=1) - 1.0)) > MASS_TOL:
            raise OracleError("transition rows must sum to 1")
        object.__setattr__(self, "transition", T)

    @property
    def n(self) -> int:
        return self.transition.shape[0]


def transition_matrix(g: Graph) -> np.ndarray:
    P = np.zeros((g.n, g.n))
    for v, a in enumerate(g.adjacency):
        P[v, list(a)] = 1.0 / len(a)
    return P


def mh_matrix(g: Graph, weights, alpha: float) -> np.ndarray:
    """Metropolis-Hastings chain: alpha * min(1/d_i, pi_j / (pi_i d_j)) per edge, remainder on the diagonal."""
    pi = np.asarray(weights, dtype=float)
    if pi.shape != (g.n,) or np.any(pi <= 0):
        raise OracleError("weights must be n positive numbers")
    pi = pi / pi.sum()
    P = np.zeros((g.n, g.n))
    for i, a in enumerate(g.adjacency):
        for j in a:
            P[i, j] = alpha * min(1.0 / len(a), pi[j] / (pi[i] * len(g.adjacency[j])))
        P[i, i] = 1.0 - P[i].sum()
    return P


def _min_flow(P: np.ndarray, pi: np.ndarray) -> float:
    mask = (P > 0) & ~np.eye(len(pi), dtype=bool)
    return float((pi[:, None] * P)[mask].min()) if mask.any() else 0.0


def simple_chain(g: Graph) -> ChainSpec:
    return ChainSpec(transition_matrix(g), 1.0 / (2 * g.m))


def lazy_chain(g: Graph) -> ChainSpec:
    """Q = (I + P) / 2 for the simple walk; here c = 1/(4m)."""
    P = 0.5 * (np.eye(g.n) + transition_matrix(g))
    return ChainSpec(P, 1.0 / (4 * g.m))


def mh_chain(g: Graph, weights, alpha: float) -> ChainSpec:
    P = mh_matrix(g, weights, alpha)
    pi = np.asarray(weights, dtype=float) / np.sum(weights)
    return ChainSpec(P, _min_flow(P, pi))


def matrix_power(P: np.ndarray, t: int) -> np.ndarray:
    if t < 0:
        raise OracleError("t must be >= 0")
    return np.linalg.matrix_power(P, t)


def walk_distribution(g: Graph, s: int, t: int, chain: ChainSpec | None = None) -> Distribution:
    """Exact t-step law from ``s``; iterated row-vector products for small t, squaring otherwise."""
    if t < 0:
        raise OracleError("t must be >= 0")
    P = (chain or simple_chain(g)).transition
    if t > 4 * P.shape[0]:
        row = matrix_power(P, t)[s]
    else:
        row = np.zeros(P.shape[0])
        row[s] = 1.0
        for _ in range(t):
            row = row @ P
    row = np.clip(row, 0.0, None)
    return Distribution(row / row.sum())


def distribution_trajectory(g: Graph, s: int, t_max: int, chain: ChainSpec | None = None) -> np.ndarray:
    """Rows 0..t_max of the law of the walk from ``s``."""
    P = (chain or simple_chain(g)).transition
    out = np.zeros((t_max + 1, P.shape[0]))
    out[0, s] = 1.0
    for t in range(t_max):
        out[t + 1] = out[t] @ P
    return out


def naive_walk(g: Graph, s: int, t: int, seed: int | None = None) -> list[int]:
    """A sequential simple random walk of ``t`` steps; the trajectory has t + 1 entries."""
    if t < 0:
        raise OracleError("t must be >= 0")
    rng = random.Random(seed)
    path = [s]
    for _ in range(t):
        a = g.adjacency[path[-1]]
        path.append(a[int(rng.random() * len(a))])
    return path


def stationary(g: Graph) -> Distribution:
    deg = np.array(g.degrees(), dtype=float)
    return Distribution(deg / (2 * g.m))


def stationary_exact(g: Graph) -> list[Fraction]:
    return [Fraction(d, 2 * g.m) for d in g.degrees()]


def l1_to_stationary(g: Graph, x: int, t_max: int) -> np.ndarray:
    """||pi_x(t) - pi||_1 for t = 0..t_max."""
    pi = stationary(g).probs
    traj = distribution_trajectory(g, x, t_max)
    return np.abs(traj - pi).sum(axis=1)


def exact_mixing(g: Graph, x: int, delta: float, t_cap: int = 1_000_000) -> int:
    """Smallest t with ||pi_x(t) - pi||_1 < delta, by direct search."""
    if g.is_bipartite():
        raise OracleError("mixing time undefined on a bipartite graph")
    if not 0 < delta <= 2:
        raise OracleError("delta must lie in (0, 2]")
    pi = stationary(g).probs
    P = transition_matrix(g)
    row = np.zeros(g.n)
    row[x] = 1.0
    for t in range(t_cap + 1):
        if np.abs(row - pi).sum() < delta:
            return t
        row = row @ P
    raise OracleError(f"no t <= {t_cap} reaches delta={delta}")


def mixing_threshold() -> float:
    """The standard mixing threshold 1/(2e)."""
    return 1.0 / (2.0 * math.e)


def spectral_gap(g: Graph) -> float:
    """1 - lambda_2 of the simple-walk matrix, via the symmetric normalization."""
    deg = np.array(g.degrees(), dtype=float)
    A = np.zeros((g.n, g.n))
    for u, v in g.edges():
        A[u, v] = A[v, u] = 1.0
    d = 1.0 / np.sqrt(deg)
    eig = np.sort(np.linalg.eigvalsh(d[:, None] * A * d[None, :]))[::-1]
    return float(1.0 - eig[1])


def expected_visits(chain: ChainSpec, t: int) -> np.ndarray:
    """sum_{i=0..t} Q^i, entrywise: expected visits to y within t steps from x."""
    Q = chain.transition
    acc = np.eye(chain.n)
    cur = np.eye(chain.n)
    for _ in range(t):
        cur = cur @ Q
        acc += cur
    return acc


def _bareiss_det(M: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination; exact for integer matrices."""
    M = [row[:] for row in M]
    k = len(M)
    if k == 0:
        return 1
    sign, prev = 1, 1
    for i in range(k - 1):
        if M[i][i] == 0:
            swap = next((r for r in range(i + 1, k) if M[r][i] != 0), None)
            if swap is None:
                return 0
            M[i], M[swap] = M[swap], M[i]
            sign = -sign
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                M[r][c] = (M[r][c] * M[i][i] - M[r][i] * M[i][c]) // prev
        prev = M[i][i]
    return sign * M[k - 1][k - 1]


def spanning_tree_count(g: Graph, max_n: int = 64) -> int:
    """Labeled spanning trees via a Laplacian cofactor (matrix-tree theorem), in exact integers."""
    if g.n > max_n:
        raise OracleError(f"n={g.n} exceeds the exact-count guard of {max_n}")
    if g.n == 1:
        return 1
    L = [[0] * g.n for _ in range(g.n)]
    for u, v in g.edges():
        L[u][v] -= 1
        L[v][u] -= 1
        L[u][u] += 1
        L[v][v] += 1
    return _bareiss_det([row[1:] for row in L[1:]])


def enumerate_spanning_trees(g: Graph, limit: int = 10_000) -> list[frozenset]:
    """All spanning trees as frozensets of (u, v) edges with u < v; for small verification graphs."""
    from itertools import combinations

    edges = g.edges()
    out = []
    for combo in combinations(edges, g.n - 1):
        if is_spanning_tree(g.n, combo):
            out.append(frozenset(combo))
            if len(out) > limit:
                raise OracleError("too many spanning trees to enumerate")
    return out


def is_spanning_tree(n: int, edges) -> bool:
    edges = list(edges)
    if len(edges) != n - 1:
        return False
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def tv_distance(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())


def empirical(samples, n: int) -> np.ndarray:
    counts = np.bincount(np.asarray(samples, dtype=int), minlength=n).astype(float)
    return counts / max(1, counts.sum())


__all__ = ["ChainSpec", "Distribution", "GraphError", "OracleError", "distribution_trajectory", "empirical",
           "enumerate_spanning_trees", "exact_mixing", "expected_visits", "is_spanning_tree", "l1_to_stationary",
           "lazy_chain", "matrix_power", "mh_chain", "mh_matrix", "mixing_threshold", "naive_walk", "simple_chain",
           "spanning_tree_count", "spectral_gap", "stationary", "stationary_exact", "transition_matrix",
           "tv_distance", "walk_distribution"]
