"""Per-node transition rules. ``step`` returns the next node, possibly the same one (lazy step)."""

from __future__ import annotations

import bisect
import math
import random

import numpy as np

from ..graph import Graph


class SimpleKernel:
    def __init__(self, g: Graph):
        self.adj = g.adjacency

    def step(self, v: int, rng: random.Random) -> int:
        a = self.adj[v]
        return a[int(rng.random() * len(a))]

    def coupon_quota(self, v: int, eta: int) -> int:
        return eta * len(self.adj[v])

    def matrix(self) -> np.ndarray:
        n = len(self.adj)
        P = np.zeros((n, n))
        for v, a in enumerate(self.adj):
            P[v, list(a)] = 1.0 / len(a)
        return P


class WeightError(ValueError):
    pass


class MHKernel:
    """Metropolis-Hastings move i -> j with alpha * min(1/d_i, pi_j / (pi_i d_j)); stay otherwise."""

    def __init__(self, g: Graph, weights, alpha: float):
        w = np.asarray(weights, dtype=float)
        if w.shape != (g.n,) or np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise WeightError("target weights must be n positive finite numbers")
        if not 0 < alpha < 1:
            raise WeightError("alpha must lie in (0, 1)")
        self.adj = g.adjacency
        self.alpha = alpha
        self.pi = w / w.sum()
        deg = np.array(g.degrees(), dtype=float)
        self.min_ratio = float(np.min(self.pi / deg))
        self.probs: list[list[float]] = []
        self.cum: list[list[float]] = []
        for i, a in enumerate(self.adj):
            row = [alpha * min(1.0 / len(a), self.pi[j] / (self.pi[i] * len(self.adj[j]))) for j in a]
            self.probs.append(row)
            self.cum.append(list(np.cumsum(row)))

    def step(self, v: int, rng: random.Random) -> int:
        u = rng.random()
        cum = self.cum[v]
        i = bisect.bisect_right(cum, u)
        return self.adj[v][i] if i < len(cum) else v

    def coupon_quota(self, v: int, eta: int) -> int:
        return math.ceil(eta * self.pi[v] / (self.alpha * self.min_ratio) - 1e-9)

    def matrix(self) -> np.ndarray:
        n = len(self.adj)
        P = np.zeros((n, n))
        for i, a in enumerate(self.adj):
            P[i, list(a)] = self.probs[i]
            P[i, i] = 1.0 - sum(self.probs[i])
        return P
