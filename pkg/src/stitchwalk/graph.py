"""Undirected simple connected graphs: ingestion, generators, BFS queries."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

RETRY_BUDGET = 100


class GraphError(ValueError):
    """Malformed, disconnected, or otherwise unusable graph input."""


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    _nbr_sets: tuple[frozenset, ...] = field(repr=False, compare=False, default=())

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], *, require_connected: bool = True) -> "Graph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if v in adj[u]:
                raise GraphError(f"duplicate edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
        g = cls(n, tuple(tuple(sorted(a)) for a in adj), tuple(frozenset(a) for a in adj))
        if require_connected:
            g._check_connected()
        return g

    def __post_init__(self):
        if not self._nbr_sets:
            object.__setattr__(self, "_nbr_sets", tuple(frozenset(a) for a in self.adjacency))

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def is_bipartite(self) -> bool:
        color = [-1] * self.n
        for s in range(self.n):
            if color[s] >= 0:
                continue
            color[s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self.adjacency[u]:
                    if color[w] < 0:
                        color[w] = 1 - color[u]
                        queue.append(w)
                    elif color[w] == color[u]:
                        return False
        return True

    def _check_connected(self) -> None:
        dist = bfs_distances(self, 0)
        for v, d in enumerate(dist):
            if d < 0:
                raise GraphError(f"graph is disconnected: nodes 0 and {v} are unreachable from each other")

    def to_edge_list(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges())


@dataclass(frozen=True)
class BfsTree:
    root: int
    parent: tuple[int | None, ...]
    level: tuple[int, ...]

    @property
    def depth(self) -> int:
        return max(self.level)

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(v)
        return kids


def load_graph(source: str) -> Graph:
    """Parse edge-list text: one ``u v`` pair per line, ``#`` starts a comment.

    Node count is one more than the largest ID seen.
    """
    edges = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two node IDs, got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer node ID in {raw!r}") from None
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: negative node ID in {raw!r}")
        edges.append((u, v))
    if not edges:
        raise GraphError("edge list is empty")
    n = 1 + max(max(e) for e in edges)
    return Graph.from_edges(n, edges)


def read_graph(path: str) -> Graph:
    with open(path) as fh:
        return load_graph(fh.read())


def _grid_shape(n: int, rows: int | None) -> tuple[int, int]:
    if rows is None:
        side = math.isqrt(n)
        if side * side != n:
            raise GraphError(f"grid needs a square node count or explicit rows, got n={n}")
        return side, side
    if n % rows:
        raise GraphError(f"grid rows={rows} does not divide n={n}")
    return rows, n // rows


def generate(kind: str, n: int, seed: int = 0, *, p: float | None = None, r: float | None = None,
             rows: int | None = None) -> Graph:
    """Build a graph family member. Random families resample until connected."""
    if n < 2:
        raise GraphError("need n >= 2")
    if kind == "path":
        return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    if kind == "cycle":
        if n < 3:
            raise GraphError("cycle needs n >= 3")
        return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "star":
        return Graph.from_edges(n, [(0, i) for i in range(1, n)])
    if kind == "complete":
        return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    if kind == "grid":
        h, w = _grid_shape(n, rows)
        edges = []
        for i in range(h):
            for j in range(w):
                v = i * w + j
                if j + 1 < w:
                    edges.append((v, v + 1))
                if i + 1 < h:
                    edges.append((v, v + w))
        return Graph.from_edges(n, edges)
    if kind in ("erdos_renyi", "random_geometric"):
        rng = np.random.default_rng(seed)
        for _ in range(RETRY_BUDGET):
            if kind == "erdos_renyi":
                if p is None or not 0 < p <= 1:
                    raise GraphError("erdos_renyi needs 0 < p <= 1")
                iu, ju = np.triu_indices(n, k=1)
                keep = rng.random(iu.size) < p
                edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
            else:
                if r is None or r <= 0:
                    raise GraphError("random_geometric needs r > 0")
                pts = rng.random((n, 2))
                d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
                iu, ju = np.triu_indices(n, k=1)
                keep = d2[iu, ju] <= r * r
                edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
            g = Graph.from_edges(n, edges, require_connected=False)
            if all(d >= 0 for d in bfs_distances(g, 0)):
                return g
        raise GraphError(f"{kind}(n={n}) still disconnected after {RETRY_BUDGET} attempts")
    raise GraphError(f"unknown graph kind {kind!r}")


def parse_graph_spec(spec: str, seed: int = 0) -> Graph:
    """``kind:n[:param]`` (``grid:4x4``, ``erdos_renyi:10:0.5``) or a path to an edge-list file."""
    kind, _, rest = spec.partition(":")
    if not rest:
        return read_graph(spec)
    if kind == "file":
        return read_graph(rest)
    fields = rest.split(":")
    if kind == "grid" and "x" in fields[0]:
        h, w = (int(x) for x in fields[0].split("x"))
        return generate("grid", h * w, seed, rows=h)
    n = int(fields[0])
    if kind == "erdos_renyi":
        return generate(kind, n, seed, p=float(fields[1]))
    if kind == "random_geometric":
        return generate(kind, n, seed, r=float(fields[1]))
    return generate(kind, n, seed)


def bfs_distances(g: Graph, root: int) -> list[int]:
    dist = [-1] * g.n
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def bfs_tree(g: Graph, root: int) -> BfsTree:
    """BFS tree; a node's parent is its lowest-ID neighbour one level up."""
    if not 0 <= root < g.n:
        raise GraphError(f"root {root} out of range")
    level = bfs_distances(g, root)
    parent: list[int | None] = [None] * g.n
    for v in range(g.n):
        if v != root:
            parent[v] = min(u for u in g.adjacency[v] if level[u] == level[v] - 1)
    return BfsTree(root, tuple(parent), tuple(level))


def eccentricity(g: Graph, v: int) -> int:
    return max(bfs_distances(g, v))


def diameter(g: Graph) -> int:
    return max(eccentricity(g, v) for v in range(g.n))


def components(n: int, edges: Sequence[tuple[int, int]]) -> int:
    """Number of connected components of an edge set over ``n`` nodes (union-find)."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = n
    for u, v in edges:
        a, b = find(u), find(v)
        if a != b:
            parent[a] = b
            count -= 1
    return count
