"""Uniform random spanning trees from first-visit edges of a covering walk."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..congest.engine import Network, Protocol, RoundStats, SimConfig
from ..congest.messages import Kind
from ..congest.trees import and_combine, convergecast
from ..graph import Graph
from ..walk.core import WalkOutcome, many_random_walks, regenerate_walks
from ..walk.params import WalkParams, log2c


class TreeError(ValueError):
    pass


@dataclass
class SpanningTree:
    """``parent[v]`` is the first-visit predecessor of ``v``; the root has none."""

    root: int
    parent: list[int | None]
    ell_final: int = 0
    phases: int = 0
    stats: RoundStats | None = field(default=None, repr=False, compare=False)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset((min(v, p), max(v, p)) for v, p in enumerate(self.parent) if p is not None)

    def to_edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def to_json(self) -> str:
        return json.dumps({"root": self.root, "edges": self.to_edge_list(), "ell_final": self.ell_final,
                           "phases": self.phases}, sort_keys=True)

    def validate(self, g: Graph) -> None:
        n = len(self.parent)
        if self.parent[self.root] is not None:
            raise TreeError("root has a parent")
        for v, p in enumerate(self.parent):
            if v != self.root and (p is None or not g.has_edge(v, p)):
                raise TreeError(f"node {v} lacks a graph edge to its parent")
        for v in range(n):
            seen, u = set(), v
            while u != self.root:
                if u in seen:
                    raise TreeError("parent pointers contain a cycle")
                seen.add(u)
                u = self.parent[u]
        if len(self.edges) != n - 1:
            raise TreeError("wrong edge count")


def check_cover(net: Network, visited: list[bool], root: int = 0) -> tuple[bool, int]:
    """AND-convergecast of per-node "visited" flags over a fresh BFS tree; returns (covered, rounds)."""
    before = net.round
    (ok, _), _ = convergecast(net, root, lambda v: (int(bool(visited[v])), 1), and_combine, "cover_check")
    return bool(ok), net.round - before


def check_cover_positions(g: Graph, positions: dict[int, list[int]], cfg: SimConfig | None = None,
                          root: int = 0) -> tuple[bool, RoundStats]:
    """Standalone cover check over a positions map (node -> list of positions)."""
    net = Network(g, cfg or SimConfig())
    ok, _ = check_cover(net, [bool(positions.get(v)) for v in range(g.n)], root)
    return ok, net.stats


class FirstVisitMark(Protocol):
    """Each non-root node tells the predecessor of its first visit that the edge joins the tree."""

    def __init__(self, firsts: list[tuple[int, int | None] | None], root: int):
        self.firsts = firsts
        self.root = root
        self.confirmed: list[list[int]] = [[] for _ in firsts]

    def start(self, net):
        for v, first in enumerate(self.firsts):
            if v != self.root and first is not None:
                pos, pred = first
                net.send(v, pred, Kind.COVER_MARK, (v, pos))

    def on_receive(self, net, node, msgs):
        for sender, _, _ in msgs:
            self.confirmed[node].append(sender)


def _first_visits(visits, offset: int, firsts: list, n: int) -> None:
    for v in range(n):
        for pos, pred in visits[v]:
            if pred is None:
                continue
            g_pos = offset + pos
            if firsts[v] is None or g_pos < firsts[v][0]:
                firsts[v] = (g_pos, pred)


def random_spanning_tree(g: Graph, root: int = 0, cfg: SimConfig | None = None, *,
                         strategy: str = "extend", lam: int | None = None) -> SpanningTree:
    """Aldous-Broder on top of distributed walks, doubling the walk length until it covers.

    ``strategy="extend"`` keeps one walk: each phase appends a segment from the
    current endpoint so the total length doubles (n, 2n, 4n, ...). Nodes learn
    their positions by regeneration and the cover flag is checked by convergecast.
    ``strategy="restart"`` instead runs ceil(log2 n) fresh walks per phase and
    keeps the first covering one; that selection favours fast-covering walks
    and biases the tree law, so it is kept for comparison only.
    """
    if strategy not in ("extend", "restart"):
        raise ValueError(f"unknown strategy {strategy!r}")
    net = Network(g, cfg or SimConfig())
    n = g.n
    if n == 1:
        return SpanningTree(root, [None], 0, 0, net.stats)
    firsts: list[tuple[int, int | None] | None] = [None] * n
    firsts[root] = (0, None)
    phases = 0
    if strategy == "extend":
        ell, start, seg = 0, root, n
        while True:
            phases += 1
            out = many_random_walks(g, [start], WalkParams(seg, _lam(lam, seg)), net=net, trace=True)[0]
            regenerate_walks([out])
            _first_visits(out.visits, ell, firsts, n)
            ell += seg
            ok, _ = check_cover(net, [f is not None for f in firsts], root)
            if ok:
                break
            start, seg = out.destination, ell
    else:
        ell = n
        while True:
            phases += 1
            outs = many_random_walks(g, [root] * log2c(n), WalkParams(ell, _lam(lam, ell)), net=net, trace=True)
            regenerate_walks(outs)
            chosen = None
            for o in outs:
                visited = [bool(vs) for vs in o.visits]
                ok, _ = check_cover(net, visited, root)
                if ok:
                    chosen = o
                    break
            if chosen is not None:
                _first_visits(chosen.visits, 0, firsts, n)
                break
            ell *= 2
    mark = FirstVisitMark(firsts, root)
    net.run(mark, "first_visit")
    parent: list[int | None] = [None] * n
    for u, kids in enumerate(mark.confirmed):
        for v in kids:
            parent[v] = u
    return SpanningTree(root, parent, ell, phases, net.stats)


def _lam(lam: int | None, ell: int) -> int | None:
    return None if lam is None else min(lam, ell)


def cover_time_samples(g: Graph, root: int, trials: int, seed: int = 0) -> list[int]:
    """Sequential cover times of the simple walk, for sizing the doubling schedule."""
    import random

    rng = random.Random(seed)
    out = []
    for _ in range(trials):
        seen, v, t = {root}, root, 0
        while len(seen) < g.n:
            a = g.adjacency[v]
            v = a[int(rng.random() * len(a))]
            seen.add(v)
            t += 1
        out.append(t)
    return out


__all__ = ["SpanningTree", "TreeError", "check_cover", "check_cover_positions", "cover_time_samples",
           "random_spanning_tree"]
