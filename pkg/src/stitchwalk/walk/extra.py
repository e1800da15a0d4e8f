"""Destination-to-source delivery, the Metropolis-Hastings walk, and topology collection for very long walks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..congest.engine import Network, Protocol, RoundStats, SimConfig
from ..congest.messages import Kind
from ..congest.trees import Upcast
from ..graph import Graph
from .core import WalkOutcome, _fallback, _walks, many_random_walks
from .kernels import MHKernel, SimpleKernel
from .params import ParamError, WalkParams
from .protocols import walk_state


@dataclass
class SodResult:
    """``delivered[i]`` is the destination that source ``sources[i]`` learned for walk ``i``."""

    sources: list[int]
    delivered: list[int]
    dest_degree: list[int]
    outcomes: list[WalkOutcome]
    stats: RoundStats
    sod_rounds: int = 0
    root: int = 0
    tree: object = field(default=None, repr=False)


def deliver_to_sources(net: Network, outcomes: Sequence[WalkOutcome], root: int) -> tuple[list, list, int, Upcast]:
    """Upcast every (source, slot, destination, degree) record to ``root`` and downcast it to its source.

    When every source is the root itself the downcast is skipped and records
    drop the slot: the root only needs the multiset of (destination, degree),
    returned in arrival order.
    """
    downcast = any(o.source != root for o in outcomes)
    items: dict[int, list] = {}
    for i, o in enumerate(outcomes):
        d = o.destination
        rec = (o.source, i, d, len(net.adj[d])) if downcast else (d, len(net.adj[d]), 0, 0)
        items.setdefault(d, []).append(rec)
    up = Upcast(net.n, root, items, downcast=downcast, keep=lambda node, item: item[0] == node)
    used = net.run(up, "sod")
    if not downcast:
        return [r[0] for r in up.collected], [r[1] for r in up.collected], used, up
    dest = [-1] * len(outcomes)
    deg = [0] * len(outcomes)
    for node, records in enumerate(up.delivered):
        for s, i, d, dd in records:
            if s == node:
                dest[i], deg[i] = d, dd
    return dest, deg, used, up


def k_rw_sod(g: Graph, sources: Sequence[int], p: WalkParams, cfg: SimConfig | None = None, *,
             root: int = 0, trace: bool = False) -> SodResult:
    """Many walks, then every source learns its walk's destination through a BFS tree at ``root``."""
    if not 0 <= root < g.n:
        raise ParamError(f"root {root} out of range")
    net = Network(g, cfg or SimConfig())
    outs = many_random_walks(g, sources, p, net=net, trace=trace)
    dest, deg, used, up = deliver_to_sources(net, outs, root)
    return SodResult(list(sources), dest, deg, outs, net.stats, used, root, up)


class NeighbourInfo(Protocol):
    """One round in which every node tells its neighbours its degree."""

    def __init__(self, n: int):
        self.nbr_degree: list[dict[int, int]] = [{} for _ in range(n)]

    def start(self, net):
        for v in range(net.n):
            for u in net.adj[v]:
                net.send(v, u, Kind.MH_INFO, (v, len(net.adj[v])))

    def on_receive(self, net, node, msgs):
        for sender, _, (_, d) in msgs:
            self.nbr_degree[node][sender] = d


def mh_random_walk(g: Graph, s: int, target, alpha: float, p: WalkParams, cfg: SimConfig | None = None, *,
                   trace: bool = False) -> WalkOutcome:
    """Walk of length ``p.ell`` under the Metropolis-Hastings chain with stationary law ``target``.

    Weights are normalized here. Each node first learns its neighbours' degrees
    (one round); the target weights themselves are treated as known input.
    """
    kernel = MHKernel(g, target, alpha)
    net = Network(g, cfg or SimConfig())
    info = NeighbourInfo(g.n)
    net.run(info, "mh_info")
    for v in range(g.n):
        assert sorted(info.nbr_degree[v]) == list(g.adjacency[v])
    out = _walks(g, [s], p, None, many=False, trace=trace, kernel=kernel, net=net)[0]
    out.mode = "mh-" + out.mode
    return out


def fallback_collect(g: Graph, s: int, ell: int, cfg: SimConfig | None = None, *, trace: bool = False,
                     kernel=None) -> WalkOutcome:
    """Collect all edges at ``s``, walk locally, and notify the destination; used when ell exceeds m^2."""
    net = Network(g, cfg or SimConfig())
    if ell == 0:
        return _walks(g, [s], WalkParams(0), None, many=False, trace=trace, net=net)[0]
    ws = walk_state(net, trace)
    kernel = kernel or SimpleKernel(g)
    ids = ws.new_walks(1)
    ends, tree, paths = _fallback(net, ws, kernel, [s], ids, ell, trace)
    return WalkOutcome(s, ell, ends[0], "fallback", net.stats, ids[0], traced=trace, _net=net, _ws=ws,
                       _fallback=(tree, paths[0] if paths else None))
