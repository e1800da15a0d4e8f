"""Distributed random walks by stitching short walks, plus the naive and fallback routes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..congest.engine import Network, RoundStats, SimConfig
from ..congest.trees import Downcast, Upcast
from ..graph import Graph
from .kernels import SimpleKernel
from .params import ParamError, WalkParams
from .protocols import (Coupon, NaiveWalks, Phase1, Replay, RouteToken, SampleCoupon, SendMoreCoupons,
                        WalkState, walk_state)


class MissingTrace(RuntimeError):
    """Positions were requested for a walk that ran without tracing."""


@dataclass
class WalkOutcome:
    source: int
    ell: int
    destination: int
    mode: str
    stats: RoundStats
    walk: int = 0
    connectors: list[int] = field(default_factory=list)
    stitch_lengths: list[int] = field(default_factory=list)
    lam: int | None = None
    eta: int | None = None
    visits: list[list[tuple[int, int | None]]] | None = None
    traced: bool = False
    _net: Any = field(default=None, repr=False, compare=False)
    _segments: list = field(default_factory=list, repr=False, compare=False)
    _fallback: Any = field(default=None, repr=False, compare=False)
    _ws: Any = field(default=None, repr=False, compare=False)

    @property
    def positions(self) -> dict[int, list[int]] | None:
        if self.visits is None:
            return None
        return {v: sorted({p for p, _ in vs}) for v, vs in enumerate(self.visits) if vs}

    @property
    def visit_counts(self) -> list[int] | None:
        if self.visits is None:
            return None
        return [len({p for p, _ in vs}) for vs in self.visits]

    def sequence(self) -> list[int]:
        """The full walk as a node list, read off the regenerated positions."""
        pos = self.positions
        if pos is None:
            raise MissingTrace("walk has not been regenerated")
        seq = [-1] * (self.ell + 1)
        for v, ps in pos.items():
            for p in ps:
                seq[p] = v
        return seq

    def to_dict(self, with_positions: bool = False) -> dict[str, Any]:
        d = {"source": self.source, "ell": self.ell, "destination": self.destination, "mode": self.mode,
             "walk": self.walk, "lam": self.lam, "eta": self.eta, "connectors": self.connectors,
             "stitch_lengths": self.stitch_lengths, "stats": self.stats.summary()}
        if with_positions and self.positions is not None:
            d["positions"] = {str(k): v for k, v in self.positions.items()}
        return d

    def to_json(self, with_positions: bool = False) -> str:
        return json.dumps(self.to_dict(with_positions), sort_keys=True)


def _sample(net: Network, ws: WalkState, root: int, cache: dict | None = None) -> SampleCoupon:
    reuse = cache.get(root) if cache is not None else None
    proto = SampleCoupon(ws, net.n, root, reuse)
    net.run(proto, "sample_coupon")
    if cache is not None and reuse is None:
        cache[root] = proto
    return proto


def _send_more(net: Network, ws: WalkState, kernel, v: int, eta: int, lam: int) -> SendMoreCoupons:
    proto = SendMoreCoupons(ws, kernel, v, eta, lam)
    net.run(proto, "send_more")
    return proto


def _stitch(net: Network, ws: WalkState, kernel, w: int, s: int, ell: int, lam: int, eta: int,
            cache: dict | None = None):
    """Phase 2 for one walk: stitch coupons while completed <= ell - 2 lam, then walk the rest naively."""
    holder, completed = s, 0
    connectors, lengths, segments = [s], [], []
    while completed <= ell - 2 * lam:
        sampled = _sample(net, ws, holder, cache)
        if sampled.result is None:
            _send_more(net, ws, kernel, holder, eta, lam)
            sampled = _sample(net, ws, holder, cache)
        target, desired, _ = sampled.result
        route = RouteToken(sampled.via, holder, (s, w, completed))
        net.run(route, "token_route")
        assert route.arrived_at == target
        coupon = sampled.pick[target]
        ws.placement[target][holder].remove(coupon)
        segments.append((w, completed, target, coupon))
        completed += desired
        lengths.append(desired)
        connectors.append(target)
        holder = target
    tail = NaiveWalks(ws, kernel, [(w, s, holder, completed, ell)], ws.trace)
    net.run(tail, "naive")
    return tail.destination[w], connectors, lengths, segments


def _fallback(net: Network, ws: WalkState, kernel, sources: Sequence[int], ids: Sequence[int], ell: int,
              trace: bool):
    """Collect the topology at one node, walk locally there, then tell each destination."""
    root = sources[0]
    items = {v: [(v, u, 0, 0) for u in net.adj[v] if v < u] for v in range(net.n)}
    up = Upcast(net.n, root, items)
    net.run(up, "fallback_upcast")
    edges = {(a, b) for a, b, _, _ in up.collected}
    if edges != set(net.graph.edges()):
        raise RuntimeError("topology upcast lost edges")
    rng = net.rng(root)
    P = kernel.matrix()
    trajectories = []
    ends = []
    for s in sources:
        if trace:
            path = [s]
            for _ in range(ell):
                path.append(kernel.step(path[-1], rng))
            trajectories.append(path)
            ends.append(path[-1])
        else:
            row = np.linalg.matrix_power(P, ell)[s]
            cum = np.cumsum(row)
            ends.append(int(min(np.searchsorted(cum, rng.random() * cum[-1], side="right"), net.n - 1)))
    notes = [(d, s, w, 0) for w, s, d in zip(ids, sources, ends)]
    down = Downcast(up, notes, keep=lambda node, item: item[0] == node)
    net.run(down, "fallback_downcast")
    outputs = {}
    for node, got in enumerate(down.delivered):
        for d, s, w, _ in got:
            outputs[w] = d
    return [outputs[w] for w in ids], up, trajectories


def _walks(g: Graph, sources: Sequence[int], p: WalkParams, cfg: SimConfig | None, *, many: bool,
           trace: bool = False, kernel=None, net: Network | None = None,
           cache_tree: bool = False) -> list[WalkOutcome]:
    for s in sources:
        if not 0 <= s < g.n:
            raise ParamError(f"source {s} out of range")
    net = net or Network(g, cfg or SimConfig())
    # fresh per-call state keeps walk ids, coupon indices and SMC call numbers small
    ws = net.state["walk"] = WalkState(net.n, trace)
    kernel = kernel or SimpleKernel(g)
    ell = p.ell
    ids = ws.new_walks(len(sources))
    if ell == 0:
        outs = []
        for w, s in zip(ids, sources):
            if trace:
                ws.record(w, s, 0, None)
            outs.append(WalkOutcome(s, 0, s, "trivial", net.stats, w, [s], traced=trace, _net=net, _ws=ws))
        return outs
    if p.needs_fallback(g):
        ends, tree, paths = _fallback(net, ws, kernel, sources, ids, ell, trace)
        return [WalkOutcome(s, ell, d, "fallback", net.stats, w, traced=trace, _net=net, _ws=ws,
                            _fallback=(tree, paths[i] if paths else None))
                for i, (w, s, d) in enumerate(zip(ids, sources, ends))]
    lam, eta = p.many_defaults(g) if many else p.single_defaults(g)
    if lam > ell or ell < 2 * lam:
        tokens = []
        for w, s in zip(ids, sources):
            if trace:
                ws.record(w, s, 0, None)
            tokens.append((w, s, s, 0, ell))
        proto = NaiveWalks(ws, kernel, tokens, trace)
        net.run(proto, "naive")
        return [WalkOutcome(s, ell, proto.destination[w], "naive", net.stats, w, [s], lam=lam, eta=eta,
                            traced=trace, _net=net, _ws=ws) for w, s in zip(ids, sources)]
    net.run(Phase1(ws, kernel, lam, eta), "phase1")
    cache = {} if cache_tree else None
    outs = []
    for w, s in zip(ids, sources):
        if trace:
            ws.record(w, s, 0, None)
        dest, connectors, lengths, segments = _stitch(net, ws, kernel, w, s, ell, lam, eta, cache)
        outs.append(WalkOutcome(s, ell, dest, "stitched", net.stats, w, connectors, lengths, lam, eta,
                                traced=trace, _net=net, _ws=ws, _segments=segments))
    return outs


def single_random_walk(g: Graph, s: int, p: WalkParams, cfg: SimConfig | None = None, *,
                       trace: bool = False, kernel=None, cache_tree: bool = False) -> WalkOutcome:
    """One walk of length ``p.ell`` from ``s``; the destination outputs ``s``.

    Asymptotic defaults: lam = ceil(32 sqrt(ell D) log^3 n),
    eta = 1. When lam exceeds ell, or ell < 2 lam so that no stitch can happen,
    the token is walked naively. ``trace=True`` retains what
    :func:`regenerate_walk` needs. ``cache_tree`` reuses one BFS tree per
    sampling root instead of rebuilding it on every call (experiments only).
    """
    return _walks(g, [s], p, cfg, many=False, trace=trace, kernel=kernel, cache_tree=cache_tree)[0]


def many_random_walks(g: Graph, sources: Sequence[int], p: WalkParams, cfg: SimConfig | None = None, *,
                      trace: bool = False, kernel=None, net: Network | None = None) -> list[WalkOutcome]:
    """``len(sources)`` independent walks: one shared Phase 1, then stitching one source at a time."""
    if not sources:
        raise ParamError("need at least one source")
    p = WalkParams(p.ell, p.lam, p.eta, len(sources))
    return _walks(g, list(sources), p, cfg, many=True, trace=trace, kernel=kernel, net=net)


def naive_random_walk(g: Graph, s: int, ell: int, cfg: SimConfig | None = None, *, trace: bool = False,
                      kernel=None) -> WalkOutcome:
    """Baseline: forward a token ``ell`` times, one hop per round."""
    net = Network(g, cfg or SimConfig())
    ws = walk_state(net, trace)
    kernel = kernel or SimpleKernel(g)
    w = ws.new_walks(1)[0]
    if trace:
        ws.record(w, s, 0, None)
    proto = NaiveWalks(ws, kernel, [(w, s, s, 0, ell)], trace)
    net.run(proto, "naive")
    return WalkOutcome(s, ell, proto.destination[w], "naive", net.stats, w, [s], traced=trace, _net=net, _ws=ws)


def regenerate_walks(outcomes: Sequence[WalkOutcome]) -> None:
    """Tell every node the positions it holds in each walk (k-RW-pos); fills ``outcome.visits``.

    Stitched walks replay every used short walk concurrently; naive walks were
    recorded as the token moved; fallback walks are pushed down the collection tree.
    """
    if not outcomes:
        return
    for o in outcomes:
        if not o.traced:
            raise MissingTrace("walk was run with tracing disabled")
    net: Network = outcomes[0]._net
    ws: WalkState = outcomes[0]._ws
    if any(o._ws is not ws for o in outcomes):
        raise ParamError("walks regenerated together must come from the same call")
    segments = [seg for o in outcomes for seg in o._segments]
    if segments:
        net.run(Replay(ws, segments), "regenerate")
    fallback = [o for o in outcomes if o.mode.endswith("fallback")]
    if fallback:
        tree = fallback[0]._fallback[0]
        items = []
        for o in fallback:
            path = o._fallback[1]
            for j, v in enumerate(path):
                items.append((v, j, 0 if j == 0 else path[j - 1] + 1, o.walk))
        down = Downcast(tree, items, keep=lambda node, item: item[0] == node)
        net.run(down, "regenerate")
        for node, got in enumerate(down.delivered):
            for v, j, pred, w in got:
                ws.record(w, v, j, None if pred == 0 else pred - 1)
    for o in outcomes:
        per = ws.positions.get(o.walk)
        o.visits = [sorted(set(vs)) for vs in per] if per else [[] for _ in range(net.n)]


def regenerate_walk(outcome: WalkOutcome) -> dict[int, list[int]]:
    regenerate_walks([outcome])
    return outcome.positions


def phase1_distribute(g: Graph, p: WalkParams, cfg: SimConfig | None = None, *, kernel=None,
                      record_loads: bool = False):
    """Run Phase 1 only. Returns (placement, stats, per-iteration directed-edge loads or None).

    ``placement[v]`` lists the (owner, desired_length) coupons resting at ``v``.
    """
    lam, eta = p.single_defaults(g)
    if lam > max(p.ell, 1):
        raise ParamError("phase1_distribute needs lam <= ell")
    net = Network(g, cfg or SimConfig())
    ws = walk_state(net)
    net.run(Phase1(ws, kernel or SimpleKernel(g), lam, eta, record_loads), "phase1")
    placement = [[(c.owner, c.desired) for owner in sorted(pl) for c in pl[owner]] for pl in ws.placement]
    return placement, net.stats, ws.phase1_loads


def _load_placement(net: Network, placement) -> WalkState:
    ws = walk_state(net)
    for v, coupons in enumerate(placement):
        for i, (owner, desired) in enumerate(coupons):
            ws.placement[v][owner].append(Coupon(owner, desired, "p1", i, 0, None))
    return ws


def sample_coupon(g: Graph, root: int, placement, cfg: SimConfig | None = None):
    """Sample one coupon owned by ``root`` uniformly. Returns ((holder, desired) or None, stats)."""
    net = Network(g, cfg or SimConfig())
    ws = _load_placement(net, placement)
    proto = _sample(net, ws, root)
    if proto.result is None:
        return None, net.stats
    holder, desired, _ = proto.result
    return (holder, desired), net.stats


def send_more_coupons(g: Graph, v: int, p: WalkParams, cfg: SimConfig | None = None, *, kernel=None):
    """Distribute ``eta`` new coupons from ``v``. Returns (placement delta, stats, rounds spent in part 1)."""
    lam, eta = p.single_defaults(g)
    net = Network(g, cfg or SimConfig())
    ws = walk_state(net)
    proto = SendMoreCoupons(ws, kernel or SimpleKernel(g), v, eta, lam)
    net.run(proto, "send_more")
    delta = [[(c.owner, c.desired) for c in ws.placement[u].get(v, [])] for u in range(g.n)]
    return delta, net.stats, proto.part1_rounds
