"""Synchronous CONGEST round engine.

A :class:`Network` is one simulation run over a fixed graph. Protocols are node
state-machine families driven phase by phase through :meth:`Network.run`; state
that must survive between phases (coupon placements, traces) lives on the
protocol objects or on ``Network.state``.

Sends issued while processing round ``r`` are transmitted in round ``r + 1``.
Each directed edge transmits at most one message per round; the rest wait in a
per-edge queue ordered by (priority counter, owner ID, FIFO).
"""

from __future__ import annotations

import csv
import json
import random
from heapq import heappop, heappush
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..graph import Graph
from .messages import ARITY, TAG_BITS, Kind, default_budget, payload_bits


class EngineError(RuntimeError):
    pass


class RoundLimitExceeded(EngineError):
    def __init__(self, phase: str, limit: int):
        super().__init__(f"max_rounds={limit} exceeded during phase {phase!r}")
        self.phase = phase


class PayloadTooLarge(EngineError):
    pass


@dataclass
class SimConfig:
    seed: int = 0
    B: int | None = None
    c: int = 8
    max_rounds: int = 10_000_000
    log_deliveries: bool = False
    check_budget: bool = True
    node_streams: bool = False

    def budget(self, n: int) -> int:
        return self.B if self.B is not None else default_budget(n, self.c)


@dataclass
class RoundStats:
    rounds_total: int = 0
    messages_total: int = 0
    max_edge_load: int = 0
    per_phase: dict[str, int] = field(default_factory=dict)
    edge_load: dict[int, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def summary(self) -> dict[str, Any]:
        return {"rounds_total": self.rounds_total, "messages_total": self.messages_total,
                "max_edge_load": self.max_edge_load, "per_phase": dict(self.per_phase)}


def edge_load_histogram(stats: RoundStats) -> dict[int, int]:
    """Per-round maximum queue length over directed edges (rounds with traffic only)."""
    return dict(stats.edge_load)


class Protocol:
    """Node state-machine family. Handlers must only touch the state of ``node``."""

    def start(self, net: "Network") -> None:
        pass

    def on_receive(self, net: "Network", node: int, msgs: list[tuple[int, Kind, tuple]]) -> None:
        pass

    def on_wake(self, net: "Network", node: int) -> None:
        pass


class Network:
    def __init__(self, graph: Graph, cfg: SimConfig | None = None):
        self.graph = graph
        self.cfg = cfg or SimConfig()
        self.n = graph.n
        self.adj = graph.adjacency
        self.budget = self.cfg.budget(self.n)
        self.round = 0
        self.stats = RoundStats()
        self.state: dict[str, Any] = {}
        self.log: list[tuple[int, int, int, str]] | None = [] if self.cfg.log_deliveries else None
        self._queues: dict[tuple[int, int], list] = {}
        self._seq = 0
        self._wakeups: dict[int, set[int]] = {}
        # Default: one stream for the whole run. Handlers execute in a fixed node order, so
        # every draw is fresh and the run is reproducible from the seed alone. node_streams
        # gives each node its own stream split from the seed (slower to set up).
        self._rng = random.Random(self.cfg.seed)
        self._node_rngs: list[random.Random] | None = None
        if self.cfg.node_streams:
            states = np.random.SeedSequence(self.cfg.seed).generate_state(self.n, dtype=np.uint64)
            self._node_rngs = [random.Random(int(x)) for x in states]
        self._nbrs = graph._nbr_sets
        self._check = self.cfg.check_budget
        self._safe = [0] + [1 << max(0, (self.budget - TAG_BITS) // a) for a in range(1, 8)]

    def rng(self, v: int) -> random.Random:
        if self._node_rngs is None:
            return self._rng
        return self._node_rngs[v]

    def send(self, u: int, v: int, kind: Kind, payload: tuple, priority: int = 0) -> None:
        key = (u, v)
        q = self._queues.get(key)
        if q is None:
            if v not in self._nbrs[u]:
                raise EngineError(f"node {u} cannot send to non-neighbour {v}")
            q = self._queues[key] = []
        if self._check:
            a = len(payload)
            if a != ARITY[kind]:
                raise EngineError(f"{kind.name} payload needs {ARITY[kind]} fields, got {payload}")
            # cheap sufficient bound first; exact count only when it might not fit
            if not 0 <= min(payload) or max(payload) >= self._safe[a]:
                if min(payload) < 0:
                    raise EngineError(f"{kind.name} payload fields must be non-negative: {payload}")
                if payload_bits(payload) > self.budget:
                    if not q:
                        del self._queues[key]
                    raise PayloadTooLarge(f"{kind.name}{payload} needs {payload_bits(payload)} bits > B={self.budget}")
        self._seq += 1
        heappush(q, (priority, payload[0], self._seq, kind, payload))

    def wake(self, v: int, delay: int = 1) -> None:
        """Call the protocol's ``on_wake(v)`` at the end of round ``round + delay``."""
        if delay < 1:
            raise EngineError("wake delay must be >= 1")
        self._wakeups.setdefault(self.round + delay, set()).add(v)

    def run(self, protocol: Protocol, label: str) -> int:
        """Drive ``protocol`` until no message is queued and no wake-up is pending."""
        start = self.round
        protocol.start(self)
        queues = self._queues
        stats = self.stats
        limit = self.cfg.max_rounds
        log = self.log
        while queues or self._wakeups:
            if self.round >= limit:
                raise RoundLimitExceeded(label, limit)
            self.round += 1
            r = self.round
            inbox: dict[int, list] = {}
            load = 0
            delivered = len(queues)
            for e in sorted(queues):
                q = queues[e]
                if len(q) > load:
                    load = len(q)
                item = heappop(q) if len(q) > 1 else q.pop()
                if not q:
                    del queues[e]
                u, v = e
                box = inbox.get(v)
                if box is None:
                    inbox[v] = [(u, item[3], item[4])]
                else:
                    box.append((u, item[3], item[4]))
                if log is not None:
                    log.append((r, u, v, item[3].name))
            if load:
                stats.edge_load[r] = load
                if load > stats.max_edge_load:
                    stats.max_edge_load = load
                stats.messages_total += delivered
            for v in sorted(inbox):
                protocol.on_receive(self, v, inbox[v])
            woken = self._wakeups.pop(r, None)
            if woken:
                for v in sorted(woken):
                    protocol.on_wake(self, v)
        used = self.round - start
        stats.per_phase[label] = stats.per_phase.get(label, 0) + used
        stats.rounds_total += used
        return used

    def pending(self) -> int:
        return sum(len(q) for q in self._queues.values())

    def dump_log(self, path: str) -> None:
        if self.log is None:
            raise EngineError("delivery logging was disabled")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round", "src", "dst", "kind"])
            w.writerows(self.log)


def run_protocol(graph: Graph, cfg: SimConfig, protocol: Protocol, label: str = "main") -> tuple[Protocol, RoundStats]:
    """Run one protocol on a fresh network; outputs are read off the protocol object."""
    net = Network(graph, cfg)
    net.run(protocol, label)
    return protocol, net.stats
