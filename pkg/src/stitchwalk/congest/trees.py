"""BFS-tree protocols: distributed tree construction, convergecast, upcast/downcast.

Tree construction floods ``BFS_PROBE`` from the root. A node adopts the
lowest-ID sender among the probes that first reach it, answers with
``BFS_JOIN`` and forwards the probe. Two rounds after forwarding, every join
from its children has arrived, so the node knows whether it is a leaf.
"""

from __future__ import annotations

from typing import Any, Callable

from .engine import Network, Protocol
from .messages import Kind


class TreeProtocol(Protocol):
    """Builds a BFS tree rooted at ``root``; subclasses act once children are known."""

    def __init__(self, n: int, root: int, reuse: "TreeProtocol | None" = None):
        self.root = root
        self.parent: list[int | None] = [None] * n
        self.level: list[int] = [-1] * n
        self.children: list[list[int]] = [[] for _ in range(n)]
        self.reuse = reuse

    def start(self, net: Network) -> None:
        if self.reuse is not None:
            # an earlier tree on the same root: skip construction, everyone knows its children now
            self.parent = list(self.reuse.parent)
            self.level = list(self.reuse.level)
            self.children = [list(c) for c in self.reuse.children]
            for v in range(net.n):
                self.children_known(net, v)
            return
        self.level[self.root] = 0
        for w in net.adj[self.root]:
            net.send(self.root, w, Kind.BFS_PROBE, (self.root,))
        net.wake(self.root, 2)

    def on_receive(self, net: Network, node: int, msgs) -> None:
        probes = None
        rest = None
        for sender, kind, payload in msgs:
            if kind is Kind.BFS_PROBE:
                if probes is None:
                    probes = [sender]
                else:
                    probes.append(sender)
            elif kind is Kind.BFS_JOIN:
                self.children[node].append(sender)
            else:
                if rest is None:
                    rest = []
                rest.append((sender, kind, payload))
        if probes is not None and self.level[node] < 0:
            parent = min(probes)
            self.parent[node] = parent
            self.level[node] = net.round
            net.send(node, parent, Kind.BFS_JOIN, (node,))
            for w in net.adj[node]:
                if w not in probes:
                    net.send(node, w, Kind.BFS_PROBE, (self.root,))
            net.wake(node, 2)
        if rest:
            self.on_tree_messages(net, node, rest)

    def on_wake(self, net: Network, node: int) -> None:
        self.children[node].sort()
        self.children_known(net, node)

    def children_known(self, net: Network, node: int) -> None:
        pass

    def on_tree_messages(self, net: Network, node: int, msgs) -> None:
        pass

    @property
    def depth(self) -> int:
        return max(self.level)


class Convergecast(TreeProtocol):
    """Leaf-to-root aggregation: one ``COUNT_PAIR`` per tree edge.

    ``local(node)`` gives a node's own value as a pair of ints; ``combine(net,
    node, own, [(child, value), ...])`` folds its subtree.
    """

    def __init__(self, n: int, root: int, local: Callable[[int], tuple[int, int]],
                 combine: Callable[[Network, int, tuple[int, int], list], tuple[int, int]]):
        super().__init__(n, root)
        self.local = local
        self.combine = combine
        self.pending = [0] * n
        self.received: list[list] = [[] for _ in range(n)]
        self.result: tuple[int, int] | None = None

    def children_known(self, net, node):
        self.pending[node] = len(self.children[node])
        if not self.pending[node]:
            self._emit(net, node)

    def on_tree_messages(self, net, node, msgs):
        for sender, kind, payload in msgs:
            self.received[node].append((sender, payload[1:]))
            self.pending[node] -= 1
        # child values always trail the parent's children_known wake-up
        if self.pending[node] == 0:
            self._emit(net, node)

    def _emit(self, net, node):
        value = self.combine(net, node, self.local(node), self.received[node])
        if node == self.root:
            self.result = value
        else:
            net.send(node, self.parent[node], Kind.COUNT_PAIR, (node, value[0], value[1]))


class Upcast(TreeProtocol):
    """Pipelined upcast of item tuples to the root, then optional pipelined downcast.

    Items are 4-int tuples. A node forwards each item as soon as it holds it and
    sends ``UPCAST_DONE`` (lower priority, so it trails the items) once its
    subtree is exhausted. With ``downcast=True`` the root broadcasts every item
    down the tree and ``delivered[v]`` lists what reached node ``v``.
    """

    def __init__(self, n: int, root: int, items: dict[int, list[tuple]], downcast: bool = False,
                 keep: Callable[[int, tuple], bool] | None = None, on_root: Callable[[list], list] | None = None):
        super().__init__(n, root)
        self.items = items
        self.downcast = downcast
        self.keep = keep or (lambda node, item: True)
        self.on_root = on_root
        self.pending = [0] * n
        self.collected: list[tuple] = []
        self.delivered: list[list[tuple]] = [[] for _ in range(n)]
        self.root_done_round: int | None = None

    def children_known(self, net, node):
        self.pending[node] = len(self.children[node])
        for item in self.items.get(node, ()):
            self._up(net, node, item)
        self._maybe_done(net, node)

    def _up(self, net, node, item):
        if node == self.root:
            self.collected.append(item)
        else:
            net.send(node, self.parent[node], Kind.UPCAST_PAIR, item, priority=0)

    def _maybe_done(self, net, node):
        if self.pending[node] or (self.reuse is None and net.round < self.level[node] + 2):
            return
        self.pending[node] = -1
        if node != self.root:
            net.send(node, self.parent[node], Kind.UPCAST_DONE, (node,), priority=1)
            return
        self.root_done_round = net.round
        if self.on_root is not None:
            self.collected = self.on_root(self.collected)
        if self.downcast:
            self._deliver(net, node, self.collected)

    def _deliver(self, net, node, items):
        for item in items:
            if self.keep(node, item):
                self.delivered[node].append(item)
            for c in self.children[node]:
                net.send(node, c, Kind.DOWNCAST_PAIR, item)

    def on_tree_messages(self, net, node, msgs):
        for sender, kind, payload in msgs:
            if kind is Kind.UPCAST_PAIR:
                self._up(net, node, payload)
            elif kind is Kind.UPCAST_DONE:
                self.pending[node] -= 1
            elif kind is Kind.DOWNCAST_PAIR:
                self._deliver(net, node, [payload])
        if self.pending[node] == 0:
            self._maybe_done(net, node)


def convergecast(net: Network, root: int, local: Callable[[int], tuple[int, int]],
                         combine: Callable[[Network, int, tuple[int, int], list], tuple[int, int]],
                         label: str) -> tuple[tuple[int, int], Convergecast]:
    proto = Convergecast(net.n, root, local, combine)
    net.run(proto, label)
    assert proto.result is not None
    return proto.result, proto


def sum_combine(net: Network, node: int, own: tuple[int, int], kids: list) -> tuple[int, int]:
    a, b = own
    for _, (x, y) in kids:
        a += x
        b += y
    return a, b


def and_combine(net: Network, node: int, own: tuple[int, int], kids: list) -> tuple[int, int]:
    ok = own[0]
    count = own[1]
    for _, (x, y) in kids:
        ok = ok & x
        count += y
    return ok, count


class Downcast(Protocol):
    """Root pushes item tuples down an already-built tree (pipelined)."""

    def __init__(self, tree: TreeProtocol, items: list[tuple], keep: Callable[[int, tuple], bool]):
        self.tree = tree
        self.items = items
        self.keep = keep
        self.delivered: list[list[tuple]] = [[] for _ in tree.parent]

    def start(self, net):
        self._push(net, self.tree.root, self.items)

    def _push(self, net, node, items):
        for item in items:
            if self.keep(node, item):
                self.delivered[node].append(item)
            for c in self.tree.children[node]:
                net.send(node, c, Kind.DOWNCAST_PAIR, item)

    def on_receive(self, net, node, msgs):
        self._push(net, node, [p for _, _, p in msgs])


def tree_snapshot(proto: TreeProtocol) -> dict[str, Any]:
    return {"root": proto.root, "parent": list(proto.parent), "level": list(proto.level)}


class Flood(Protocol):
    """Broadcast from ``root``: each node forwards once, to neighbours it has not heard from."""

    def __init__(self, n: int, root: int):
        self.root = root
        self.reached_at: list[int] = [-1] * n

    def start(self, net):
        self.reached_at[self.root] = 0
        for w in net.adj[self.root]:
            net.send(self.root, w, Kind.BFS_PROBE, (self.root,))

    def on_receive(self, net, node, msgs):
        if self.reached_at[node] >= 0:
            return
        self.reached_at[node] = net.round
        heard = {s for s, _, _ in msgs}
        for w in net.adj[node]:
            if w not in heard:
                net.send(node, w, Kind.BFS_PROBE, (self.root,))
