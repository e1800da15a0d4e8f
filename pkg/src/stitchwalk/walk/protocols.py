"""Node state machines for coupon distribution, coupon sampling, token forwarding and replay."""

from __future__ import annotations

from collections import Counter, defaultdict

from ..congest.engine import Network, Protocol
from ..congest.messages import Kind
from ..congest.trees import TreeProtocol


class Coupon:
    """A resting short walk. ``origin`` is ``"p1"`` (Phase 1) or ``"smc"`` (Send-More-Coupons).

    For Phase-1 coupons ``key`` is the owner-local index and ``arrival`` the hop
    counter on arrival at the holder; for SMC coupons ``key`` is ``(call, step, rank)``.
    """

    __slots__ = ("owner", "desired", "origin", "key", "arrival", "sender")

    def __init__(self, owner, desired, origin, key, arrival, sender):
        self.owner = owner
        self.desired = desired
        self.origin = origin
        self.key = key
        self.arrival = arrival
        self.sender = sender

    def __repr__(self):
        return f"Coupon(owner={self.owner}, desired={self.desired}, origin={self.origin})"


class WalkState:
    """Per-run distributed state: each list entry is owned by one node."""

    def __init__(self, n: int, trace: bool = False):
        self.n = n
        self.trace = trace
        self.placement: list[dict[int, list[Coupon]]] = [defaultdict(list) for _ in range(n)]
        # phase-1 traces: (owner, idx, departure counter) -> (arrival counter, predecessor)
        self.p1_trace: list[dict] = [{} for _ in range(n)]
        # SMC traces: provenance of (owner, call, step, rank) and send-side rank bookkeeping
        self.smc_prov: list[dict] = [{} for _ in range(n)]
        self.smc_sent: list[dict] = [{} for _ in range(n)]
        self.smc_calls: list[int] = [0] * n
        self.p1_issued: list[int] = [0] * n
        self.walks_issued = 0
        # visits recorded by nodes: walk -> node -> [(position, predecessor)]
        self.positions: dict[int, list[list[tuple[int, int | None]]]] = {}
        self.phase1_loads: dict[int, Counter] | None = None

    def record(self, walk: int, node: int, position: int, pred: int | None) -> None:
        per = self.positions.get(walk)
        if per is None:
            per = self.positions[walk] = [[] for _ in range(self.n)]
        per[node].append((position, pred))

    def new_walks(self, k: int) -> list[int]:
        first = self.walks_issued
        self.walks_issued += k
        return list(range(first, first + k))

    def coupons_owned(self, owner: int) -> int:
        return sum(len(p.get(owner, ())) for p in self.placement)


def walk_state(net: Network, trace: bool = False) -> WalkState:
    ws = net.state.get("walk")
    if ws is None:
        ws = net.state["walk"] = WalkState(net.n, trace)
    elif trace:
        ws.trace = True
    return ws


class Phase1(Protocol):
    """Every node launches ``quota(v)`` coupons with desired length lam + U[0, lam-1].

    Coupons move as soon as their edge is free; congested edges send the coupon
    with the smallest hop counter first.
    """

    def __init__(self, ws: WalkState, kernel, lam: int, eta: int, record_loads: bool = False):
        self.ws = ws
        self.kernel = kernel
        self.lam = lam
        self.eta = eta
        self.record_loads = record_loads
        if record_loads:
            ws.phase1_loads = defaultdict(Counter)

    def start(self, net):
        lam = self.lam
        ws = self.ws
        # leftovers of an earlier Phase 1 have other lengths; drop them, but keep indices unique for replay
        ws.placement = [defaultdict(list) for _ in range(net.n)]
        for v in range(net.n):
            rng = net.rng(v)
            first = ws.p1_issued[v]
            quota = self.kernel.coupon_quota(v, self.eta)
            ws.p1_issued[v] += quota
            for idx in range(first, first + quota):
                desired = lam + int(rng.random() * lam)
                self._advance(net, v, v, idx, desired, 0, None)

    def _advance(self, net, v, owner, idx, desired, counter, sender):
        arrival = counter
        rng = net.rng(v)
        step = self.kernel.step
        ws = self.ws
        while counter < desired:
            nxt = step(v, rng)
            counter += 1
            if nxt != v:
                if ws.trace:
                    ws.p1_trace[v][(owner, idx, counter)] = (arrival, sender)
                if self.record_loads:
                    ws.phase1_loads[counter][(v, nxt)] += 1
                net.send(v, nxt, Kind.COUPON, (owner, idx, desired, counter), counter - 1)
                return
        ws.placement[v][owner].append(Coupon(owner, desired, "p1", idx, arrival, sender))

    def on_receive(self, net, node, msgs):
        for sender, _, (owner, idx, desired, counter) in msgs:
            self._advance(net, node, owner, idx, desired, counter, sender)


class SampleCoupon(TreeProtocol):
    """Uniformly sample one coupon owned by ``root`` via a weighted convergecast.

    Each node proposes one of its own coupons of ``root`` (uniformly) and
    forwards a single candidate upward, chosen with probability proportional to
    the number of coupons it stands for. ``via[u]`` remembers which child the
    winner came through so the token can retrace the path.
    """

    def __init__(self, ws: WalkState, n: int, root: int, reuse: TreeProtocol | None = None):
        super().__init__(n, root, reuse)
        self.ws = ws
        self.pick: list[Coupon | None] = [None] * n
        self.via: list[int | None] = [None] * n
        self.pending = [0] * n
        self.cands: list[list] = [[] for _ in range(n)]
        self.result: tuple[int, int, int] | None = None

    def children_known(self, net, node):
        self.pending[node] = len(self.children[node])
        if not self.pending[node]:
            self._emit(net, node)

    def on_tree_messages(self, net, node, msgs):
        for sender, _, payload in msgs:
            self.cands[node].append((sender,) + payload)
            self.pending[node] -= 1
        if self.pending[node] == 0:
            self._emit(net, node)

    def _emit(self, net, node):
        rng = net.rng(node)
        own = self.ws.placement[node].get(self.root)
        total = 0
        holder, desired = node, 0
        if own:
            c = own[int(rng.random() * len(own))]
            self.pick[node] = c
            total = len(own)
            desired = c.desired
        for child, h, d, count in self.cands[node]:
            if not count:
                continue
            total += count
            if rng.random() * total < count:
                self.via[node], holder, desired = child, h, d
        if node == self.root:
            self.result = (holder, desired, total) if total else None
        else:
            net.send(node, self.parent[node], Kind.SAMPLE_UP, (holder, desired, total))


class RouteToken(Protocol):
    """Carry the walk token from the sampling root down the recorded tree path."""

    def __init__(self, via: list[int | None], root: int, token: tuple[int, int, int]):
        self.via = via
        self.root = root
        self.token = token
        self.arrived_at: int | None = None

    def start(self, net):
        self._forward(net, self.root)

    def _forward(self, net, node):
        nxt = self.via[node]
        if nxt is None:
            self.arrived_at = node
        else:
            net.send(node, nxt, Kind.TOKEN, self.token, priority=self.token[2])

    def on_receive(self, net, node, msgs):
        self._forward(net, node)


class SendMoreCoupons(Protocol):
    """Lock-step distribution of ``eta`` fresh coupons from ``owner``.

    Part 1 forwards every coupon ``lam`` steps, combining coupons that share an
    edge into one (owner, count) message. Part 2 stops each coupon at extension
    step i with probability 1/(lam - i), so its total length is uniform on
    [lam, 2 lam - 1]. Records at a node are ranked per step (lazy stays first,
    then arrivals by sender) so that a single coupon can be traced back later.
    """

    def __init__(self, ws: WalkState, kernel, owner: int, eta: int, lam: int):
        self.ws = ws
        self.kernel = kernel
        self.owner = owner
        self.eta = eta
        self.lam = lam
        self.call = ws.smc_calls[owner]
        ws.smc_calls[owner] += 1
        self.stays: dict[int, list[int]] = {}
        self.done_round: dict[int, int] = {}
        self.t0 = 0
        self.part1_rounds = 0
        self.created: list[tuple[int, int]] = []

    def start(self, net):
        self.t0 = net.round
        self.stays[self.owner] = list(range(self.eta))
        self._step(net, self.owner, [])

    def on_receive(self, net, node, msgs):
        self._step(net, node, sorted((s, p[3]) for s, _, p in msgs))

    def on_wake(self, net, node):
        if self.done_round.get(node) != net.round:
            self._step(net, node, [])

    def _step(self, net, u, arrivals):
        self.done_round[u] = net.round
        t = net.round - self.t0
        if t == self.lam:
            self.part1_rounds = t
        ws, owner, call, lam = self.ws, self.owner, self.call, self.lam
        stay_prev = self.stays.pop(u, [])
        if ws.trace and t > 0:
            prov = ws.smc_prov[u]
            rank = 0
            for r_prev in stay_prev:
                prov[(owner, call, t, rank)] = ("stay", r_prev)
                rank += 1
            for sender, count in arrivals:
                for b in range(count):
                    prov[(owner, call, t, rank)] = ("from", sender, b)
                    rank += 1
        total = len(stay_prev) + sum(c for _, c in arrivals)
        rng = net.rng(u)
        batches: dict[int, list[int]] = {}
        stay_next: list[int] = []
        for r in range(total):
            if t >= lam and rng.random() * (lam - (t - lam)) < 1:
                ws.placement[u][owner].append(Coupon(owner, t, "smc", (call, t, r), None, None))
                self.created.append((u, t))
                continue
            nxt = self.kernel.step(u, rng)
            if nxt == u:
                stay_next.append(r)
            else:
                batches.setdefault(nxt, []).append(r)
        if stay_next:
            self.stays[u] = stay_next
            net.wake(u, 1)
        for z in sorted(batches):
            ranks = batches[z]
            if ws.trace:
                sent = ws.smc_sent[u]
                for b, r in enumerate(ranks):
                    sent[(owner, call, t + 1, z, b)] = r
            net.send(u, z, Kind.COUPON_BATCH, (owner, call, t + 1, len(ranks)))


class NaiveWalks(Protocol):
    """Token walks forwarded one hop per round; congested edges send the least advanced token first.

    ``tokens`` holds (walk, source, start node, start position, target length).
    """

    def __init__(self, ws: WalkState, kernel, tokens, record: bool):
        self.ws = ws
        self.kernel = kernel
        self.tokens = tokens
        self.target = {w: target for w, _, _, _, target in tokens}
        self.record = record
        self.destination: dict[int, int] = {}

    def start(self, net):
        for w, s, node, pos, _ in self.tokens:
            self._advance(net, node, s, w, pos)

    def _advance(self, net, v, s, w, completed):
        target = self.target[w]
        rng = net.rng(v)
        while completed < target:
            nxt = self.kernel.step(v, rng)
            completed += 1
            if nxt != v:
                net.send(v, nxt, Kind.TOKEN, (s, w, completed), priority=completed - 1)
                return
            if self.record:
                self.ws.record(w, v, completed, v)
        self.destination[w] = v

    def on_receive(self, net, node, msgs):
        for sender, _, (s, w, completed) in msgs:
            if self.record:
                self.ws.record(w, node, completed, sender)
            self._advance(net, node, s, w, completed)


class Replay(Protocol):
    """Regenerate positions by retracing each stitched short walk backwards from its holder.

    ``segments`` holds (walk, base position, holder, coupon). Every node on the
    short walk learns the positions it occupied and its predecessor there. The
    position of the short walk's first node is known already (it is the end of
    the previous segment), so replay stops at hop counter 0.
    """

    def __init__(self, ws: WalkState, segments):
        self.ws = ws
        self.segments = segments

    def start(self, net):
        for w, base, holder, c in self.segments:
            if c.origin == "p1":
                self._p1_visit(net, holder, w, base, c.owner, c.key, c.arrival, c.desired + 1, c.sender)
            else:
                call, t, r = c.key
                self._smc_back(net, holder, w, base, c.owner, call, t, r)

    def _p1_visit(self, net, u, w, base, owner, idx, arrival, until, pred):
        for j in range(max(arrival, 1), until):
            self.ws.record(w, u, base + j, pred if j == arrival else u)
        if arrival > 0:
            net.send(u, pred, Kind.POSITION_NOTIFY, (owner, idx, arrival, base, w))

    def _smc_back(self, net, u, w, base, owner, call, t, r):
        prov = self.ws.smc_prov[u]
        while t > 0:
            how = prov[(owner, call, t, r)]
            if how[0] == "stay":
                self.ws.record(w, u, base + t, u)
                t, r = t - 1, how[1]
                continue
            _, sender, b = how
            self.ws.record(w, u, base + t, sender)
            net.send(u, sender, Kind.REPLAY_BATCH, (owner, call, t, b, base, w))
            return

    def on_receive(self, net, node, msgs):
        for sender, kind, payload in msgs:
            if kind is Kind.POSITION_NOTIFY:
                owner, idx, counter, base, w = payload
                arrival, pred = self.ws.p1_trace[node][(owner, idx, counter)]
                self._p1_visit(net, node, w, base, owner, idx, arrival, counter, pred)
            else:
                owner, call, t, b, base, w = payload
                r = self.ws.smc_sent[node][(owner, call, t, sender, b)]
                self._smc_back(net, node, w, base, owner, call, t - 1, r)
