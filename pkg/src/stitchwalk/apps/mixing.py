"""Decentralized mixing-time estimation from a single source, plus spectral and conductance brackets."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

from ..congest.engine import Network, RoundStats, SimConfig
from ..congest.trees import Upcast, convergecast, sum_combine
from ..graph import Graph
from ..walk.extra import deliver_to_sources
from ..walk.core import many_random_walks
from ..walk.params import WalkParams, log2c

DEFAULT_EPS = 1.0 / (12.0 * math.e)
C_K = 10


class MixingError(ValueError):
    pass


class InsufficientSamples(MixingError):
    pass


def default_delta(n: int) -> float:
    return 1.0 / (6912.0 * math.e * math.sqrt(n) * log2c(n))


@dataclass(frozen=True)
class Buckets:
    """Stationary masses grouped into geometric buckets of ratio 1 + eps."""

    index: tuple[int, ...]
    masses: dict[int, float]
    node_mass: tuple[float, ...]
    k: int
    eps: float

    @property
    def n(self) -> int:
        return len(self.index)


def bucket_of(y: float, n: int, eps: float) -> int:
    """i with (1+eps)^(i-1) / (n log n) <= y < (1+eps)^i / (n log n)."""
    scale = y * n * log2c(n)
    i = math.floor(math.log(scale) / math.log1p(eps) + 1e-9) + 1
    return i


def bucketize_masses(masses, eps: float) -> Buckets:
    if not 0 < eps < 1:
        raise MixingError("eps must lie in (0, 1)")
    n = len(masses)
    idx = tuple(bucket_of(y, n, eps) for y in masses)
    parts: dict[int, list[float]] = {}
    for i, y in zip(idx, masses):
        parts.setdefault(i, []).append(y)
    tot = {i: math.fsum(ys) for i, ys in parts.items()}
    k = math.ceil(2.0 / math.log2(1 + eps) * math.log2(max(n, 2)))
    return Buckets(idx, dict(sorted(tot.items())), tuple(masses), k, eps)


def bucketize(g: Graph, eps: float = DEFAULT_EPS) -> Buckets:
    """Bucket every node by deg(v)/2m; each node can do this itself once it knows n and m."""
    return bucketize_masses([d / (2 * g.m) for d in g.degrees()], eps)


def sample_floor(n: int, eps: float) -> int:
    """ceil(sqrt n) * ceil(eps^-2), the smallest sample count the test accepts."""
    return math.ceil(math.sqrt(n)) * math.ceil(eps ** -2)


@dataclass
class TestResult:
    verdict: str
    statistic: float
    tallies: dict[int, int]
    expected: dict[int, float]


def closeness_test(samples, buckets: Buckets, eps: float | None = None, *, refine: bool = False) -> TestResult:
    """PASS iff the L1 gap between sample tallies and stationary masses is at most 3 eps.

    With ``refine=False`` tallies are per bucket. With ``refine=True`` they are per
    node, which also sees discrepancies inside a bucket (on regular graphs the
    bucket rule is blind: every node shares one bucket).
    """
    eps = buckets.eps if eps is None else eps
    K = len(samples)
    need = sample_floor(buckets.n, eps)
    if K < need:
        raise InsufficientSamples(f"need at least {need} samples, got {K}")
    if refine:
        counts = Counter(samples)
        stat = sum(abs(c / K - buckets.node_mass[v]) for v, c in counts.items())
        stat += sum(y for v, y in enumerate(buckets.node_mass) if v not in counts)
        tallies = {int(v): c for v, c in sorted(counts.items())}
        expected = {v: buckets.node_mass[v] for v in tallies}
    else:
        tallies = dict(sorted(Counter(buckets.index[v] for v in samples).items()))
        stat = sum(abs(tallies.get(i, 0) / K - y) for i, y in buckets.masses.items())
        stat += sum(c / K for i, c in tallies.items() if i not in buckets.masses)
        expected = dict(buckets.masses)
    return TestResult("PASS" if stat <= 3 * eps else "FAIL", stat, tallies, expected)


@dataclass
class MixingReport:
    source: int
    tau_estimate: int
    eps: float
    delta: float
    K: int
    trace: list[tuple[int, str, float]] = field(default_factory=list)
    bucket_counts: dict[str, dict] = field(default_factory=dict)
    rounds: int = 0
    stats: RoundStats | None = field(default=None, repr=False)

    @property
    def monotone(self) -> bool:
        """True when, ordered by length, no PASS precedes a FAIL."""
        seen_pass = False
        for _, verdict, _ in sorted(self.trace):
            if verdict == "PASS":
                seen_pass = True
            elif seen_pass:
                return False
        return True

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("stats")
        d["per_phase"] = self.stats.per_phase if self.stats else {}
        return json.dumps(d, sort_keys=True)


def sample_count(n: int, eps: float, c_k: int = C_K) -> int:
    return max(math.ceil(math.sqrt(n)) * c_k * log2c(n), sample_floor(n, eps))


def estimate_mixing(g: Graph, x: int, cfg: SimConfig | None = None, *, eps: float = DEFAULT_EPS,
                    c_k: int = C_K, refine: bool = True, lam: int | None = None,
                    max_ell: int = 1 << 20) -> MixingReport:
    """Find a walk length after which the law of the walk from ``x`` tests close to stationary.

    Lengths double from 1 until the first PASS, then binary search between the
    last FAIL and that PASS. Each test sends K walks from ``x`` and collects
    (destination, degree) pairs back at ``x``; a census convergecast first tells
    ``x`` the values of n and m that fix every node's stationary mass.
    """
    if g.is_bipartite():
        raise MixingError("mixing estimation needs a non-bipartite graph")
    net = Network(g, cfg or SimConfig())
    (n, two_m), _ = convergecast(net, x, lambda v: (1, len(net.adj[v])), sum_combine, "census")
    K = sample_count(n, eps, c_k)
    exact = None
    if not refine:
        # the bucket rule needs every bucket's mass: gather all degrees once
        up = Upcast(net.n, x, {v: [(v, len(net.adj[v]), 0, 0)] for v in range(net.n)})
        net.run(up, "degree_upcast")
        exact = [0.0] * n
        for v, d, _, _ in up.collected:
            exact[v] = d / two_m
    report = MixingReport(x, 0, eps, default_delta(n), K)
    verdicts: dict[int, TestResult] = {}

    def test(ell: int) -> bool:
        outs = many_random_walks(g, [x] * K, WalkParams(ell, None if lam is None else min(lam, ell)), net=net)
        dest, deg, _, _ = deliver_to_sources(net, outs, x)
        masses = exact or _masses_from_pairs(n, two_m, dest, deg)
        res = closeness_test(dest, bucketize_masses(masses, eps), eps, refine=refine)
        verdicts[ell] = res
        report.trace.append((ell, res.verdict, round(res.statistic, 12)))
        return res.verdict == "PASS"

    ell = 1
    while not test(ell):
        if ell >= max_ell:
            raise MixingError(f"no PASS up to length {max_ell}")
        ell *= 2
    lo, hi = ell // 2, ell
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if test(mid):
            hi = mid
        else:
            lo = mid
    report.tau_estimate = hi
    final = verdicts[hi]
    report.bucket_counts = {"tallies": {str(k): v for k, v in final.tallies.items()},
                            "expected": {str(k): v for k, v in final.expected.items()}}
    report.rounds = net.stats.rounds_total
    report.stats = net.stats
    return report


def _masses_from_pairs(n: int, two_m: int, dest, deg) -> list[float]:
    """Stationary masses known at the source: exact for sampled nodes, zero-filled elsewhere.

    Unsampled nodes contribute only their total mass 1 - sum(sampled) to the
    node-level statistic, so their individual masses are never needed; the
    remainder is parked on them evenly to keep the vector a distribution.
    """
    masses = [0.0] * n
    for d, dd in zip(dest, deg):
        masses[d] = dd / two_m
    missing = [v for v in range(n) if masses[v] == 0.0]
    rest = 1.0 - sum(masses)
    for v in missing:
        masses[v] = rest / len(missing)
    return masses


@dataclass(frozen=True)
class SpectralBounds:
    """Brackets on 1 - lambda_2 and on conductance; the conductance ones carry unit constants."""

    gap_low: float
    gap_high: float
    phi_low: float
    phi_high: float
    note: str = "conductance bounds are order-of-magnitude only (unit constants)"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def spectral_bounds(tau: float, n: int) -> SpectralBounds:
    """From 1/gap <= tau <= log n / gap: gap in [1/tau, log2(n)/tau], capped at 2 (the largest possible gap)."""
    if tau < 1:
        raise MixingError("tau must be >= 1")
    gap_low = min(2.0, 1.0 / tau)
    gap_high = min(2.0, max(gap_low, math.log2(max(n, 2)) / tau))
    return SpectralBounds(gap_low, gap_high, min(1.0, gap_low), min(1.0, math.sqrt(gap_high)))
