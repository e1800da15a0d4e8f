from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ..graph import Graph, diameter

# fallback threshold: walks longer than BETA * m^2 collect the topology instead
BETA = 1


def log2c(n: int) -> int:
    return max(1, math.ceil(math.log2(max(n, 2))))


@lru_cache(maxsize=256)
def graph_diameter(g: Graph) -> int:
    return diameter(g)


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class WalkParams:
    """Walk length ``ell``, short-walk base length ``lam``, coupon multiplier ``eta``, walk count ``k``.

    ``lam``/``eta`` left as ``None`` take the asymptotic defaults of :meth:`single_defaults` or :meth:`many_defaults`.
    """

    ell: int
    lam: int | None = None
    eta: int | None = None
    k: int = 1

    def __post_init__(self):
        if self.ell < 0:
            raise ParamError("ell must be >= 0")
        if self.k < 1:
            raise ParamError("k must be >= 1")
        if self.eta is not None and self.eta < 1:
            raise ParamError("eta must be >= 1")
        if self.lam is not None and not 1 <= self.lam <= max(self.ell, 1):
            raise ParamError(f"lam must lie in [1, ell], got lam={self.lam} ell={self.ell}")

    def single_defaults(self, g: Graph) -> tuple[int, int]:
        """Default (lam, eta) for one walk: lam = ceil(32 sqrt(ell D) log^3 n), eta = 1."""
        L = log2c(g.n)
        lam = math.ceil(32 * math.sqrt(self.ell * graph_diameter(g)) * L ** 3)
        return (self.lam if self.lam is not None else lam), (self.eta if self.eta is not None else 1)

    def many_defaults(self, g: Graph) -> tuple[int, int]:
        """Default (lam, eta) for k walks: lam = (32 sqrt(k ell D + 1) log n + k) log^2 n, eta = 1."""
        L = log2c(g.n)
        lam = math.ceil((32 * math.sqrt(self.k * self.ell * graph_diameter(g) + 1) * L + self.k) * L ** 2)
        return (self.lam if self.lam is not None else lam), (self.eta if self.eta is not None else 1)

    def needs_fallback(self, g: Graph) -> bool:
        return self.ell > BETA * g.m ** 2
