from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

TAG_BITS = 4


class Kind(IntEnum):
    COUPON = 0
    COUPON_BATCH = 1
    TOKEN = 2
    BFS_PROBE = 3
    BFS_JOIN = 4
    SAMPLE_UP = 5
    COUNT_PAIR = 6
    POSITION_NOTIFY = 7
    COVER_MARK = 8
    UPCAST_PAIR = 9
    DOWNCAST_PAIR = 10
    UPCAST_DONE = 11
    MH_INFO = 12
    REPLAY_BATCH = 13


# payload arity per kind; every payload leads with a node ID (used as the owner tie-break)
ARITY = {
    Kind.COUPON: 4,          # owner, index, desired_length, counter
    Kind.COUPON_BATCH: 4,    # owner, call, step, count
    Kind.TOKEN: 3,           # source, walk, completed
    Kind.BFS_PROBE: 1,       # root
    Kind.BFS_JOIN: 1,        # root
    Kind.SAMPLE_UP: 3,       # holder, desired_length, count
    Kind.COUNT_PAIR: 3,      # sender, a, b
    Kind.POSITION_NOTIFY: 5, # owner, index, counter, base position, walk
    Kind.COVER_MARK: 2,      # sender, position
    Kind.UPCAST_PAIR: 4,     # a, b, c, d
    Kind.DOWNCAST_PAIR: 4,
    Kind.UPCAST_DONE: 1,
    Kind.MH_INFO: 2,         # sender, degree
    Kind.REPLAY_BATCH: 6,    # owner, call, step, batch rank, base position, walk
}


def payload_bits(payload: tuple[int, ...]) -> int:
    bits = TAG_BITS
    for x in payload:
        bits += x.bit_length() or 1
    return bits


def default_budget(n: int, c: int = 8) -> int:
    """B = c * ceil(log2(n + 1)) bits per edge per round."""
    return c * math.ceil(math.log2(max(n, 1) + 1))


@dataclass(frozen=True)
class Message:
    kind: Kind
    payload: tuple[int, ...]
    priority: int = 0

    def bits(self) -> int:
        return payload_bits(self.payload)
