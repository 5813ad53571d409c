"""Global operation counters.

Used by tests and the delay report to verify structural claims such as
"the relay satellite performs four hash evaluations and no ring
arithmetic while admitting a user".  Counting is always on; the cost is
one integer increment per operation.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass
class OpCounts:
    hash: int = 0
    ring_mul: int = 0
    ring_add: int = 0
    ring_scale: int = 0
    sample: int = 0
    cha: int = 0
    sym_wrap: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)

    def __sub__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(
            **{k: v - getattr(other, k) for k, v in self.as_dict().items()}
        )


COUNTS = OpCounts()


def snapshot() -> OpCounts:
    return OpCounts(**COUNTS.as_dict())


def reset() -> None:
    for k in COUNTS.as_dict():
        setattr(COUNTS, k, 0)
