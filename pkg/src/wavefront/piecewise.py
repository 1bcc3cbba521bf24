"""Piecewise-constant functions of x with finitely many jumps."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EmptyData
from .flux_core import coerce


@dataclass(frozen=True)
class PiecewiseConstantFunction:
    """``values[i]`` holds on (jumps[i-1], jumps[i]); x at a jump takes the right value."""

    jumps: tuple
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.jumps) + 1:
            raise EmptyData("need exactly one more value than jump positions")
        for a, b in zip(self.jumps[:-1], self.jumps[1:]):
            if not a < b:
                raise EmptyData("jump positions must be strictly increasing")

    @classmethod
    def constant(cls, u) -> "PiecewiseConstantFunction":
        return cls((), (u,))

    @classmethod
    def from_pieces(cls, jumps: Sequence, values: Sequence) -> "PiecewiseConstantFunction":
        """Build from possibly repeated positions; repeated positions collapse."""
        js, vs = [], [values[0]]
        for x, v in zip(jumps, values[1:]):
            if js and x == js[-1]:
                vs[-1] = v
            else:
                js.append(x)
                vs.append(v)
        return cls(tuple(js), tuple(vs)).normalized()

    def __call__(self, x):
        return self.values[bisect.bisect_right(self.jumps, x)]

    def left_limit(self, x):
        return self.values[bisect.bisect_left(self.jumps, x)]

    def normalized(self) -> "PiecewiseConstantFunction":
        js, vs = [], [self.values[0]]
        for x, v in zip(self.jumps, self.values[1:]):
            if v == vs[-1]:
                continue
            js.append(x)
            vs.append(v)
        return PiecewiseConstantFunction(tuple(js), tuple(vs))

    def pieces(self, a, b) -> list:
        """(left, right, value) triples covering [a, b]."""
        out = []
        i = bisect.bisect_right(self.jumps, a)
        left = a
        while i < len(self.jumps) and self.jumps[i] < b:
            out.append((left, self.jumps[i], self.values[i]))
            left = self.jumps[i]
            i += 1
        out.append((left, b, self.values[i]))
        return out

    def integral(self, a, b):
        return sum((r - l) * v for l, r, v in self.pieces(a, b))

    def sup_norm(self):
        return max(abs(v) for v in self.values)

    def map_values(self, fn) -> "PiecewiseConstantFunction":
        return PiecewiseConstantFunction(self.jumps, tuple(fn(v) for v in self.values))

    def to_json(self) -> dict:
        return {"breaks": [float(x) for x in self.jumps],
                "values": [float(v) for v in self.values]}


def pcf_from_json(obj: Mapping) -> PiecewiseConstantFunction:
    values = obj.get("values") or []
    if not values:
        raise EmptyData("initial data has no values")
    return PiecewiseConstantFunction(tuple(coerce(x) for x in obj.get("breaks", [])),
                                     tuple(coerce(v) for v in values))
