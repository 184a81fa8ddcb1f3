"""Sound interval propagation over lowered affine networks.

Exact interval arithmetic on the affine rows plus relu clamping; when a
phase assignment is supplied, fixed phases tighten the propagated intervals
and contradictions (a forced-active unit whose upper bound is negative, or
the mirror case) are reported as infeasibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..layers import Network
from ..matrix import Scalar
from .lowering import ACTIVE, INACTIVE, LINEAR, lower_network


@dataclass(frozen=True)
class Box:
    """Per-dimension closed intervals [lo, hi]."""

    bounds: tuple

    def __post_init__(self):
        bounds = tuple((lo, hi) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        for lo, hi in bounds:
            if lo > hi:
                raise ValueError(f"empty interval: [{lo}, {hi}]")

    def __len__(self) -> int:
        return len(self.bounds)

    @property
    def is_degenerate(self) -> bool:
        return all(lo == hi for lo, hi in self.bounds)

    def point(self) -> list:
        if not self.is_degenerate:
            raise ValueError("box is not a single point")
        return [lo for lo, _ in self.bounds]

    def contains(self, values) -> bool:
        return len(values) == len(self.bounds) and all(
            lo <= v <= hi for v, (lo, hi) in zip(values, self.bounds)
        )

    @staticmethod
    def around_point(values, radius) -> "Box":
        return Box(tuple((v - radius, v + radius) for v in values))


@dataclass
class Propagation:
    """Interval state after one bound pass."""

    pre_bounds: list  # per layer: list of (lo, hi) pre-activation intervals
    output_bounds: list  # final post-activation intervals
    infeasible: bool = False


def _row_interval(row, lows, highs):
    lo = hi = row[0]
    for w, xlo, xhi in zip(row[1:], lows, highs):
        if w > 0:
            lo += w * xlo
            hi += w * xhi
        elif w < 0:
            lo += w * xhi
            hi += w * xlo
    return lo, hi


def propagate(lowered, box: Box, phases: dict = None) -> Propagation:
    phases = phases or {}
    lows = [lo for lo, _ in box.bounds]
    highs = [hi for _, hi in box.bounds]
    pre_bounds = []
    for li, layer in enumerate(lowered):
        pre = [
            _row_interval(layer.weights.row(u), lows, highs)
            for u in range(layer.size)
        ]
        pre_bounds.append(pre)
        if layer.activation == LINEAR:
            lows = [lo for lo, _ in pre]
            highs = [hi for _, hi in pre]
            continue
        new_lows, new_highs = [], []
        for u, (lo, hi) in enumerate(pre):
            phase = phases.get((li, u))
            if phase == ACTIVE:
                if hi < 0:
                    return Propagation(pre_bounds, [], infeasible=True)
                new_lows.append(max(lo, 0))
                new_highs.append(hi)
            elif phase == INACTIVE:
                if lo > 0:
                    return Propagation(pre_bounds, [], infeasible=True)
                new_lows.append(0)
                new_highs.append(0)
            else:
                new_lows.append(max(lo, 0))
                new_highs.append(max(hi, 0))
        lows, highs = new_lows, new_highs
    return Propagation(pre_bounds, list(zip(lows, highs)))


def interval_propagate(net: Network, box: Box) -> Box:
    """Sound output box for all inputs in ``box``.

    Requires an affine-lowerable network (fully connected and convolutional
    layers with relu or linear activations).
    """
    lowered, input_size = lower_network(net)
    if len(box) != input_size:
        raise ValueError(f"box has {len(box)} dims, network expects {input_size}")
    result = propagate(lowered, box)
    return Box(tuple(result.output_bounds))
