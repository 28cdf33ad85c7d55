"""Piecewise-linear machine capacity and its inversion.

A machine alternates between shared and exclusive processing.  Its capacity
curve A_i(t) maps wall-clock time to the amount of processing delivered:
slope e_k on the interval (t_{k-1}, t_k] between consecutive breakpoints,
slope 1 beyond the last breakpoint.  All ratios lie in (0, 1], so A_i is
strictly increasing and invertible.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConfigError

__all__ = [
    "MachineTimeline",
    "MachinePark",
    "capacity_at",
    "park_capacity_at",
    "completion_time",
    "search_bounds",
]


@dataclass(frozen=True)
class MachineTimeline:
    """One machine's shared-interval structure.

    breakpoints are strictly increasing positive times; ratios[k] is the
    processing rate on (breakpoints[k-1], breakpoints[k]].  Past the last
    breakpoint the machine runs exclusively at rate 1.  Empty breakpoints
    mean the machine was never shared.
    """

    machine_index: int  # 1-based
    breakpoints: tuple[float, ...]
    ratios: tuple[float, ...]
    cumulative: tuple[float, ...] = field(init=False, compare=False)

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        rs = tuple(float(r) for r in self.ratios)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "ratios", rs)
        if self.machine_index < 1:
            raise ConfigError(f"machine index must be >= 1, got {self.machine_index}")
        if len(bps) != len(rs):
            raise ConfigError(
                f"machine {self.machine_index}: {len(bps)} breakpoints vs {len(rs)} ratios"
            )
        prev = 0.0
        for k, b in enumerate(bps):
            if b <= prev:
                raise ConfigError(
                    f"machine {self.machine_index}: breakpoint {k + 1} ({b}) "
                    f"not greater than previous ({prev})"
                )
            prev = b
        for k, r in enumerate(rs):
            if not (0.0 < r <= 1.0):
                raise ConfigError(
                    f"machine {self.machine_index}: ratio {k + 1} ({r}) outside (0, 1]"
                )
        # Running capacity at each breakpoint.  capacity_at recomputes the
        # last step with this exact expression, so boundary lookups agree
        # bit for bit.
        cum = []
        total = 0.0
        prev = 0.0
        for b, r in zip(bps, rs):
            total = total + (b - prev) * r
            cum.append(total)
            prev = b
        object.__setattr__(self, "cumulative", tuple(cum))

    @property
    def interval_count(self) -> int:
        return len(self.breakpoints)


@dataclass(frozen=True)
class MachinePark:
    """The m machines plus the sharing guarantees the algorithms rely on.

    The first floor_machines machines never share below ratio_floor:
    every one of their ratios is >= ratio_floor, which lies in (0, 1].
    """

    machines: tuple[MachineTimeline, ...]
    floor_machines: int
    ratio_floor: float

    def __post_init__(self):
        object.__setattr__(self, "machines", tuple(self.machines))
        m = len(self.machines)
        if m < 1:
            raise ConfigError("need at least one machine")
        if not (1 <= self.floor_machines <= m):
            raise ConfigError(
                f"m1 must be in [1, {m}], got {self.floor_machines}"
            )
        if not (0.0 < self.ratio_floor <= 1.0):
            raise ConfigError(f"e0 must be in (0, 1], got {self.ratio_floor}")
        for i, tl in enumerate(self.machines, start=1):
            if tl.machine_index != i:
                raise ConfigError(
                    f"machine at slot {i} carries index {tl.machine_index}"
                )
            if i <= self.floor_machines:
                for k, r in enumerate(tl.ratios):
                    if r < self.ratio_floor:
                        raise ConfigError(
                            f"machine {i}: ratio {k + 1} ({r}) below e0 "
                            f"({self.ratio_floor}) but machine is within the "
                            f"first m1={self.floor_machines}"
                        )

    @property
    def m(self) -> int:
        return len(self.machines)

    @property
    def total_intervals(self) -> int:
        return sum(tl.interval_count for tl in self.machines)


def capacity_at(timeline: MachineTimeline, t: float) -> float:
    """Processing delivered by time t (A_i(t)).  t must be >= 0."""
    if t < 0:
        raise ConfigError(f"time must be >= 0, got {t}")
    bps = timeline.breakpoints
    if not bps:
        return t
    i = bisect_left(bps, t)  # first breakpoint >= t
    if i == len(bps):
        return timeline.cumulative[-1] + (t - bps[-1])
    left_t = bps[i - 1] if i else 0.0
    left_c = timeline.cumulative[i - 1] if i else 0.0
    return left_c + (t - left_t) * timeline.ratios[i]


def park_capacity_at(park: MachinePark, t: float) -> float:
    """Aggregate capacity A(t), summed over machines in index order."""
    total = 0.0
    for tl in park.machines:
        total += capacity_at(tl, t)
    return total


def completion_time(timeline: MachineTimeline, start: float, amount: float) -> float:
    """Smallest t >= start with A_i(t) - A_i(start) >= amount."""
    if start < 0:
        raise ConfigError(f"start must be >= 0, got {start}")
    if amount < 0:
        raise ConfigError(f"amount must be >= 0, got {amount}")
    if amount == 0:
        return start
    target = capacity_at(timeline, start) + amount
    cum = timeline.cumulative
    j = bisect_left(cum, target)  # first segment whose end capacity >= target
    if j == len(cum):
        base_c = cum[-1] if cum else 0.0
        base_t = timeline.breakpoints[-1] if cum else 0.0
        t = base_t + (target - base_c)
    else:
        left_t = timeline.breakpoints[j - 1] if j else 0.0
        left_c = cum[j - 1] if j else 0.0
        t = left_t + (target - left_c) / timeline.ratios[j]
    # Guard against division rounding pulling the answer below start.
    return t if t > start else start


def search_bounds(park: MachinePark, total_load: float) -> tuple[float, float]:
    """(lower, upper) bracket for the optimal makespan given total load P.

    P/m is a lower bound (aggregate rate never exceeds m); P/ratio_floor
    is an upper bound because machine 1 alone finishes everything at a
    rate never below ratio_floor.
    """
    if total_load < 0:
        raise ConfigError(f"total load must be >= 0, got {total_load}")
    return total_load / park.m, total_load / park.ratio_floor
