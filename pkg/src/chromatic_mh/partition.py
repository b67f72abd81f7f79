"""Time-axis partitions, their coloring, signal windows and Markov blankets."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional, Tuple

from ._validation import ColoringError, ValidationError


class Region(NamedTuple):
    """Half-open interval ``[lo, hi)``; the final region of a partition is closed."""

    lo: float
    hi: float
    closed: bool = False

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, t: float) -> bool:
        return self.lo <= t < self.hi or (self.closed and t == self.hi)


@dataclass(frozen=True)
class Partition:
    boundaries: Tuple[float, ...]
    length: float
    offset: float = 0.0
    colors: Optional[Tuple[int, ...]] = None

    @property
    def regions(self) -> List[Region]:
        b = self.boundaries
        last = len(b) - 2
        return [Region(b[i], b[i + 1], i == last) for i in range(len(b) - 1)]

    @property
    def n_regions(self) -> int:
        return len(self.boundaries) - 1

    @property
    def n_colors(self) -> int:
        return 0 if self.colors is None else max(self.colors) + 1

    def region_index(self, t: float) -> int:
        """Index of the region holding time ``t`` (boundary times go right)."""
        b = self.boundaries
        if not b[0] <= t <= b[-1]:
            raise ValueError(f"time {t} outside [{b[0]}, {b[-1]}]")
        for i in range(len(b) - 2):
            if t < b[i + 1]:
                return i
        return len(b) - 2

    def regions_of_color(self, color: int) -> List[int]:
        return [i for i, c in enumerate(self.colors) if c == color]


def build_partition(T: float, l: float, u: float = 0.0) -> Partition:
    """Boundaries at ``0, u, u + l, u + 2l, ...`` capped at ``T``."""
    if not (math.isfinite(T) and T > 0):
        raise ValidationError(f"T must be positive, got {T}")
    if not (math.isfinite(l) and 0 < l <= T):
        raise ValidationError(f"region length must satisfy 0 < l <= T, got l={l}")
    if not (math.isfinite(u) and 0 <= u < l):
        raise ValidationError(f"offset must satisfy 0 <= u < l, got u={u}")
    bounds = [0.0]
    b = float(u)
    k = 0
    while b < T:
        if b > bounds[-1]:
            bounds.append(b)
        k += 1
        b = u + k * l
    bounds.append(float(T))
    return Partition(tuple(bounds), float(l), float(u))


def color_partition(partition: Partition, tau_max: float) -> Partition:
    """Alternate 2 colors when ``l >= tau_max``, 3 colors when ``tau_max/2 <= l``."""
    l = partition.length
    if l >= tau_max:
        k = 2
    elif l >= tau_max / 2:
        k = 3
    else:
        raise ColoringError(
            f"region length {l} < tau_max/2 = {tau_max / 2}; more than 3 colors needed"
        )
    n = partition.n_regions
    colors = tuple(i % k for i in range(n))
    regions = partition.regions
    # same-color regions must be at least tau_max apart
    for i in range(n):
        for j in range(i + 1, n):
            if colors[i] == colors[j] and regions[j].lo - regions[i].hi < tau_max - 1e-9:
                raise ColoringError(
                    f"regions {i} and {j} share color {colors[i]} but are only "
                    f"{regions[j].lo - regions[i].hi} apart (< tau_max={tau_max})"
                )
    return replace(partition, colors=colors)


def make_partition(T: float, l: float, tau_max: float, u: float = 0.0) -> Partition:
    return color_partition(build_partition(T, l, u), tau_max)


def signal_window(region: Region, tau_max: float, T: float,
                  sample_rate: float) -> Tuple[int, int]:
    """Samples covering ``[region.lo, min(region.hi + tau_max, T))``."""
    end = min(region.hi + tau_max, T)
    n = int(round(sample_rate * T))
    lo = math.ceil(region.lo * sample_rate - 1e-9)
    hi = math.ceil(end * sample_rate - 1e-9)
    return max(0, lo), min(n, hi)


def markov_blanket(region_index: int, partition: Partition, tau_max: float,
                   T: float, sample_rate: float = 1.0):
    """Neighbor regions and the signal blocks a region's events interact with.

    Signal blocks are indexed by region: block ``m`` is the samples of region
    ``m``'s time interval. A region's blanket covers every block overlapping its
    own signal window, plus the preceding region, whose window reaches into this
    region's interval.
    """
    n = partition.n_regions
    if not 0 <= region_index < n:
        raise IndexError(f"region {region_index} out of range for {n} regions")
    neighbors = tuple(i for i in (region_index - 1, region_index + 1) if 0 <= i < n)
    regions = partition.regions
    w_lo, w_hi = signal_window(regions[region_index], tau_max, T, sample_rate)
    blocks = set()
    for m, r in enumerate(regions):
        b_lo, b_hi = signal_window(r, 0.0, T, sample_rate)
        if b_lo < w_hi and w_lo < b_hi:
            blocks.add(m)
    if region_index > 0:
        p_lo, p_hi = signal_window(regions[region_index - 1], tau_max, T, sample_rate)
        for m, r in enumerate(regions):
            b_lo, b_hi = signal_window(r, 0.0, T, sample_rate)
            if b_lo < min(p_hi, w_hi) and max(p_lo, w_lo) < b_hi:
                blocks.add(m)
    return neighbors, tuple(sorted(blocks))
