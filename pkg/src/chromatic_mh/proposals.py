"""Metropolis-Hastings move kernels and the accept/reject step.

Every kernel works on a region of the time axis: it only picks, creates or
moves events whose origin time lies in that region. With the whole interval
``[0, T]`` as region they are the ordinary whole-world moves.

The state is a :class:`~chromatic_mh.incremental.LogJointState`. Its prior
treats events as a labelled list (the Poisson term carries ``1/n!``), so a
birth also pays ``1/(n+1)`` for the slot the new event takes in that list and
the matching death recovers it. Without that term the count posterior would be
proportional to ``P(n) / n!``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, List, Optional, Tuple

from ._validation import ValidationError
from .incremental import Change, LogJointState
from .model import NEG_INF, Event, ModelConfig, log_normal
from .partition import Region

MOVES = ("birth", "death", "location", "arrival", "joint")


@dataclass(frozen=True)
class MoveDistribution:
    birth: float = 0.2
    death: float = 0.2
    location: float = 0.3
    arrival: float = 0.2
    joint: float = 0.1

    def __post_init__(self):
        w = self.weights
        if any(not math.isfinite(x) or x < 0 for x in w):
            raise ValidationError(f"move weights must be finite and >= 0, got {w}")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValidationError(f"move weights must sum to 1, got {sum(w)!r}")
        cum, acc = [], 0.0
        for kind, p in zip(MOVES, w):
            acc += p
            if p > 0:
                cum.append((acc, kind))
        object.__setattr__(self, "_cumulative", tuple(cum))

    @property
    def weights(self) -> Tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def log_prob(self, kind: str) -> float:
        p = getattr(self, kind)
        return math.log(p) if p > 0 else NEG_INF

    def choose(self, rng) -> str:
        u = rng.random()
        for edge, kind in self._cumulative:
            if u < edge:
                return kind
        # u fell in the rounding gap below 1.0
        return self._cumulative[-1][1]


@dataclass(frozen=True)
class StepSizes:
    """Gaussian proposal scales.

    ``joint`` is the time jitter of the pair move; its space jitter is
    ``v * joint`` so the move stays symmetric.
    """

    location_x: float = 4.0
    location_t: float = 4.0
    arrival: float = 1.0
    joint: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"step size {f.name} must be >= 0, got {value}")


@dataclass(frozen=True)
class Proposal:
    kind: str
    change: Change
    log_q_forward: float
    log_q_reverse: float
    # False when the candidate leaves the domain where the move is its own
    # reverse (pair move only); such proposals are always rejected
    admissible: bool = True


def events_in(region: Region, state: LogJointState) -> List[Event]:
    return [e for e in state.events.values() if region.contains(e.t)]


def _shifted(event: Event, x: float, t: float, config: ModelConfig, new_id=None) -> Event:
    """Move an event keeping each arrival's residual about its predicted time."""
    v = config.v
    arrivals = tuple(
        a + (t + abs(x - s) / v) - (event.t + abs(event.x - s) / v)
        for s, a in zip(config.stations, event.arrivals)
    )
    return Event(x, t, arrivals, event.id if new_id is None else new_id)


def _birth_density(event: Event, region: Region, config: ModelConfig) -> float:
    lp = -math.log(region.length) - math.log(config.x_max)
    for s, a in zip(config.stations, event.arrivals):
        lp += log_normal(a, event.t + abs(event.x - s) / config.v, config.sigma_arrival)
    return lp


def propose_birth(region: Region, state: LogJointState, config: ModelConfig, rng,
                  moves: MoveDistribution, new_id: int) -> Proposal:
    t = rng.uniform(region.lo, region.hi)
    x = rng.uniform(0.0, config.x_max)
    means = [t + abs(x - s) / config.v for s in config.stations]
    arrivals = tuple(m + config.sigma_arrival * z
                     for m, z in zip(means, rng.standard_normal(len(means))))
    event = Event(x, t, arrivals, new_id)
    k = len(events_in(region, state))
    n = len(state)
    fwd = moves.log_prob("birth") - math.log(n + 1) + _birth_density(event, region, config)
    rev = moves.log_prob("death") - math.log(k + 1)
    return Proposal("birth", Change.insert(event), fwd, rev)


def propose_death(region: Region, state: LogJointState, config: ModelConfig, rng,
                  moves: MoveDistribution) -> Optional[Proposal]:
    local = events_in(region, state)
    k = len(local)
    if k == 0:
        return None
    event = local[rng.integers(k)]
    n = len(state)
    fwd = moves.log_prob("death") - math.log(k)
    rev = moves.log_prob("birth") - math.log(n) + _birth_density(event, region, config)
    return Proposal("death", Change.remove(event), fwd, rev)


def propose_location(region: Region, state: LogJointState, config: ModelConfig, rng,
                     steps: StepSizes) -> Optional[Proposal]:
    local = events_in(region, state)
    if not local:
        return None
    event = local[rng.integers(len(local))]
    dx, dt = rng.standard_normal(2)
    dx *= steps.location_x
    dt *= steps.location_t
    new = _shifted(event, event.x + dx, event.t + dt, config)
    lq = _gauss_logpdf((dx, dt), (steps.location_x, steps.location_t))
    return Proposal("location", Change.modify([event], [new]), lq, lq)


def propose_arrival(region: Region, state: LogJointState, config: ModelConfig, rng,
                    steps: StepSizes) -> Optional[Proposal]:
    local = events_in(region, state)
    if not local:
        return None
    event = local[rng.integers(len(local))]
    j = int(rng.integers(config.n_stations))
    da = steps.arrival * rng.standard_normal()
    arrivals = list(event.arrivals)
    arrivals[j] += da
    new = Event(event.x, event.t, tuple(arrivals), event.id)
    lq = _gauss_logpdf((da,), (steps.arrival,))
    return Proposal("arrival", Change.modify([event], [new]), lq, lq)


def cross_swap(x1, t1, x2, t2, x_left, x_right, v):
    """Exchange the right-station arrivals of two events between stations.

    Each event is re-solved from its own implied arrival at ``x_left`` and the
    other's at ``x_right``. Between the two stations the map is linear,
    involutive and volume preserving.
    """
    mid = 0.5 * (x_left + x_right)
    half_gap = (x_right - x_left) / (2.0 * v)
    aL1 = t1 + abs(x1 - x_left) / v
    aR1 = t1 + abs(x1 - x_right) / v
    aL2 = t2 + abs(x2 - x_left) / v
    aR2 = t2 + abs(x2 - x_right) / v

    def solve(aL, aR):
        return mid + 0.5 * v * (aL - aR), 0.5 * (aL + aR) - half_gap

    return solve(aL1, aR2) + solve(aL2, aR1)


def propose_joint_pair(region: Region, state: LogJointState, config: ModelConfig, rng,
                       steps: StepSizes) -> Optional[Proposal]:
    local = events_in(region, state)
    k = len(local)
    if k < 2:
        return None
    i = int(rng.integers(k))
    j = int(rng.integers(k - 1))
    if j >= i:
        j += 1
    e1, e2 = local[i], local[j]
    p = int(rng.integers(config.n_stations - 1))
    xl, xr = config.stations[p], config.stations[p + 1]
    x1, t1, x2, t2 = cross_swap(e1.x, e1.t, e2.x, e2.t, xl, xr, config.v)
    sx, st = config.v * steps.joint, steps.joint
    z = rng.standard_normal(4)
    jitter = (sx * z[0], st * z[1], sx * z[2], st * z[3])
    x1, t1 = x1 + jitter[0], t1 + jitter[1]
    x2, t2 = x2 + jitter[2], t2 + jitter[3]
    new1 = _shifted(e1, x1, t1, config)
    new2 = _shifted(e2, x2, t2, config)
    ok = all(xl <= x <= xr for x in (e1.x, e2.x, x1, x2))
    lq = _gauss_logpdf(jitter, (sx, st, sx, st))
    return Proposal("joint", Change.modify([e1, e2], [new1, new2]), lq, lq, admissible=ok)


def _gauss_logpdf(values, scales) -> float:
    total = 0.0
    for value, scale in zip(values, scales):
        if scale > 0:
            total += log_normal(value, 0.0, scale)
    return total


def propose(kind: str, region: Region, state: LogJointState, config: ModelConfig, rng,
            moves: MoveDistribution, steps: StepSizes, new_id: int) -> Optional[Proposal]:
    if kind == "birth":
        return propose_birth(region, state, config, rng, moves, new_id)
    if kind == "death":
        return propose_death(region, state, config, rng, moves)
    if kind == "location":
        return propose_location(region, state, config, rng, steps)
    if kind == "arrival":
        return propose_arrival(region, state, config, rng, steps)
    if kind == "joint":
        return propose_joint_pair(region, state, config, rng, steps)
    raise ValueError(f"unknown move kind {kind!r}")


def log_acceptance(state: LogJointState, proposal: Proposal, region: Optional[Region] = None,
                   scorer: Optional[Callable[[Change], float]] = None) -> float:
    """Log of the MH acceptance probability (``-inf`` for a forced rejection)."""
    if not proposal.admissible:
        return NEG_INF
    if region is not None and not all(region.contains(e.t) for e in proposal.change.added):
        return NEG_INF
    delta = (scorer or state.delta)(proposal.change)
    if delta == NEG_INF:
        return NEG_INF
    return min(0.0, delta + proposal.log_q_reverse - proposal.log_q_forward)


def mh_step(state: LogJointState, proposal: Optional[Proposal], rng,
            region: Optional[Region] = None,
            scorer: Optional[Callable[[Change], float]] = None) -> bool:
    """Accept or reject ``proposal`` in place; returns whether it was accepted.

    ``region`` switches on the region constraint: any candidate event whose
    time leaves the region is rejected. Null proposals (``None``) are rejected
    without consuming randomness; every other proposal consumes one uniform.
    """
    if proposal is None:
        return False
    u = rng.random()
    if not proposal.admissible:
        return False
    if region is not None and not all(region.contains(e.t) for e in proposal.change.added):
        return False
    delta = (scorer or state.delta)(proposal.change)
    if delta == NEG_INF:
        return False
    log_alpha = delta + proposal.log_q_reverse - proposal.log_q_forward
    if log_alpha >= 0.0 or u < math.exp(log_alpha):
        state.apply(proposal.change, delta)
        return True
    return False
