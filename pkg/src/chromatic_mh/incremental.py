"""Incremental log-joint scoring.

:class:`LogJointState` keeps the current event set together with an integer
coverage count per station and sample (how many event signals are active
there). Scoring a :class:`Change` only touches the samples whose coverage
changes, plus the prior and arrival terms of the events involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from ._kernels import add_cover, signal_delta
from .model import (
    LOG_2PI,
    NEG_INF,
    Event,
    ModelConfig,
    World,
    in_support,
    log_normal,
    log_poisson,
)


@dataclass(frozen=True)
class Change:
    """Remove ``removed`` then add ``added``.

    A modification is a removal and an addition sharing an id.
    """

    removed: Tuple[Event, ...] = ()
    added: Tuple[Event, ...] = ()

    @classmethod
    def insert(cls, event):
        return cls((), (event,))

    @classmethod
    def remove(cls, event):
        return cls((event,), ())

    @classmethod
    def modify(cls, old: Sequence[Event], new: Sequence[Event]):
        return cls(tuple(old), tuple(new))

    def inverse(self) -> "Change":
        return Change(self.added, self.removed)


def cover_range(a: float, config: ModelConfig) -> Tuple[int, int]:
    """Sample indices ``tau`` with ``a <= tau / sample_rate < a + t_s``, clipped."""
    sr = config.sample_rate
    n = config.n_samples
    end = a + config.t_s
    lo = math.ceil(a * sr)
    # fix up float rounding so the rule matches tau / sr exactly
    while lo / sr < a:
        lo += 1
    while lo > 0 and (lo - 1) / sr >= a:
        lo -= 1
    hi = math.ceil(end * sr)
    while hi / sr < end:
        hi += 1
    while hi > 0 and (hi - 1) / sr >= end:
        hi -= 1
    lo = min(max(lo, 0), n)
    return lo, max(lo, min(hi, n))


class _SampleTerms:
    """Per-sample log-likelihood as a function of coverage count."""

    TABLE_SIZE = 64

    def __init__(self, signals: np.ndarray, config: ModelConfig):
        self.s2 = np.ascontiguousarray(np.asarray(signals, dtype=np.float64) ** 2)
        self.var_noise = config.var_noise
        self.var_event = config.var_event
        var = self.var_noise + np.arange(self.TABLE_SIZE) * self.var_event
        self.log_term = -0.5 * (LOG_2PI + np.log(var))
        self.inv_2var = 1.0 / (2.0 * var)

    def value(self, counts: np.ndarray, s2: np.ndarray) -> np.ndarray:
        var = self.var_noise + counts * self.var_event
        return -0.5 * (LOG_2PI + np.log(var)) - s2 / (2.0 * var)


class LogJointState:
    """Mutable scorer for one hypothesis.

    ``window`` restricts the signal term to a sample range (used by the naive
    parallel sampler, where each region only sees its own signal block).
    """

    def __init__(self, signals, config: ModelConfig, events: Iterable[Event] = (),
                 window: Optional[Tuple[int, int]] = None, terms: _SampleTerms = None):
        self.config = config
        self.signals = signals
        self.terms = terms if terms is not None else _SampleTerms(signals, config)
        n = config.n_samples
        self.window = (0, n) if window is None else (int(window[0]), int(window[1]))
        self.counts = np.zeros((config.n_stations, n), dtype=np.int64)
        self.events: Dict[int, Event] = {}
        self._log_x = math.log(config.x_max)
        self._log_T = math.log(config.T)
        self._rate = config.lambda_rate * config.T
        for e in events:
            self.events[e.id] = e
            self._cover(e, 1)
        self.log_joint = self.recompute()

    # -- bookkeeping ------------------------------------------------------
    def _cover(self, event: Event, sign: int):
        add_cover(self.counts, np.asarray(event.arrivals), sign,
                  self.config.sample_rate, self.config.t_s)

    def __len__(self):
        return len(self.events)

    def snapshot(self) -> Tuple[Event, ...]:
        return tuple(sorted(self.events.values(), key=lambda e: e.id))

    def to_world(self) -> World:
        return World(self.config, self.snapshot(), self.signals)

    # -- scoring ------------------------------------------------------------
    def _prior(self, n: int) -> float:
        return log_poisson(n, self._rate) - n * (self._log_x + self._log_T)

    def _arrival_terms(self, event: Event) -> float:
        cfg = self.config
        total = 0.0
        for s, a in zip(cfg.stations, event.arrivals):
            total += log_normal(a, event.t + abs(event.x - s) / cfg.v, cfg.sigma_arrival)
        return total

    def recompute(self) -> float:
        """Full log-joint of the current events from the cached coverage counts."""
        if not all(in_support(e, self.config) for e in self.events.values()):
            return NEG_INF
        lo, hi = self.window
        ll = self.terms.value(self.counts[:, lo:hi], self.terms.s2[:, lo:hi]).sum()
        arrivals = sum(self._arrival_terms(e) for e in self.events.values())
        return self._prior(len(self.events)) + arrivals + float(ll)

    def delta(self, change: Change) -> float:
        """``log_joint(after) - log_joint(before)`` without applying the change."""
        cfg = self.config
        for e in change.added:
            if not in_support(e, cfg):
                return NEG_INF
        n_old = len(self.events)
        n_new = n_old - len(change.removed) + len(change.added)
        d = self._prior(n_new) - self._prior(n_old)
        for e in change.added:
            d += self._arrival_terms(e)
        for e in change.removed:
            d -= self._arrival_terms(e)
        return d + self._signal_delta(change)

    def _signal_delta(self, change: Change) -> float:
        cfg = self.config
        n_st = cfg.n_stations
        removed = np.array([e.arrivals for e in change.removed], dtype=np.float64)
        added = np.array([e.arrivals for e in change.added], dtype=np.float64)
        return signal_delta(
            self.counts, self.terms.s2,
            removed.reshape(len(change.removed), n_st),
            added.reshape(len(change.added), n_st),
            self.window[0], self.window[1], cfg.sample_rate, cfg.t_s,
            cfg.var_noise, cfg.var_event, self.terms.log_term, self.terms.inv_2var,
        )

    def apply(self, change: Change, delta: Optional[float] = None):
        """Commit ``change``; ``delta`` (if already computed) updates the running total."""
        if delta is None:
            delta = self.delta(change)
        removed_ids = {e.id for e in change.removed}
        added_ids = {e.id for e in change.added}
        for e in change.added:
            if e.id in self.events and e.id not in removed_ids:
                raise KeyError(f"event id {e.id} already present")
        for e in change.removed:
            self._cover(self.events[e.id], -1)
            if e.id not in added_ids:
                del self.events[e.id]
        # modified events keep their slot so iteration order stays stable
        for e in change.added:
            self.events[e.id] = e
            self._cover(e, 1)
        self.log_joint += delta


def delta_log_joint(world: World, change: Change) -> float:
    """Log-joint difference caused by ``change``, touching only affected samples."""
    return LogJointState(world.signals, world.config, world.events).delta(change)
