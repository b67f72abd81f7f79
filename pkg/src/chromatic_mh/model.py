"""Domain types and log-densities of the 1-D seismic event model.

Events ``(x, t)`` arrive at every station with a Gaussian arrival time centred
on ``t + |x - x_station| / v``. Each arrival switches on an extra
``var_event`` of zero-mean Gaussian signal variance for ``t_s`` time units;
the observed trace is zero-mean Gaussian with the summed variance.

All functions here are pure and operate on immutable values. The incremental
scorer used inside the samplers lives in :mod:`chromatic_mh.incremental`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

import numpy as np

from ._validation import ValidationError, check_positive, check_signals

NEG_INF = -math.inf
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ModelConfig:
    """Generative constants. Defaults are the package's working values."""

    lambda_rate: float = 0.02
    T: float = 240.0
    x_max: float = 100.0
    v: float = 2.0
    sigma_arrival: float = 2.0
    t_s: float = 20.0
    var_noise: float = 1.0
    var_event: float = 4.0
    sample_rate: float = 1.0
    stations: Tuple[float, ...] = (0.0, 33.0, 66.0, 100.0)

    def __post_init__(self):
        for name in ("lambda_rate", "T", "x_max", "v", "sigma_arrival", "t_s",
                     "var_noise", "var_event", "sample_rate"):
            object.__setattr__(self, name, check_positive(name, getattr(self, name)))
        if not self.var_event > self.var_noise:
            raise ValidationError(
                f"var_event must exceed var_noise, got var_event={self.var_event} "
                f"var_noise={self.var_noise}"
            )
        stations = tuple(float(s) for s in self.stations)
        if len(stations) < 2:
            raise ValidationError("at least two stations are required")
        if any(b < a for a, b in zip(stations, stations[1:])):
            raise ValidationError(f"stations must be sorted ascending, got {stations}")
        if stations[0] < 0 or stations[-1] > self.x_max:
            raise ValidationError(f"stations must lie in [0, x_max={self.x_max}]")
        object.__setattr__(self, "stations", stations)
        n = self.sample_rate * self.T
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValidationError(f"sample_rate * T must be an integer, got {n}")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate * self.T))

    @property
    def n_stations(self) -> int:
        return len(self.stations)

    @property
    def tau_max(self) -> float:
        return self.x_max / self.v


@dataclass(frozen=True)
class Event:
    """One latent event: location, origin time and one arrival per station."""

    x: float
    t: float
    arrivals: Tuple[float, ...]
    id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "arrivals", tuple(float(a) for a in self.arrivals))

    def predicted_arrivals(self, config: ModelConfig) -> Tuple[float, ...]:
        return tuple(self.t + abs(self.x - s) / config.v for s in config.stations)


def predicted_arrival(x, t, station_x, v):
    return t + abs(x - station_x) / v


def in_support(event: Event, config: ModelConfig) -> bool:
    return 0.0 <= event.x <= config.x_max and 0.0 <= event.t <= config.T


def check_event(event: Event, config: ModelConfig) -> Event:
    if len(event.arrivals) != config.n_stations:
        raise ValidationError(
            f"event {event.id} has {len(event.arrivals)} arrivals, "
            f"expected {config.n_stations}"
        )
    if not in_support(event, config):
        raise ValidationError(
            f"event {event.id} at (x={event.x}, t={event.t}) lies outside "
            f"[0, {config.x_max}] x [0, {config.T}]"
        )
    if not all(math.isfinite(a) for a in event.arrivals):
        raise ValidationError(f"event {event.id} has non-finite arrivals")
    return event


@dataclass(frozen=True, eq=False)
class World:
    """A hypothesis (set of events) together with the observed signals."""

    config: ModelConfig
    events: Tuple[Event, ...]
    signals: np.ndarray = field(repr=False)

    def __post_init__(self):
        events = tuple(sorted(self.events, key=lambda e: e.id))
        ids = [e.id for e in events]
        if len(set(ids)) != len(ids):
            raise ValidationError("event ids must be unique")
        for e in events:
            check_event(e, self.config)
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "signals", check_signals(self.signals, self.config))

    def __eq__(self, other):
        if not isinstance(other, World):
            return NotImplemented
        return (
            self.config == other.config
            and self.events == other.events
            and np.array_equal(self.signals, other.signals)
        )

    __hash__ = None

    def with_events(self, events: Iterable[Event]) -> "World":
        return World(self.config, tuple(events), self.signals)


def tau_max(config: ModelConfig) -> float:
    """Longest travel time across the spatial extent, ``x_max / v``."""
    return config.x_max / config.v


def log_poisson(n: int, mean: float) -> float:
    return n * math.log(mean) - mean - math.lgamma(n + 1)


def log_event_prior(events: Sequence[Event], config: ModelConfig) -> float:
    """Poisson count term (with its ``1/n!``) plus uniform location and time terms."""
    n = len(events)
    for e in events:
        if not in_support(e, config):
            return NEG_INF
    rate = config.lambda_rate * config.T
    return log_poisson(n, rate) - n * (math.log(config.x_max) + math.log(config.T))


def log_normal(value, mean, sigma):
    z = (value - mean) / sigma
    return -math.log(sigma) - 0.5 * LOG_2PI - 0.5 * z * z


def log_arrival_density(event: Event, station_index: int, config: ModelConfig) -> float:
    mean = predicted_arrival(event.x, event.t, config.stations[station_index], config.v)
    return log_normal(event.arrivals[station_index], mean, config.sigma_arrival)


def _window(config: ModelConfig, window):
    n = config.n_samples
    if window is None:
        return 0, n
    lo, hi = int(window[0]), int(window[1])
    if not 0 <= lo <= hi <= n:
        raise ValidationError(f"window {window} outside [0, {n}]")
    return lo, hi


def variance_profile(events: Sequence[Event], config: ModelConfig, window=None) -> np.ndarray:
    """Per-station, per-sample variance over ``window`` (sample-index range)."""
    lo, hi = _window(config, window)
    times = np.arange(lo, hi) / config.sample_rate
    var = np.full((config.n_stations, hi - lo), config.var_noise)
    for e in events:
        for j, a in enumerate(e.arrivals):
            covered = (times >= a) & (times < a + config.t_s)
            var[j, covered] += config.var_event
    return var


def log_signal_likelihood(signals, events: Sequence[Event], config: ModelConfig,
                          window=None) -> float:
    """Zero-mean diagonal Gaussian log-likelihood of the signals in ``window``."""
    lo, hi = _window(config, window)
    s = np.asarray(signals, dtype=np.float64)[:, lo:hi]
    var = variance_profile(events, config, (lo, hi))
    return float(np.sum(-0.5 * np.log(2.0 * np.pi * var) - s * s / (2.0 * var)))


def log_joint(world: World, window=None) -> float:
    prior = log_event_prior(world.events, world.config)
    if prior == NEG_INF:
        return NEG_INF
    arrivals = sum(
        log_arrival_density(e, j, world.config)
        for e in world.events
        for j in range(world.config.n_stations)
    )
    return prior + arrivals + log_signal_likelihood(
        world.signals, world.events, world.config, window
    )


def unchecked_world(config: ModelConfig, events: Sequence[Event], signals) -> World:
    """Build a World without support checks, for scoring out-of-support hypotheses."""
    w = object.__new__(World)
    object.__setattr__(w, "config", config)
    object.__setattr__(w, "events", tuple(events))
    object.__setattr__(w, "signals", np.asarray(signals, dtype=np.float64))
    return w
