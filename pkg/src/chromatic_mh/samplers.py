"""Serial, naive-parallel and chromatic Metropolis-Hastings drivers.

All four algorithms share one scheduler loop. Work is cut into *phases*; a
phase hands a list of regions to the worker pool, every region runs ``k``
MH steps on its own private random stream, and the scheduler merges the
results before starting the next phase (the barrier). What differs is the
phase schedule:

serial
    one phase per epoch: the whole interval ``[0, T]``, no region constraint.
naive
    one phase per epoch holding every region of the ``u = 0`` partition. Each
    region sees only its own events and its own signal window.
chromatic-static / chromatic-dynamic
    one phase per color per epoch. Each region scores moves against the full
    hypothesis, with the other regions' events frozen at their last committed
    values. The dynamic variant redraws the partition offset after each epoch.

Random streams are keyed by ``(epoch, color, region)``, so traces do not
depend on the number of workers.
"""

from __future__ import annotations

import concurrent.futures as cf
import csv
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from . import rng as rngmod
from ._validation import ValidationError, check_fraction, check_int, check_signals
from .incremental import LogJointState, _SampleTerms
from .model import Event, ModelConfig
from .partition import Partition, Region, build_partition, make_partition, signal_window
from .proposals import MoveDistribution, StepSizes, events_in, mh_step, propose

log = logging.getLogger(__name__)

ALGORITHMS = ("serial", "naive", "chromatic-static", "chromatic-dynamic")


@dataclass(frozen=True)
class SamplerConfig:
    algorithm: str = "serial"
    steps_per_epoch: int = 500
    epochs: int = 10
    n_regions: int = 4
    workers: int = 1
    seed: int = 0
    burn_in_fraction: float = 0.5
    record_every: int = 500
    moves: MoveDistribution = field(default_factory=MoveDistribution)
    steps: StepSizes = field(default_factory=StepSizes)
    region_length: Optional[float] = None
    max_steps: Optional[int] = None
    max_seconds: Optional[float] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValidationError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        check_int("steps_per_epoch", self.steps_per_epoch, 1)
        check_int("epochs", self.epochs, 1)
        check_int("n_regions", self.n_regions, 1)
        check_int("workers", self.workers, 1)
        check_int("seed", self.seed, 0)
        check_int("record_every", self.record_every, 1)
        check_fraction("burn_in_fraction", self.burn_in_fraction)
        if self.region_length is not None and not self.region_length > 0:
            raise ValidationError(f"region_length must be > 0, got {self.region_length}")
        if self.max_steps is not None:
            check_int("max_steps", self.max_steps, 1)
        if self.max_seconds is not None and not self.max_seconds > 0:
            raise ValidationError(f"max_seconds must be > 0, got {self.max_seconds}")

    def length(self, T: float) -> float:
        return self.region_length if self.region_length is not None else T / self.n_regions

    def planned_steps(self) -> int:
        """Step budget used for burn-in; ``max_steps`` caps it when set."""
        if self.algorithm == "serial":
            planned = self.steps_per_epoch * self.epochs
        else:
            planned = self.steps_per_epoch * self.epochs * self.n_regions
        return planned if self.max_steps is None else min(planned, self.max_steps)


@dataclass(frozen=True)
class TraceRow:
    wall_seconds: float
    step: int
    log_joint: float
    event_count: int


@dataclass(frozen=True)
class Snapshot:
    step: int
    wall_seconds: float
    events: Tuple[Event, ...]


@dataclass(frozen=True)
class TaskRecord:
    """Where and when one region chain ran; used to audit barriers."""

    seq: int
    epoch: int
    color: int
    region: int
    started: float
    finished: float
    accepted: int


@dataclass
class Trace:
    algorithm: str
    rows: List[TraceRow] = field(default_factory=list)
    snapshots: List[Snapshot] = field(default_factory=list)
    tasks: List[TaskRecord] = field(default_factory=list)
    final_events: Tuple[Event, ...] = ()
    total_steps: int = 0
    accepted: int = 0
    moves: list = field(default_factory=list, repr=False)

    @property
    def wall_seconds(self) -> float:
        return self.rows[-1].wall_seconds if self.rows else 0.0

    def fingerprint(self):
        """Everything except wall-clock times; equal for equal seeds."""
        return (
            tuple((r.step, r.log_joint, r.event_count) for r in self.rows),
            tuple((s.step, s.events) for s in self.snapshots),
            self.final_events,
        )


# -- region chains ----------------------------------------------------------

@dataclass(frozen=True)
class RegionTask:
    events: Tuple[Event, ...]
    region: Region
    region_index: int
    constrain: bool
    window: Optional[Tuple[int, int]]
    steps: int
    seed: int
    epoch: int
    color: int
    id_base: int
    moves: MoveDistribution
    step_sizes: StepSizes
    record_moves: bool = False


@dataclass(frozen=True)
class RegionResult:
    region_index: int
    events: Tuple[Event, ...]
    accepted: int
    started: float
    finished: float
    moves: Tuple = ()


class _Context:
    def __init__(self, signals, config: ModelConfig):
        self.signals = signals
        self.config = config
        self.terms = _SampleTerms(signals, config)


_WORKER_CONTEXT: Optional[_Context] = None


def _init_worker(signals, config):
    global _WORKER_CONTEXT
    _WORKER_CONTEXT = _Context(signals, config)


def run_region_chain(task: RegionTask, ctx: Optional[_Context] = None) -> RegionResult:
    """Run ``task.steps`` MH steps restricted to one region."""
    ctx = ctx or _WORKER_CONTEXT
    started = time.perf_counter()
    cfg = ctx.config
    state = LogJointState(ctx.signals, cfg, task.events, window=task.window, terms=ctx.terms)
    rng = rngmod.stream(task.seed, rngmod.REGION, task.epoch, task.color, task.region_index)
    region = task.region
    limit = region if task.constrain else None
    next_id = task.id_base
    accepted = 0
    log_moves = []
    for _ in range(task.steps):
        kind = task.moves.choose(rng)
        proposal = propose(kind, region, state, cfg, rng, task.moves, task.step_sizes, next_id)
        if kind == "birth":
            next_id += 1
        before = state.log_joint
        if mh_step(state, proposal, rng, limit):
            accepted += 1
            if task.record_moves:
                log_moves.append((proposal.change, state.log_joint - before))
    return RegionResult(
        task.region_index,
        tuple(events_in(region, state)),
        accepted,
        started,
        time.perf_counter(),
        tuple(log_moves),
    )


class WorkerPool:
    """Runs region tasks either inline (``workers=1``) or on worker processes."""

    def __init__(self, signals, config: ModelConfig, workers: int = 1):
        self.workers = workers
        self._ctx = _Context(signals, config)
        self._pool = None
        if workers > 1:
            self._pool = cf.ProcessPoolExecutor(
                max_workers=workers, initializer=_init_worker, initargs=(signals, config)
            )

    def map(self, tasks: Sequence[RegionTask]) -> List[RegionResult]:
        if self._pool is None or len(tasks) == 1:
            return [run_region_chain(t, self._ctx) for t in tasks]
        return list(self._pool.map(run_region_chain, tasks))

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# -- schedules --------------------------------------------------------------

@dataclass(frozen=True)
class _Phase:
    color: int
    regions: Tuple[Tuple[int, Region], ...]
    constrain: bool
    local: bool  # region sees only its own events and signal window


def _serial_schedule(config, sc, epoch, partition):
    whole = Region(0.0, config.T, True)
    return [_Phase(0, ((0, whole),), False, False)]


def _naive_schedule(config, sc, epoch, partition):
    return [_Phase(0, tuple(enumerate(partition.regions)), True, True)]


def _chromatic_schedule(config, sc, epoch, partition):
    regions = partition.regions
    phases = []
    for c in range(partition.n_colors):
        members = tuple((i, regions[i]) for i in partition.regions_of_color(c))
        phases.append(_Phase(c, members, True, False))
    return phases


def _drive(signals, config: ModelConfig, sc: SamplerConfig,
           init_events: Sequence[Event] = (), record_moves: bool = False) -> Trace:
    signals = check_signals(signals, config)
    T = config.T
    tau = config.tau_max
    algorithm = sc.algorithm
    partition: Optional[Partition] = None
    if algorithm == "naive":
        partition = build_partition(T, sc.length(T), 0.0)
        schedule = _naive_schedule
    elif algorithm.startswith("chromatic"):
        partition = make_partition(T, sc.length(T), tau, 0.0)
        schedule = _chromatic_schedule
    else:
        schedule = _serial_schedule
    dynamic = algorithm == "chromatic-dynamic"
    scheduler_rng = rngmod.stream(sc.seed, rngmod.SCHEDULER)

    events = tuple(sorted(init_events, key=lambda e: e.id))
    next_id = max((e.id for e in events), default=-1) + 1
    trace = Trace(algorithm)
    burn_in = sc.burn_in_fraction * sc.planned_steps()
    last_snapshot = -math.inf
    total_steps = 0
    seq = 0
    moves_log = []

    state = LogJointState(signals, config, events)
    t0 = time.perf_counter()
    trace.rows.append(TraceRow(0.0, 0, state.log_joint, len(events)))

    with WorkerPool(signals, config, sc.workers) as pool:
        for epoch in range(sc.epochs):
            for phase in schedule(config, sc, epoch, partition):
                tasks = []
                for slot, (index, region) in enumerate(phase.regions):
                    own = tuple(e for e in events if region.contains(e.t))
                    tasks.append(RegionTask(
                        events=own if phase.local else events,
                        region=region,
                        region_index=index,
                        constrain=phase.constrain,
                        window=signal_window(region, tau, T, config.sample_rate)
                        if phase.local else None,
                        steps=sc.steps_per_epoch,
                        seed=sc.seed,
                        epoch=epoch,
                        color=phase.color,
                        id_base=next_id + slot * sc.steps_per_epoch,
                        moves=sc.moves,
                        step_sizes=sc.steps,
                        record_moves=record_moves,
                    ))
                next_id += len(tasks) * sc.steps_per_epoch
                results = pool.map(tasks)

                touched = [r for _, r in phase.regions]
                kept = [e for e in events if not any(r.contains(e.t) for r in touched)]
                for res in results:
                    kept.extend(res.events)
                    trace.accepted += res.accepted
                    trace.tasks.append(TaskRecord(seq, epoch, phase.color, res.region_index,
                                                  res.started, res.finished, res.accepted))
                    if record_moves:
                        moves_log.append((epoch, phase.color, res.region_index, events, res.moves))
                seq += 1
                events = tuple(sorted(kept, key=lambda e: e.id))
                total_steps += sc.steps_per_epoch * len(tasks)

                state = LogJointState(signals, config, events)
                wall = time.perf_counter() - t0
                trace.rows.append(TraceRow(wall, total_steps, state.log_joint, len(events)))
                if total_steps > burn_in and total_steps - last_snapshot >= sc.record_every:
                    trace.snapshots.append(Snapshot(total_steps, wall, events))
                    last_snapshot = total_steps

                if sc.max_steps is not None and total_steps >= sc.max_steps:
                    break
            if sc.max_steps is not None and total_steps >= sc.max_steps:
                break
            if sc.max_seconds is not None and time.perf_counter() - t0 >= sc.max_seconds:
                break
            if dynamic:
                u = scheduler_rng.uniform(0.0, partition.length)
                partition = make_partition(T, partition.length, tau, u)

    trace.final_events = events
    trace.total_steps = total_steps
    if record_moves:
        trace.moves = moves_log
    return trace


def run_serial(signals, config: ModelConfig, sampler_config: SamplerConfig,
               init_events: Sequence[Event] = ()) -> Trace:
    sc = _with_algorithm(sampler_config, "serial")
    return _drive(signals, config, sc, init_events)


def run_naive_parallel(signals, config: ModelConfig, sampler_config: SamplerConfig,
                       init_events: Sequence[Event] = ()) -> Trace:
    sc = _with_algorithm(sampler_config, "naive")
    return _drive(signals, config, sc, init_events)


def run_chromatic(signals, config: ModelConfig, sampler_config: SamplerConfig,
                  dynamic: bool = False, init_events: Sequence[Event] = (),
                  record_moves: bool = False) -> Trace:
    name = "chromatic-dynamic" if dynamic else "chromatic-static"
    sc = _with_algorithm(sampler_config, name)
    return _drive(signals, config, sc, init_events, record_moves=record_moves)


def run_sampler(signals, config: ModelConfig, sampler_config: SamplerConfig,
                init_events: Sequence[Event] = ()) -> Trace:
    return _drive(signals, config, sampler_config, init_events)


def _with_algorithm(sc: SamplerConfig, algorithm: str) -> SamplerConfig:
    if sc.algorithm == algorithm:
        return sc
    return replace(sc, algorithm=algorithm)


# -- trace files ------------------------------------------------------------

def write_trace(trace: Trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["wall_seconds", "step", "log_joint", "event_count"])
        for r in trace.rows:
            w.writerow([repr(r.wall_seconds), r.step, repr(r.log_joint), r.event_count])


def write_samples(trace: Trace, path):
    """One row per event per snapshot; an empty snapshot is a row with blank fields.

    ``snapshot_id`` is the global step count at which the snapshot was taken,
    which lines it up with ``trace.csv``.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snapshot_id", "event_id", "x", "t"])
        for snap in trace.snapshots:
            if not snap.events:
                w.writerow([snap.step, "", "", ""])
            for e in snap.events:
                w.writerow([snap.step, e.id, repr(e.x), repr(e.t)])
