"""Parallel Metropolis-Hastings inference for a one-dimensional seismic event model."""

from ._validation import ColoringError, ValidationError, WorldFileError
from .estimator import MHEventDetector
from .evaluation import BootstrapCI, MatchReport, bootstrap_ci, match_events, metric_trace
from .incremental import Change, LogJointState, delta_log_joint
from .model import Event, ModelConfig, World, log_joint, tau_max
from .partition import Partition, Region, build_partition, color_partition, make_partition, markov_blanket
from .proposals import MoveDistribution, Proposal, StepSizes, cross_swap, mh_step, propose
from .samplers import (
    ALGORITHMS,
    SamplerConfig,
    Trace,
    run_chromatic,
    run_naive_parallel,
    run_sampler,
    run_serial,
)
from .worldgen import read_world, sample_world, world_from_events, write_world

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BootstrapCI", "Change", "ColoringError", "Event", "LogJointState",
    "MHEventDetector", "MatchReport", "ModelConfig", "MoveDistribution", "Partition",
    "Proposal", "Region", "SamplerConfig", "StepSizes", "Trace", "ValidationError", "World",
    "WorldFileError", "bootstrap_ci", "build_partition", "color_partition", "cross_swap",
    "delta_log_joint", "log_joint", "make_partition", "markov_blanket", "match_events",
    "metric_trace", "mh_step", "propose", "read_world", "run_chromatic", "run_naive_parallel",
    "run_sampler", "run_serial", "sample_world", "tau_max", "world_from_events", "write_world",
]
