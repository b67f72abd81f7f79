"""Matching inferred events to ground truth, metric traces and bootstrap intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import rng as rngmod
from ._validation import ValidationError

DEFAULT_THRESHOLD = 12.0


@dataclass(frozen=True)
class MatchReport:
    pairs: Tuple[Tuple[int, int, float], ...]
    precision: float
    recall: float
    location_error: float
    n_true: int
    n_inferred: int
    n_matched: int


def _order(events):
    return sorted(events, key=lambda e: (e.t, e.x))


def match_events(true_events, inferred_events, threshold: float = DEFAULT_THRESHOLD) -> MatchReport:
    """Greedy bipartite matching of true to inferred events.

    True events are visited in ascending ``(t, x)``. Each takes the nearest
    still-unmatched inferred event (Euclidean in the ``(x, t)`` plane; ties go
    to the earlier inferred event in ``(t, x)`` order) and keeps it only if
    both ``|dx|`` and ``|dt|`` are below ``threshold``. Precision is 1 when
    nothing was inferred and recall is 1 when there was nothing to find.
    """
    if not threshold > 0:
        raise ValidationError(f"threshold must be > 0, got {threshold}")
    truth = _order(true_events)
    inferred = _order(inferred_events)
    free = list(range(len(inferred)))
    pairs = []
    for te in truth:
        if not free:
            break
        best, best_d = None, math.inf
        for idx in free:
            ie = inferred[idx]
            d = math.hypot(ie.x - te.x, ie.t - te.t)
            if d < best_d:
                best, best_d = idx, d
        ie = inferred[best]
        if abs(ie.t - te.t) < threshold and abs(ie.x - te.x) < threshold:
            pairs.append((te.id, ie.id, best_d))
            free.remove(best)
    n_true, n_inf, n_match = len(truth), len(inferred), len(pairs)
    precision = n_match / n_inf if n_inf else 1.0
    recall = n_match / n_true if n_true else 1.0
    error = sum(p[2] for p in pairs) / n_match if n_match else math.nan
    return MatchReport(tuple(pairs), precision, recall, error, n_true, n_inf, n_match)


@dataclass(frozen=True)
class MetricRow:
    step: int
    wall_seconds: float
    precision: float
    recall: float
    location_error: float


def metric_trace(snapshots, true_events, threshold: float = DEFAULT_THRESHOLD) -> List[MetricRow]:
    """Match every snapshot against the truth.

    ``snapshots`` are :class:`~chromatic_mh.samplers.Snapshot` objects (or
    anything with ``step``, ``wall_seconds`` and ``events``).
    """
    if not snapshots:
        raise ValidationError("metric_trace needs at least one snapshot")
    rows = []
    for snap in snapshots:
        rep = match_events(true_events, snap.events, threshold)
        rows.append(MetricRow(snap.step, snap.wall_seconds, rep.precision, rep.recall,
                              rep.location_error))
    return rows


@dataclass(frozen=True)
class BootstrapCI:
    mean: float
    lo: float
    hi: float
    level: float
    resamples: int


def bootstrap_ci(values: Sequence[float], level: float = 0.95, resamples: int = 10000,
                 seed: int = 0) -> BootstrapCI:
    """Percentile bootstrap interval for the mean."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValidationError("bootstrap_ci needs at least one value")
    if not 0 < level < 1:
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    if resamples < 1:
        raise ValidationError(f"resamples must be >= 1, got {resamples}")
    rng = rngmod.stream(seed, rngmod.BOOTSTRAP)
    n = x.size
    means = np.empty(resamples)
    chunk = max(1, 2_000_000 // n)
    for start in range(0, resamples, chunk):
        stop = min(resamples, start + chunk)
        idx = rng.integers(0, n, size=(stop - start, n))
        means[start:stop] = x[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    mean = float(x.mean())
    # percentile bounds can miss the sample mean by rounding on degenerate data
    return BootstrapCI(mean, min(float(lo), mean), max(float(hi), mean), level, resamples)
