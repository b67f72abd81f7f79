"""Multi-world experiments: generate, infer and evaluate, then summarize.

Output layout under ``output_dir``::

    worlds/world_<i>/                  world files
    runs/<algorithm>/world_<i>/run_<r>/ trace.csv, samples.csv, metric_trace.csv
    metrics.csv                        one row per (algorithm, world, run)
    summary.csv                        bootstrap intervals per algorithm and metric
    plot_data.csv                      long format: algorithm,metric,wall_seconds,value

The summary bootstraps per-world means (runs of the same world averaged
first), so with ``n_worlds`` worlds each interval rests on ``n_worlds`` values.
"""

from __future__ import annotations

import concurrent.futures as cf
import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import rng as rngmod
from ._validation import ValidationError, check_int
from .evaluation import DEFAULT_THRESHOLD, bootstrap_ci, match_events, metric_trace
from .model import ModelConfig
from .samplers import ALGORITHMS, SamplerConfig, run_sampler, write_samples, write_trace
from .worldgen import read_world, sample_world, write_world

log = logging.getLogger(__name__)

METRICS_HEADER = ["sampler", "world_seed", "run_seed", "wall_seconds", "precision", "recall",
                  "location_error", "log_joint"]
SUMMARY_HEADER = ["sampler", "metric", "mean", "ci_lo", "ci_hi"]
PLOT_HEADER = ["algorithm", "metric", "wall_seconds", "value"]
SUMMARY_METRICS = ("precision", "recall", "location_error")


@dataclass(frozen=True)
class ExperimentSpec:
    output_dir: str
    n_worlds: int = 2
    runs_per_world: int = 1
    algorithms: Tuple[str, ...] = ("serial",)
    total_steps: Optional[int] = 4000
    time_budget_seconds: Optional[float] = None
    steps_per_epoch: int = 500
    n_regions: int = 4
    workers: int = 1
    cell_workers: int = 1
    seed: int = 0
    burn_in_fraction: float = 0.5
    record_every: int = 500
    threshold: float = DEFAULT_THRESHOLD
    bootstrap_resamples: int = 10000
    bootstrap_level: float = 0.95
    model: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        check_int("n_worlds", self.n_worlds, 1)
        check_int("runs_per_world", self.runs_per_world, 1)
        check_int("cell_workers", self.cell_workers, 1)
        algs = tuple(self.algorithms)
        if not algs or any(a not in ALGORITHMS for a in algs):
            raise ValidationError(f"algorithms must be a non-empty subset of {ALGORITHMS}")
        object.__setattr__(self, "algorithms", algs)
        if self.total_steps is None and self.time_budget_seconds is None:
            raise ValidationError("give total_steps or time_budget_seconds")
        if self.total_steps is not None:
            check_int("total_steps", self.total_steps, 1)
        if not 0 < self.bootstrap_level < 1:
            raise ValidationError("bootstrap_level must lie in (0, 1)")

    def model_config(self) -> ModelConfig:
        values = dict(self.model)
        if "stations" in values:
            values["stations"] = tuple(values["stations"])
        try:
            return ModelConfig(**values)
        except TypeError as exc:
            raise ValidationError(f"model: {exc}") from None

    def sampler_config(self, algorithm: str, seed: int) -> SamplerConfig:
        k = self.steps_per_epoch
        if self.total_steps is not None:
            epochs = max(1, math.ceil(self.total_steps / k))
        else:
            epochs = 10**9
        return SamplerConfig(
            algorithm=algorithm, steps_per_epoch=k, epochs=epochs, n_regions=self.n_regions,
            workers=self.workers, seed=seed, burn_in_fraction=self.burn_in_fraction,
            record_every=self.record_every, max_steps=self.total_steps,
            max_seconds=self.time_budget_seconds,
        )

    def world_seed(self, i: int) -> int:
        return rngmod.derive_seed(self.seed, rngmod.EXPERIMENT, 0, i)

    def run_seed(self, i: int, r: int) -> int:
        return rngmod.derive_seed(self.seed, rngmod.EXPERIMENT, 1, i, r)


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    if "output_dir" in data and not Path(data["output_dir"]).is_absolute():
        data["output_dir"] = str(path.parent / data["output_dir"])
    try:
        return ExperimentSpec(**data)
    except TypeError as exc:
        raise ValidationError(f"{path}: {exc}") from None


@dataclass
class CellResult:
    algorithm: str
    world_index: int
    run_index: int
    world_seed: int
    run_seed: int
    wall_seconds: float = math.nan
    precision: float = math.nan
    recall: float = math.nan
    location_error: float = math.nan
    log_joint: float = math.nan
    plot_rows: List[Tuple[str, str, float, float]] = field(default_factory=list)
    error: Optional[str] = None


def _run_cell(spec: ExperimentSpec, algorithm: str, i: int, r: int,
              world_dir: str) -> CellResult:
    res = CellResult(algorithm, i, r, spec.world_seed(i), spec.run_seed(i, r))
    try:
        world = read_world(world_dir)
        sc = spec.sampler_config(algorithm, res.run_seed)
        if spec.cell_workers > 1:
            sc = SamplerConfig(**{**asdict_shallow(sc), "workers": 1})
        trace = run_sampler(world.signals, world.config, sc)
        out = Path(spec.output_dir) / "runs" / algorithm / f"world_{i}" / f"run_{r}"
        out.mkdir(parents=True, exist_ok=True)
        write_trace(trace, out / "trace.csv")
        write_samples(trace, out / "samples.csv")
        final = trace.snapshots[-1].events if trace.snapshots else trace.final_events
        rep = match_events(world.events, final, spec.threshold)
        res.wall_seconds = trace.wall_seconds
        res.precision, res.recall, res.location_error = rep.precision, rep.recall, rep.location_error
        res.log_joint = trace.rows[-1].log_joint
        if trace.snapshots:
            rows = metric_trace(trace.snapshots, world.events, spec.threshold)
            write_metric_trace(rows, out / "metric_trace.csv")
            for m in rows:
                for name in SUMMARY_METRICS:
                    res.plot_rows.append((algorithm, name, m.wall_seconds, getattr(m, name)))
        for row in trace.rows:
            res.plot_rows.append((algorithm, "log_joint", row.wall_seconds, row.log_joint))
    except Exception as exc:  # recorded per cell, summary uses completed cells
        log.warning("cell %s world %d run %d failed: %s", algorithm, i, r, exc)
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def asdict_shallow(obj) -> dict:
    return {k: getattr(obj, k) for k in obj.__dataclass_fields__}


def write_metric_trace(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "wall_seconds", "precision", "recall", "location_error"])
        for m in rows:
            w.writerow([m.step, repr(m.wall_seconds), repr(m.precision), repr(m.recall),
                        repr(m.location_error)])


def summarize(metrics_rows: Sequence[dict], algorithms: Sequence[str], level: float,
              resamples: int, seed: int) -> List[List[str]]:
    """Summary rows from per-run metric rows (as read back from metrics.csv).

    Runs sharing a world seed are averaged first; NaN values (e.g. location
    error with no matched pair) are left out.
    """
    out = []
    for alg in algorithms:
        rows = [r for r in metrics_rows if r["sampler"] == alg]
        for metric in SUMMARY_METRICS:
            per_world: Dict[str, List[float]] = {}
            for r in rows:
                value = float(r[metric])
                if not math.isnan(value):
                    per_world.setdefault(r["world_seed"], []).append(value)
            values = [sum(v) / len(v) for v in per_world.values()]
            if not values:
                out.append([alg, metric, "nan", "nan", "nan"])
                continue
            ci = bootstrap_ci(values, level, resamples, seed)
            out.append([alg, metric, repr(ci.mean), repr(ci.lo), repr(ci.hi)])
    return out


def read_metrics(path) -> List[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in METRICS_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise ValidationError(f"{path}: missing column {missing[0]!r}")
        return list(reader)


def run_experiment(spec: ExperimentSpec) -> Dict[str, object]:
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = spec.model_config()
    world_dirs = []
    for i in range(spec.n_worlds):
        d = out / "worlds" / f"world_{i}"
        write_world(sample_world(config, spec.world_seed(i)), d)
        world_dirs.append(str(d))

    cells = [(alg, i, r) for alg in spec.algorithms
             for i in range(spec.n_worlds) for r in range(spec.runs_per_world)]
    if spec.cell_workers > 1:
        with cf.ProcessPoolExecutor(max_workers=spec.cell_workers) as pool:
            futures = [pool.submit(_run_cell, spec, a, i, r, world_dirs[i]) for a, i, r in cells]
            results = [f.result() for f in futures]
    else:
        results = [_run_cell(spec, a, i, r, world_dirs[i]) for a, i, r in cells]

    done = [r for r in results if r.error is None]
    failed = [r for r in results if r.error is not None]
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_HEADER)
        for r in done:
            w.writerow([r.algorithm, r.world_seed, r.run_seed, repr(r.wall_seconds),
                        repr(r.precision), repr(r.recall), repr(r.location_error),
                        repr(r.log_joint)])
    with open(out / "plot_data.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PLOT_HEADER)
        for r in done:
            for alg, metric, wall, value in r.plot_rows:
                w.writerow([alg, metric, repr(wall), repr(value)])
    (out / "failures.json").unlink(missing_ok=True)
    if failed:
        with open(out / "failures.json", "w") as fh:
            json.dump([{"algorithm": r.algorithm, "world": r.world_index, "run": r.run_index,
                        "error": r.error} for r in failed], fh, indent=2)

    summary = summarize(read_metrics(out / "metrics.csv"), spec.algorithms,
                        spec.bootstrap_level, spec.bootstrap_resamples, spec.seed)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        w.writerows(summary)
    return {"completed": len(done), "failed": len(failed), "summary": summary,
            "spec": asdict(spec)}
