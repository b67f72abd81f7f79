"""Command line: ``chromatic-mh {generate,infer,evaluate,experiment}``.

Exit codes: 0 success, 2 validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import fields
from pathlib import Path
from typing import List, Optional

from ._validation import ValidationError
from .evaluation import DEFAULT_THRESHOLD, match_events, metric_trace
from .experiment import load_spec, run_experiment, write_metric_trace
from .model import Event, ModelConfig
from .samplers import ALGORITHMS, SamplerConfig, Snapshot, run_sampler, write_samples, write_trace
from .worldgen import parse_config, read_config, read_events, read_world, sample_world, write_world

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("chromatic_mh")


# -- generate ---------------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("model (override the config file)")
    for f in fields(ModelConfig):
        g.add_argument(f"--{f.name}", metavar="VALUE", default=None,
                       help="comma-separated positions" if f.name == "stations" else None)


def _config_from_args(args) -> ModelConfig:
    base = read_config(args.config) if args.config else ModelConfig()
    lines = [f"{f.name}={getattr(args, f.name)}" for f in fields(ModelConfig)
             if getattr(args, f.name) is not None]
    return parse_config("\n".join(lines), "command line", base=base)


def cmd_generate(args) -> int:
    config = _config_from_args(args)
    world = sample_world(config, args.seed)
    write_world(world, args.out)
    print(f"events: {len(world.events)}")
    print(f"tau_max: {config.tau_max:g}")
    print(f"wrote {args.out}")
    return EXIT_OK


# -- infer ------------------------------------------------------------------

def sampler_config_from_args(args) -> SamplerConfig:
    k = args.steps_per_epoch
    epochs = args.epochs
    if args.steps is not None:
        # every epoch runs at least k steps, so this many epochs cover the budget
        epochs = max(1, math.ceil(args.steps / k))
    return SamplerConfig(
        algorithm=args.sampler, steps_per_epoch=k, epochs=epochs, n_regions=args.regions,
        workers=args.workers, seed=args.seed, burn_in_fraction=args.burn_in,
        record_every=args.record_every, region_length=args.region_length,
        max_steps=args.steps, max_seconds=args.max_seconds,
    )


def cmd_infer(args) -> int:
    world = read_world(args.world_dir)
    sc = sampler_config_from_args(args)
    trace = run_sampler(world.signals, world.config, sc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out / "trace.csv")
    write_samples(trace, out / "samples.csv")
    print(f"{sc.algorithm}: {trace.total_steps} steps, {trace.accepted} accepted, "
          f"{len(trace.snapshots)} snapshots, final log_joint {trace.rows[-1].log_joint:.6g}")
    return EXIT_OK


# -- evaluate ---------------------------------------------------------------

SAMPLES_HEADER = ["snapshot_id", "event_id", "x", "t"]


def read_samples(path) -> List[Snapshot]:
    """Snapshots from ``samples.csv``; a header-only file is one empty snapshot.

    Wall times come from ``trace.csv`` beside it when present (matched by step).
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        for col in SAMPLES_HEADER:
            if col not in cols:
                raise ValidationError(f"{path}: missing column {col!r}")
        groups = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                step = int(row["snapshot_id"])
                events = groups.setdefault(step, [])
                if row["event_id"] not in ("", None):
                    events.append(Event(float(row["x"]), float(row["t"]), (),
                                        int(row["event_id"])))
            except (TypeError, ValueError):
                raise ValidationError(f"{path}, line {lineno}: malformed row {row}") from None
    walls = _trace_walls(path.parent / "trace.csv")
    if not groups:
        return [Snapshot(0, 0.0, ())]
    return [Snapshot(step, walls.get(step, math.nan), tuple(ev)) for step, ev in groups.items()]


def _trace_walls(path: Path) -> dict:
    if not path.is_file():
        return {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for col in ("wall_seconds", "step"):
            if col not in (reader.fieldnames or []):
                raise ValidationError(f"{path}: missing column {col!r}")
        return {int(r["step"]): float(r["wall_seconds"]) for r in reader}


def cmd_evaluate(args) -> int:
    truth_dir = Path(args.truth_dir)
    config = read_config(truth_dir / "config.txt", require_all=True)
    truth = read_events(truth_dir, config)
    snapshots = read_samples(args.samples)
    rows = metric_trace(snapshots, truth, args.threshold)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_metric_trace(rows, out / "metric_trace.csv")
    report = match_events(truth, snapshots[-1].events, args.threshold)
    with open(out / "match_report.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["true_id", "inferred_id", "distance"])
        for tid, iid, d in report.pairs:
            w.writerow([tid, iid, repr(d)])
    with open(out / "final_metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["precision", "recall", "location_error", "n_true", "n_inferred", "n_matched"])
        w.writerow([repr(report.precision), repr(report.recall), repr(report.location_error),
                    report.n_true, report.n_inferred, report.n_matched])
    print(f"precision {report.precision:.4f}  recall {report.recall:.4f}  "
          f"location_error {report.location_error:.4f}  "
          f"({report.n_matched}/{report.n_true} true, {report.n_inferred} inferred)")
    return EXIT_OK


# -- experiment -------------------------------------------------------------

def cmd_experiment(args) -> int:
    spec = load_spec(args.spec)
    result = run_experiment(spec)
    for row in result["summary"]:
        print(",".join(row))
    if result["failed"]:
        print(f"warning: {result['failed']} of {result['failed'] + result['completed']} "
              f"runs failed; summary covers completed runs", file=sys.stderr)
        if not result["completed"]:
            return EXIT_RUNTIME
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chromatic-mh",
                                     description="Parallel MH inference for seismic events.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a synthetic world")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("infer", help="run a sampler on a world's signals")
    p.add_argument("world_dir")
    p.add_argument("--sampler", choices=ALGORITHMS, default="serial")
    p.add_argument("--steps", type=int, default=None, help="total step budget")
    p.add_argument("--steps-per-epoch", type=int, default=500)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--regions", type=int, default=4)
    p.add_argument("--region-length", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=float, default=0.5)
    p.add_argument("--record-every", type=int, default=500)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="score samples against a world's true events")
    p.add_argument("truth_dir")
    p.add_argument("samples")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a JSON experiment spec")
    p.add_argument("spec")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
