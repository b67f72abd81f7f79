"""Forward sampling of synthetic worlds and their on-disk format.

A world directory holds four files::

    config.txt     key=value, one ModelConfig field per line
    events.csv     id,x,t
    arrivals.csv   event_id,station,arrival
    signals.csv    station,sample,value

Floats are written with ``repr`` (shortest round-trip form), so reading a
written world gives back bit-identical values.
"""

from __future__ import annotations

import csv
import os
from dataclasses import fields
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import rng as rngmod
from ._validation import ValidationError, WorldFileError
from .model import Event, ModelConfig, World, variance_profile

CONFIG_FILE = "config.txt"
EVENTS_FILE = "events.csv"
ARRIVALS_FILE = "arrivals.csv"
SIGNALS_FILE = "signals.csv"

EVENTS_HEADER = ["id", "x", "t"]
ARRIVALS_HEADER = ["event_id", "station", "arrival"]
SIGNALS_HEADER = ["station", "sample", "value"]


def sample_events(config: ModelConfig, rng) -> List[Event]:
    n = int(rng.poisson(config.lambda_rate * config.T))
    xs = rng.uniform(0.0, config.x_max, n)
    ts = rng.uniform(0.0, config.T, n)
    noise = rng.standard_normal((n, config.n_stations))
    stations = np.asarray(config.stations)
    means = ts[:, None] + np.abs(xs[:, None] - stations[None, :]) / config.v
    arrivals = means + config.sigma_arrival * noise
    return [Event(float(xs[i]), float(ts[i]), tuple(arrivals[i].tolist()), i) for i in range(n)]


def sample_signals(events, config: ModelConfig, rng) -> np.ndarray:
    var = variance_profile(events, config)
    return np.sqrt(var) * rng.standard_normal(var.shape)


def sample_world(config: ModelConfig, seed: int) -> World:
    """Draw events, arrivals and signals from the generative model.

    Uses the single stream ``rng.stream(seed, WORLD)``: event count, then
    locations, times, arrival noise, and finally the signal samples.
    """
    rng = rngmod.stream(seed, rngmod.WORLD)
    events = sample_events(config, rng)
    return World(config, tuple(events), sample_signals(events, config, rng))


def world_from_events(config: ModelConfig, events, seed: int) -> World:
    """Planted-event world: given events, signals drawn from the model."""
    rng = rngmod.stream(seed, rngmod.WORLD, 1)
    return World(config, tuple(events), sample_signals(events, config, rng))


# -- config text ------------------------------------------------------------

_FIELD_NAMES = [f.name for f in fields(ModelConfig)]


def format_config(config: ModelConfig) -> str:
    lines = []
    for name in _FIELD_NAMES:
        value = getattr(config, name)
        if name == "stations":
            text = ",".join(repr(float(s)) for s in value)
        else:
            text = repr(float(value))
        lines.append(f"{name}={text}")
    return "\n".join(lines) + "\n"


def parse_config(text: str, source="config", require_all: bool = False,
                 base: Optional[ModelConfig] = None) -> ModelConfig:
    """Parse ``key=value`` lines. Blank lines and ``#`` comments are skipped."""
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{source}, line {lineno}: expected key=value, got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _FIELD_NAMES:
            raise ValidationError(f"{source}, line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"{source}, line {lineno}: duplicate key {key!r}")
        try:
            if key == "stations":
                values[key] = tuple(float(s) for s in value.split(",") if s.strip())
            else:
                values[key] = float(value)
        except ValueError:
            raise ValidationError(
                f"{source}, line {lineno}: key {key!r} has non-numeric value {value!r}"
            ) from None
    if require_all:
        missing = [k for k in _FIELD_NAMES if k not in values]
        if missing:
            raise ValidationError(f"{source}: missing keys {', '.join(missing)}")
    if base is not None:
        values = {**{k: getattr(base, k) for k in _FIELD_NAMES}, **values}
    try:
        return ModelConfig(**values)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def read_config(path, require_all: bool = False) -> ModelConfig:
    path = Path(path)
    if not path.is_file():
        raise WorldFileError("file not found", path)
    return parse_config(path.read_text(), str(path), require_all=require_all)


# -- world files ----------------------------------------------------------

def write_world(world: World, directory) -> Dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "config": directory / CONFIG_FILE,
        "events": directory / EVENTS_FILE,
        "arrivals": directory / ARRIVALS_FILE,
        "signals": directory / SIGNALS_FILE,
    }
    paths["config"].write_text(format_config(world.config))
    with open(paths["events"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENTS_HEADER)
        for e in world.events:
            w.writerow([e.id, repr(e.x), repr(e.t)])
    with open(paths["arrivals"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ARRIVALS_HEADER)
        for e in world.events:
            for j, a in enumerate(e.arrivals):
                w.writerow([e.id, j, repr(a)])
    with open(paths["signals"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SIGNALS_HEADER)
        for j, row in enumerate(world.signals):
            for tau, value in enumerate(row.tolist()):
                w.writerow([j, tau, repr(value)])
    return paths


def _read_rows(path: Path, header):
    if not path.is_file():
        raise WorldFileError("file not found", path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            found = next(reader)
        except StopIteration:
            raise WorldFileError("file is empty (missing header)", path) from None
        if [h.strip() for h in found] != header:
            for col in header:
                if col not in found:
                    raise WorldFileError(
                        f"missing column {col!r}; expected header {','.join(header)}", path
                    )
            raise WorldFileError(
                f"header {','.join(found)} does not match {','.join(header)}", path
            )
        rows = []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise WorldFileError(f"expected {len(header)} fields, found {len(row)}", path, i)
            rows.append((i, row))
    return rows


def _num(cast, text, path, row, column):
    try:
        return cast(text)
    except ValueError:
        raise WorldFileError(f"column {column!r}: cannot parse {text!r}", path, row) from None


def read_events(directory, config: ModelConfig) -> List[Event]:
    """Events with their arrivals, checked for referential integrity."""
    directory = Path(directory)
    ev_path = directory / EVENTS_FILE
    ar_path = directory / ARRIVALS_FILE
    coords = {}
    for i, row in _read_rows(ev_path, EVENTS_HEADER):
        eid = _num(int, row[0], ev_path, i, "id")
        if eid in coords:
            raise WorldFileError(f"duplicate event id {eid}", ev_path, i)
        coords[eid] = (_num(float, row[1], ev_path, i, "x"), _num(float, row[2], ev_path, i, "t"))
    arrivals: Dict[int, Dict[int, float]] = {eid: {} for eid in coords}
    for i, row in _read_rows(ar_path, ARRIVALS_HEADER):
        eid = _num(int, row[0], ar_path, i, "event_id")
        station = _num(int, row[1], ar_path, i, "station")
        value = _num(float, row[2], ar_path, i, "arrival")
        if eid not in arrivals:
            raise WorldFileError(f"arrival references unknown event id {eid}", ar_path, i)
        if not 0 <= station < config.n_stations:
            raise WorldFileError(
                f"station {station} out of range [0, {config.n_stations})", ar_path, i
            )
        if station in arrivals[eid]:
            raise WorldFileError(f"duplicate arrival for event {eid} station {station}", ar_path, i)
        arrivals[eid][station] = value
    events = []
    for eid, (x, t) in coords.items():
        per = arrivals[eid]
        if len(per) != config.n_stations:
            raise WorldFileError(
                f"event {eid} has {len(per)} arrivals, expected {config.n_stations}", ar_path
            )
        events.append(Event(x, t, tuple(per[j] for j in range(config.n_stations)), eid))
    return events


def read_signals(directory, config: ModelConfig) -> np.ndarray:
    path = Path(directory) / SIGNALS_FILE
    rows = _read_rows(path, SIGNALS_HEADER)
    n_st, n = config.n_stations, config.n_samples
    if len(rows) != n_st * n:
        raise WorldFileError(
            f"expected {n_st * n} rows ({n_st} stations x {n} samples), found {len(rows)}", path
        )
    signals = np.empty((n_st, n))
    seen = np.zeros((n_st, n), dtype=bool)
    for i, row in rows:
        j = _num(int, row[0], path, i, "station")
        tau = _num(int, row[1], path, i, "sample")
        if not (0 <= j < n_st and 0 <= tau < n):
            raise WorldFileError(f"station/sample ({j}, {tau}) out of range", path, i)
        if seen[j, tau]:
            raise WorldFileError(f"duplicate sample ({j}, {tau})", path, i)
        seen[j, tau] = True
        signals[j, tau] = _num(float, row[2], path, i, "value")
    return signals


def read_world(directory) -> World:
    directory = Path(directory)
    if not directory.is_dir():
        raise WorldFileError("world directory not found", directory)
    config = read_config(directory / CONFIG_FILE, require_all=True)
    events = read_events(directory, config)
    signals = read_signals(directory, config)
    try:
        return World(config, tuple(events), signals)
    except ValidationError as exc:
        raise WorldFileError(str(exc), directory / EVENTS_FILE) from None


def has_truth(directory) -> bool:
    d = Path(directory)
    return os.path.isfile(d / EVENTS_FILE) and os.path.isfile(d / ARRIVALS_FILE)
