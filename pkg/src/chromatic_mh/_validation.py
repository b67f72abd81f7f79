"""Input validation helpers shared by the estimator, the file readers and the CLI."""

from __future__ import annotations

import math
from numbers import Integral, Real

import numpy as np


class ValidationError(ValueError):
    """Raised when a configuration or input value violates its contract."""


class ColoringError(ValidationError):
    """Raised when a partition cannot be colored with at most three colors."""


class WorldFileError(ValidationError):
    """Raised for missing or malformed world files.

    ``path`` and ``row`` (1-based data row, header excluded) locate the problem
    when known.
    """

    def __init__(self, message, path=None, row=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if row is not None:
                where += f", row {row}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.row = row


def check_positive(name, value):
    if not isinstance(value, Real) or not math.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be a finite number > 0, got {value!r}")
    return float(value)


def check_int(name, value, minimum=None):
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value!r}")
    return int(value)


def check_fraction(name, value, *, lo=0.0, hi=1.0, hi_inclusive=False):
    if not isinstance(value, Real) or not math.isfinite(value):
        raise ValidationError(f"{name} must be a finite number, got {value!r}")
    ok = lo <= value <= hi if hi_inclusive else lo <= value < hi
    if not ok:
        bracket = "]" if hi_inclusive else ")"
        raise ValidationError(f"{name} must lie in [{lo}, {hi}{bracket}, got {value!r}")
    return float(value)


def check_signals(signals, config):
    """Validate an observed-signal array against ``config``.

    Returns a read-only float64 array of shape ``(n_stations, n_samples)``.
    """
    arr = np.asarray(signals, dtype=np.float64)
    expected = (len(config.stations), config.n_samples)
    if arr.ndim != 2 or arr.shape != expected:
        raise ValidationError(
            f"signals must have shape {expected} (stations x samples), got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError("signals contain non-finite values")
    if arr.flags.writeable:
        arr = arr.copy()
        arr.flags.writeable = False
    return arr
