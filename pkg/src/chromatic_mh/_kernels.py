"""Compiled inner loops for the incremental scorer."""

import math

import numpy as np
from numba import njit

LOG_2PI = math.log(2.0 * math.pi)


@njit(cache=True)
def cover_bounds(a, sr, t_s, n):
    # same rule as tau / sr >= a and tau / sr < a + t_s
    end = a + t_s
    lo = math.ceil(a * sr)
    while lo / sr < a:
        lo += 1
    while lo > 0 and (lo - 1) / sr >= a:
        lo -= 1
    hi = math.ceil(end * sr)
    while hi / sr < end:
        hi += 1
    while hi > 0 and (hi - 1) / sr >= end:
        hi -= 1
    if lo < 0:
        lo = 0
    if hi > n:
        hi = n
    return lo, hi


@njit(cache=True)
def _term(c, s2, var_noise, var_event, log_term, inv_2var):
    if c < log_term.shape[0]:
        return log_term[c] - s2 * inv_2var[c]
    var = var_noise + c * var_event
    return -0.5 * (LOG_2PI + math.log(var)) - s2 / (2.0 * var)


@njit(cache=True)
def signal_delta(counts, s2, removed, added, w_lo, w_hi, sr, t_s,
                 var_noise, var_event, log_term, inv_2var):
    n_st = counts.shape[0]
    n = counts.shape[1]
    n_rem = removed.shape[0]
    n_add = added.shape[0]
    total = 0.0
    for j in range(n_st):
        h0 = n
        h1 = 0
        for r in range(n_rem + n_add):
            a = removed[r, j] if r < n_rem else added[r - n_rem, j]
            lo, hi = cover_bounds(a, sr, t_s, n)
            lo = max(lo, w_lo)
            hi = min(hi, w_hi)
            if hi > lo:
                h0 = min(h0, lo)
                h1 = max(h1, hi)
        if h1 <= h0:
            continue
        dc = np.zeros(h1 - h0, dtype=np.int64)
        for r in range(n_rem + n_add):
            if r < n_rem:
                a = removed[r, j]
                sign = -1
            else:
                a = added[r - n_rem, j]
                sign = 1
            lo, hi = cover_bounds(a, sr, t_s, n)
            lo = max(lo, w_lo)
            hi = min(hi, w_hi)
            for k in range(lo, hi):
                dc[k - h0] += sign
        for k in range(h1 - h0):
            if dc[k] != 0:
                c0 = counts[j, h0 + k]
                x = s2[j, h0 + k]
                total += (_term(c0 + dc[k], x, var_noise, var_event, log_term, inv_2var)
                          - _term(c0, x, var_noise, var_event, log_term, inv_2var))
    return total


@njit(cache=True)
def add_cover(counts, arrivals, sign, sr, t_s):
    n = counts.shape[1]
    for j in range(arrivals.shape[0]):
        lo, hi = cover_bounds(arrivals[j], sr, t_s, n)
        for k in range(lo, hi):
            counts[j, k] += sign
