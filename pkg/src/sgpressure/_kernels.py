"""Compiled inner loops for cover construction."""

import numba
import numpy as np


@numba.njit(cache=True)
def greedy_path(stops):
    """Block starts visited by the left-to-right sweep ``i -> stops[i]``."""
    m = stops.shape[0]
    out = np.empty(m, dtype=np.int64)
    count = 0
    i = 0
    while i < m:
        out[count] = i
        count += 1
        i = stops[i]
    return out[:count]


@numba.njit(cache=True)
def mixed_cover_dp(stops, log_weights, depths, alpha):
    """Minimum of ``log sum exp(lw - alpha n)`` over chains of blocks.

    ``stops[d, i]`` / ``log_weights[d, i]`` describe the atom of depth
    ``depths[d]`` whose block starts at sample index ``i``.  Returns the
    optimum for the whole sample and the chosen depth row per start.
    """
    n_depths, m = stops.shape
    best = np.empty(m + 1)
    best[m] = -np.inf
    choice = np.zeros(m, dtype=np.int64)
    for i in range(m - 1, -1, -1):
        val = np.inf
        arg = 0
        for d in range(n_depths):
            a = log_weights[d, i] - alpha * depths[d]
            b = best[stops[d, i]]
            if b == -np.inf:
                s = a
            elif a > b:
                s = a + np.log1p(np.exp(b - a))
            else:
                s = b + np.log1p(np.exp(a - b))
            if s < val:
                val = s
                arg = d
        best[i] = val
        choice[i] = arg
    return best[0], choice


@numba.njit(cache=True)
def trace_choice(stops, choice):
    m = stops.shape[1]
    starts = np.empty(m, dtype=np.int64)
    rows = np.empty(m, dtype=np.int64)
    count = 0
    i = 0
    while i < m:
        d = choice[i]
        starts[count] = i
        rows[count] = d
        count += 1
        i = stops[d, i]
    return starts[:count], rows[:count]
