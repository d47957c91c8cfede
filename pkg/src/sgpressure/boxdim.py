"""Box-counting and ball-cover dimension surrogates for a 1-D sample.

Both are cross-checks for the Bowen root.  Neither computes a Hausdorff
infimum: box counts give the box dimension of the sample at the resolved
scales, and the ball sum is the value of one constructed cover (an upper
bound on the infimum at that radius).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .pressure import SetSample

MESH_FACTOR = 3.0
FIT_FRACTION = 0.6


@dataclass
class BoxCountProfile:
    scales: np.ndarray
    counts: np.ndarray
    valid: np.ndarray
    window: np.ndarray
    slope: float
    intercept: float
    residual: float
    mesh: float
    surrogate: str = "box-count"

    def to_dict(self) -> dict:
        return {"scales": self.scales.tolist(), "counts": self.counts.tolist(),
                "window": self.scales[self.window].tolist(), "slope": self.slope,
                "residual": self.residual, "mesh": self.mesh, "surrogate": self.surrogate}


def default_schedule(Z: SetSample) -> np.ndarray:
    """``3^-j`` for Cantor samples, ``2^-j`` otherwise, down to the finest valid scale."""
    base = 3.0 if Z.descriptor.get("kind") == "cantor" else 2.0
    floor = MESH_FACTOR * Z.mesh
    j_max = max(0, int(np.floor(np.log(1.0 / floor) / np.log(base) + 1e-9)))
    return base ** -np.arange(j_max + 1, dtype=float)


def box_counts(Z: SetSample, scales) -> np.ndarray:
    """Number of occupied boxes ``[j r, (j + 1) r)``."""
    scales = np.asarray(scales, dtype=float)
    # the small tolerance keeps exact grid points in their own box
    return np.array([np.unique(np.floor(Z.points / r + 1e-9)).size for r in scales])


def box_dimension(Z: SetSample, schedule=None) -> BoxCountProfile:
    """Least-squares slope of ``log N(r)`` against ``log(1/r)``.

    Only scales ``r >= 3 * mesh`` are valid, and the fit uses the middle 60%
    of the valid scales (all of them if fewer than two remain).
    """
    scales = default_schedule(Z) if schedule is None else np.asarray(schedule, dtype=float)
    scales = np.sort(scales)[::-1]
    valid = scales >= MESH_FACTOR * Z.mesh * (1 - 1e-12)
    if not valid.any():
        raise ValueError(f"every scale lies below {MESH_FACTOR:g} x mesh = {MESH_FACTOR * Z.mesh:.3g}")
    counts = box_counts(Z, scales)
    idx = np.flatnonzero(valid)
    cut = int(np.floor((1 - FIT_FRACTION) / 2 * idx.size))
    window = idx[cut:idx.size - cut] if idx.size - 2 * cut >= 2 else idx
    if window.size < 2:
        slope, intercept, residual = 0.0, float(np.log(counts[window[0]])), 0.0
    else:
        x = np.log(1.0 / scales[window])
        y = np.log(counts[window])
        slope, intercept = np.polyfit(x, y, 1)
        residual = float(np.sqrt(np.mean((y - slope * x - intercept) ** 2)))
    return BoxCountProfile(scales, counts, valid, window, float(slope), float(intercept),
                           residual, Z.mesh)


def ball_cover(Z: SetSample, r: float) -> np.ndarray:
    """Centres of the left-to-right sweep cover by radius-``r`` balls at sample points."""
    if r < MESH_FACTOR * Z.mesh * (1 - 1e-12):
        raise ValueError(f"radius {r:g} lies below {MESH_FACTOR:g} x mesh")
    p = Z.points
    centers = []
    i = 0
    while i < p.size:
        # furthest sample point still within r of p[i], then everything within r of it
        c = p[np.searchsorted(p, p[i] + r, side="left") - 1]
        centers.append(c)
        i = np.searchsorted(p, c + r, side="left")
    return np.asarray(centers)


def hausdorff_ball_sum(Z: SetSample, t: float, r: float) -> float:
    """``sum (diam B)^t`` over the sweep cover, with ``diam B = 2 r``.

    An upper bound on the ball-cover infimum at radius ``r``.
    """
    n = ball_cover(Z, r).size
    return float(n * (2.0 * r) ** t)


def ball_sum_crossing(Z: SetSample, r1: float, r2: float) -> float:
    """Exponent ``t`` at which the ball sums at radii ``r1`` and ``r2`` agree."""
    n1, n2 = ball_cover(Z, r1).size, ball_cover(Z, r2).size
    return float(np.log(n1 / n2) / np.log(r2 / r1))


def write_boxcount_csv(path, profile: BoxCountProfile) -> None:
    in_window = np.zeros(profile.scales.size, dtype=bool)
    in_window[profile.window] = True
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["r", "count", "valid", "in_window"])
        for r, c, v, w in zip(profile.scales, profile.counts, profile.valid, in_window):
            out.writerow([repr(float(r)), int(c), bool(v), bool(w)])
