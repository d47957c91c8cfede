"""Bowen metrics and Bowen balls.

``d_n(x, y)`` is the largest distance ``d(g x, g y)`` over all compositions
``g`` of at most ``n`` generators (the identity belongs to ``G_1``, so shorter
compositions count too).  For the piecewise-linear systems handled here a
Bowen ball is an interval around its centre whenever the radius is small
compared with the branch structure; ``bowen_ball_interval`` computes that
interval and checks it against the implicit definition on probe points.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cocycle import lyapunov_values
from .systems import SemigroupSystem, orbit_levels
from .words import as_word, check_budget

_CHUNK = 1 << 22


def bowen_distances(sys: SemigroupSystem, n: int, xs, ys, cap: float | None = None,
                    budget: int | None = None) -> np.ndarray:
    """Vectorised ``d_n`` over pairs; stops early once every pair reaches ``cap``.

    With a cap the returned values are exact below the cap and only known to
    be ``>= cap`` otherwise.
    """
    check_budget(sys.k, n, budget)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    xs, ys = np.broadcast_arrays(xs, ys)
    out = np.empty(xs.shape, dtype=float)
    flat_x, flat_y, flat_out = xs.ravel(), ys.ravel(), out.reshape(-1)
    step = max(1, _CHUNK // sys.k**n)
    for a in range(0, flat_x.size, step):
        px, py = flat_x[a:a + step], flat_y[a:a + step]
        best = np.zeros(px.size)
        for lx, ly in zip(orbit_levels(sys, px, n, budget), orbit_levels(sys, py, n, budget)):
            best = np.maximum(best, sys.metric(lx, ly).max(axis=1))
            if cap is not None and np.all(best >= cap):
                break
        flat_out[a:a + step] = best
    return out


def bowen_distance(sys: SemigroupSystem, n: int, x: float, y: float,
                   cap: float | None = None, budget: int | None = None) -> float:
    return float(bowen_distances(sys, n, [x], [y], cap, budget)[0])


@dataclass
class BowenBall:
    center: float
    depth: int
    delta: float
    realization: str = "implicit"
    radius: float | None = None
    warning: str | None = None

    @property
    def interval(self) -> tuple[float, float] | None:
        if self.radius is None:
            return None
        return (self.center - self.radius, self.center + self.radius)


def bowen_ball_membership(sys: SemigroupSystem, ball: BowenBall, y,
                          budget: int | None = None):
    """``d_n(center, y) < delta`` with an early exit at ``delta``."""
    d = bowen_distances(sys, ball.depth, ball.center, y, cap=ball.delta, budget=budget)
    return d < ball.delta if np.ndim(y) else bool(d[0] < ball.delta)


def interval_membership(sys: SemigroupSystem, ball: BowenBall, y):
    """Membership through the exact interval realisation."""
    if ball.radius is None:
        raise ValueError("ball has no interval realisation")
    inside = sys.metric(ball.center, y) < ball.radius
    return inside & sys.domain.contains(y)


def word_ball_membership(sys: SemigroupSystem, w, x: float, delta: float, y):
    """Membership in ``B_w(x, delta)``: every node along the path of ``w`` stays close."""
    w = as_word(w, sys.k)
    px = np.asarray(x, dtype=float)
    py = np.asarray(y, dtype=float)
    ok = sys.metric(px, py) < delta
    for s in w.symbols:
        px, py = sys.generators[s](px), sys.generators[s](py)
        ok = ok & (sys.metric(px, py) < delta)
    return ok


def max_log_expansion(sys: SemigroupSystem, x: float, n: int,
                      budget: int | None = None) -> float:
    """``max_{|u| <= n} log |(f_u)'(x)|`` (zero for the identity)."""
    check_budget(sys.k, n, budget)
    best, sums = 0.0, np.zeros(1)
    for m, level in enumerate(orbit_levels(sys, [x], n - 1, budget) if n > 0 else []):
        nodes = level[0]
        sums = np.stack([sums + np.log(f.factor(nodes)) for f in sys.generators],
                        axis=-1).reshape(-1)
        best = max(best, float(sums.max()))
    return best


def _branch_cells_ok(sys: SemigroupSystem, x: float, n: int, delta: float,
                     budget: int | None) -> bool:
    if sys.domain.kind == "circle":
        return delta * (max(f.max_factor for f in sys.generators) + 1.0) <= 1.0
    if n == 0:
        return True
    for level in orbit_levels(sys, [x], n - 1, budget):
        nodes = level[0]
        for f in sys.generators:
            own = f.piece_index(nodes)
            for j in range(len(f.lo)):
                gap = np.maximum(f.lo[j] - nodes, nodes - f.hi[j])
                if np.any((own != j) & (gap < delta)):
                    return False
    return True


def _probe_window(sys: SemigroupSystem, x: float, half: float, n_probe: int) -> np.ndarray:
    dom = sys.domain
    if dom.kind == "circle":
        return dom.normalize(x + np.linspace(-half, half, n_probe))
    iv = dom.intervals
    lo, hi = x - half, x + half
    sel = iv[(iv[:, 1] >= lo) & (iv[:, 0] <= hi)]
    if len(sel) > n_probe // 2:
        sel = sel[np.linspace(0, len(sel) - 1, n_probe // 2).astype(int)]
    per = max(2, n_probe // max(len(sel), 1))
    pts = [np.linspace(max(a, lo), min(b, hi), per) for a, b in sel]
    return np.concatenate(pts) if pts else np.array([x])


def bowen_ball_interval(sys: SemigroupSystem, x: float, n: int, delta: float,
                        n_probe: int = 1000, budget: int | None = None) -> BowenBall:
    """Exact interval realisation of ``B_n(x, delta)``.

    The radius is ``delta / max_{|u|<=n} |(f_u)'(x)|``.  It is only returned
    when no composition of length ``< n`` can send a nearby point onto a
    different branch (or wrap around the circle), and when ``n_probe`` probe
    points agree with the implicit definition.  Otherwise the ball falls back
    to the implicit realisation and ``warning`` says why.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    sys.check_points(x)
    ball = BowenBall(float(x), n, float(delta))
    if not _branch_cells_ok(sys, x, n, delta, budget):
        ball.warning = "delta exceeds the branch-cell bound"
        warnings.warn(ball.warning, RuntimeWarning, stacklevel=2)
        return ball
    radius = delta * np.exp(-max_log_expansion(sys, x, n, budget))
    if sys.domain.kind == "circle":
        radius = min(radius, 0.5)
    ball.radius = float(radius)
    probes = _probe_window(sys, x, 2.0 * radius, n_probe)
    dist = sys.metric(x, probes)
    clear = np.abs(dist - radius) > 1e-9 * max(radius, 1e-300)
    probes = probes[clear]
    exact = interval_membership(sys, ball, probes)
    implicit = bowen_ball_membership(sys, ball, probes, budget)
    if np.any(exact != implicit):
        ball.radius = None
        ball.warning = "probe disagreement with the implicit ball"
        warnings.warn(ball.warning, RuntimeWarning, stacklevel=2)
        return ball
    ball.realization = "exact-interval"
    return ball


def uniform_ball_radius(sys: SemigroupSystem, n: int, delta: float) -> float | None:
    """Radius of ``B_n(x, delta)`` valid at every point, or None if it depends on x.

    Available when every generator has a single slope magnitude and the
    branch structure cannot interfere (circle: ``delta (a_max + 1) <= 1``;
    subset domains: gaps between the pieces of each generator ``>= delta``).
    """
    if any(f.min_factor != f.max_factor for f in sys.generators):
        return None
    a_max = max(f.max_factor for f in sys.generators)
    if sys.domain.kind == "circle":
        if delta * (a_max + 1.0) > 1.0:
            return None
    else:
        for f in sys.generators:
            lo, hi = np.asarray(f.lo), np.asarray(f.hi)
            order = np.argsort(lo)
            gaps = lo[order][1:] - hi[order][:-1]
            if gaps.size and gaps.min() < delta:
                return None
    return float(delta * max(a_max, 1.0) ** (-n))


@dataclass
class InclusionCertificate:
    x: np.ndarray
    n: int
    delta: float
    eps: float
    eta: float
    lambda_n: np.ndarray
    r_in: np.ndarray
    r_out: np.ndarray
    inner_ok: np.ndarray = field(repr=False)
    outer_ok: np.ndarray = field(repr=False)
    outer_checked: np.ndarray = field(repr=False)

    @property
    def inconsistent(self) -> int:
        return int(np.sum(~self.inner_ok) + np.sum(~self.outer_ok & self.outer_checked))

    @property
    def consistent(self) -> bool:
        return self.inconsistent == 0


def inclusion_check(sys: SemigroupSystem, x, n: int, delta: float, eps: float,
                    eta: float, budget: int | None = None) -> InclusionCertificate:
    """Finite-sample check of ``B(x, r_in) ⊂ B_n(x, delta) ⊂ B(x, r_out)``.

    ``r_in = eta delta exp(-n (lambda_n + eps))`` and
    ``r_out = delta exp(-n (lambda_n - eps))``.  Two points just inside
    ``r_in`` must be members and two points just outside ``r_out`` must not
    be; outer points that do not exist in the space are skipped.  Accepts an
    array of centres.
    """
    xs = sys.check_points(np.atleast_1d(np.asarray(x, dtype=float)))
    lam = lyapunov_values(sys, xs, [n], budget)[:, 0] if n > 0 else np.zeros(xs.size)
    r_in = eta * delta * np.exp(-n * (lam + eps))
    r_out = delta * np.exp(-n * (lam - eps))
    dom = sys.domain
    inner_pts = np.stack([xs - r_in * (1 - 1e-6), xs + r_in * (1 - 1e-6)], axis=1)
    outer_pts = np.stack([xs - r_out * (1 + 1e-6), xs + r_out * (1 + 1e-6)], axis=1)
    if dom.kind == "circle":
        inner_pts, outer_pts = dom.normalize(inner_pts), dom.normalize(outer_pts)
        outer_checked = np.repeat((r_out * (1 + 1e-6) < 0.5)[:, None], 2, axis=1)
    else:
        outer_checked = dom.contains(outer_pts)
        outer_pts = np.where(outer_checked, outer_pts, xs[:, None])
    inner_valid = dom.contains(inner_pts)
    inner_pts = np.where(inner_valid, inner_pts, xs[:, None])
    centers = np.repeat(xs[:, None], 2, axis=1)
    d_in = bowen_distances(sys, n, centers, inner_pts, cap=delta, budget=budget)
    d_out = bowen_distances(sys, n, centers, outer_pts, cap=delta, budget=budget)
    inner_ok = (d_in < delta).all(axis=1)
    outer_ok = ~((d_out < delta) & outer_checked).any(axis=1)
    return InclusionCertificate(xs, n, delta, eps, eta, lam, r_in, r_out,
                                inner_ok, outer_ok, outer_checked.any(axis=1))


def write_certificates_csv(path, certs) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["x", "n", "delta", "eps", "eta", "r_in", "r_out", "inner_ok", "outer_ok"])
        for c in certs:
            for i in range(c.x.size):
                out.writerow([repr(float(c.x[i])), c.n, c.delta, c.eps, c.eta,
                              repr(float(c.r_in[i])), repr(float(c.r_out[i])),
                              bool(c.inner_ok[i]), bool(c.outer_ok[i])])
