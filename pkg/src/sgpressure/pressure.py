"""Finite-scale Caratheodory-Pesin cover sums and pressure estimates.

A set ``Z`` is represented by a finite sorted sample plus a mesh (every point
of the intended set lies within ``mesh`` of a sample point).  Covers are
built from Bowen balls whose centres lie in the ambient space; in one
dimension an atom covers a contiguous block of sample points.

Weights of an atom ``B_n(x, delta)`` at ``alpha`` are
``exp(-alpha n + A_n(x))`` for the centre variant and
``exp(-alpha n + sup_{y in B} A_n(y))`` for the sup variant, where the
supremum is bounded by ``A_n(x) + n eps(delta)`` (default) or estimated by
probing points of the ball.

Two critical-value modes are offered:

``raw``
    the sum-equals-one crossing, ``alpha*(N) = log Q(N) / N`` for a
    uniform-depth cover with ``Q(N)`` its weighted sum at ``alpha = 0``.
``anchored``
    the same crossing after dividing by the uniform cover sum at an anchor
    depth ``N0``: ``(log Q(N) - log Q(N0)) / (N - N0)``.  The prefactor of
    ``Q`` cancels, so the ``O(1/N)`` bias of the raw value disappears.  Only
    scales whose ball radius is at least ``resolution_factor * mesh`` are
    used, since finer balls resolve the sample rather than the set.

All estimates are upper bounds on the cover infimum at their scale.
"""

from __future__ import annotations

import csv
import heapq
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .bowen import bowen_ball_interval, bowen_ball_membership, uniform_ball_radius
from .cocycle import averaged_sums
from .systems import Potentials, SemigroupSystem, cantor_intervals

RESOLUTION_FACTOR = 10.0
TAIL_FRACTION = 0.25


# ---------------------------------------------------------------------------
# samples


@dataclass(eq=False)
class SetSample:
    points: np.ndarray
    mesh: float
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.unique(np.asarray(self.points, dtype=float).ravel())
        if pts.size == 0:
            raise ValueError("empty sample")
        if not self.mesh > 0:
            raise ValueError("mesh must be positive")
        self.points = pts

    def __len__(self):
        return self.points.size

    @classmethod
    def grid(cls, resolution: int) -> "SetSample":
        """``j / resolution`` for ``j < resolution``; covers ``[0, 1)``."""
        return cls(np.arange(resolution) / resolution, 0.5 / resolution,
                   {"kind": "grid", "resolution": resolution})

    @classmethod
    def cantor(cls, depth: int) -> "SetSample":
        """Left endpoints of the level-``depth`` middle-third intervals."""
        return cls(cantor_intervals(depth)[:, 0], 3.0**-depth,
                   {"kind": "cantor", "depth": depth})

    @classmethod
    def explicit(cls, points, mesh: float | None = None) -> "SetSample":
        pts = np.asarray(points, dtype=float)
        if mesh is None:
            gaps = np.diff(np.unique(pts))
            mesh = float(gaps.max() / 2) if gaps.size else 1e-9
        return cls(pts, mesh, {"kind": "explicit", "size": int(pts.size)})

    def union(self, other: "SetSample") -> "SetSample":
        return SetSample(np.concatenate([self.points, other.points]),
                         max(self.mesh, other.mesh),
                         {"kind": "union", "parts": [self.descriptor, other.descriptor]})

    def mapped(self, g) -> "SetSample":
        """Image under an isometry ``g`` (same mesh)."""
        return SetSample(g(self.points), self.mesh, {"kind": "image", "of": self.descriptor})

    def issubset(self, other: "SetSample") -> bool:
        return bool(np.all(np.isin(self.points, other.points)))


# ---------------------------------------------------------------------------
# covers


@dataclass
class Cover:
    centers: np.ndarray
    depths: np.ndarray
    radii: np.ndarray
    starts: np.ndarray
    stops: np.ndarray
    delta: float
    strategy: str = "sweep"

    @property
    def atom_count(self) -> int:
        return int(self.centers.size)

    @property
    def uniform(self) -> bool:
        return bool(np.all(self.depths == self.depths[0]))

    def mapped(self, g, sample: SetSample) -> "Cover":
        """Mirror image of the cover under an isometry ``g``, re-indexed on ``sample``."""
        return Cover(g(self.centers), self.depths.copy(), self.radii.copy(),
                     np.zeros_like(self.starts), np.zeros_like(self.stops),
                     self.delta, self.strategy + "+mapped")


@dataclass(eq=False)
class _Blocks:
    n: int
    delta: float
    radius: float | None
    centers: np.ndarray
    radii: np.ndarray
    stops: np.ndarray
    sweep: np.ndarray | None = None
    weights: dict = field(default_factory=dict)


_BLOCK_CACHE: dict = {}


def _blocks(sys: SemigroupSystem, Z: SetSample, n: int, delta: float) -> _Blocks:
    """For every start index ``i``: the atom of depth ``n`` reaching furthest right.

    With a position-independent ball radius ``r`` the centre is the largest
    space point below ``p_i + r``; otherwise the ball is centred at ``p_i``.
    """
    key = (sys.generators, id(sys.domain), id(Z), n, float(delta))
    hit = _BLOCK_CACHE.get(key)
    if hit is not None and hit[0] is Z and hit[1] is sys.domain:
        return hit[2]
    p = Z.points
    idx = np.arange(p.size)
    r = uniform_ball_radius(sys, n, delta)
    if r is not None:
        # keep a few ulps of slack so that |q - c| < r survives rounding
        slack = r * 2.0**-30 + 8.0 * np.spacing(1.0)
        c = sys.domain.floor_point(p + max(r - slack, 0.0))
        c = np.maximum(c, p)
        stops = np.searchsorted(p, c + r - slack, side="left")
        centers = sys.domain.normalize(c)
        radii = np.full(p.size, r)
    else:
        centers, radii = p.copy(), np.full(p.size, np.nan)
        stops = np.empty(p.size, dtype=np.int64)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for i in range(p.size):
                ball = bowen_ball_interval(sys, p[i], n, delta, n_probe=200)
                if ball.radius is not None:
                    radii[i] = ball.radius
                    stops[i] = np.searchsorted(p, p[i] + ball.radius, side="left")
                else:
                    inside = bowen_ball_membership(sys, ball, p[i:])
                    out = np.flatnonzero(~inside)
                    stops[i] = i + (out[0] if out.size else inside.size)
    stops = np.maximum(stops, idx + 1).astype(np.int64)
    blocks = _Blocks(n, float(delta), r, centers, radii, stops)
    if len(_BLOCK_CACHE) > 512:
        _BLOCK_CACHE.clear()
    _BLOCK_CACHE[key] = (Z, sys.domain, blocks)
    return blocks


def _check_cover(sys: SemigroupSystem, Z: SetSample, cover: Cover) -> None:
    covered = np.zeros(len(Z) + 1, dtype=np.int64)
    np.add.at(covered, cover.starts, 1)
    np.add.at(covered, cover.stops, -1)
    if np.any(np.cumsum(covered)[:-1] <= 0):
        raise RuntimeError("internal error: cover misses a sample point")
    # every (atom, block point) pair at once
    sizes = cover.stops - cover.starts
    owner = np.repeat(np.arange(sizes.size), sizes)
    first = np.repeat(cover.starts - np.concatenate([[0], np.cumsum(sizes)[:-1]]), sizes)
    pts = Z.points[first + np.arange(owner.size)]
    r = cover.radii[owner]
    bad = np.isfinite(r) & (sys.metric(cover.centers[owner], pts) >= r)
    if bad.any():
        raise RuntimeError("internal error: atom does not contain its block")


def _block_weights(sys: SemigroupSystem, Z: SetSample, n: int, delta: float,
                   phi: Potentials, variant: str, sup_method: str) -> np.ndarray:
    """Log weight of the atom at every block start (cached with the geometry)."""
    b = _blocks(sys, Z, n, delta)
    key = (id(phi), variant, sup_method)
    hit = b.weights.get(key)
    if hit is not None and hit[0] is phi:
        return hit[1]
    lw = atom_log_weights(sys, b.centers, np.full(len(Z), n), b.radii, delta, phi,
                          variant, sup_method)
    if len(b.weights) > 32:
        b.weights.clear()
    b.weights[key] = (phi, lw)
    return lw


def _greedy_weight(stops: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted set-cover greedy over interval blocks (most new points per weight)."""
    m = stops.size
    tree = np.zeros(m + 1, dtype=np.int64)

    def add(i, v):
        i += 1
        while i <= m:
            tree[i] += v
            i += i & -i

    def prefix(i):
        s = 0
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    for i in range(m):
        add(i, 1)
    nxt = list(range(m + 1))  # next uncovered index at or after i

    def find(i):
        root = i
        while nxt[root] != root:
            root = nxt[root]
        while nxt[i] != root:
            nxt[i], i = root, nxt[i]
        return root

    heap = [(-(stops[i] - i) / weights[i], i) for i in range(m)]
    heapq.heapify(heap)
    chosen, left = [], m
    while left > 0:
        neg, i = heapq.heappop(heap)
        gain = prefix(int(stops[i])) - prefix(i)
        ratio = gain / weights[i]
        if gain == 0:
            continue
        if heap and ratio < -heap[0][0] and -neg != ratio:
            heapq.heappush(heap, (-ratio, i))
            continue
        chosen.append(i)
        j = find(i)
        while j < stops[i]:
            add(j, -1)
            left -= 1
            nxt[j] = j + 1
            j = find(j + 1)
    return np.sort(np.asarray(chosen, dtype=np.int64))


def build_cover(sys: SemigroupSystem, Z: SetSample, N: int, delta: float,
                strategy: str = "sweep", phi: Potentials | None = None) -> Cover:
    """Uniform-depth cover of the sample by Bowen balls ``B_N(x, delta)``.

    ``sweep`` places balls left to right, each reaching as far as possible;
    for position-independent radii this uses the fewest atoms among covers by
    balls centred in the space.  ``greedy-weight`` repeatedly takes the ball
    covering most uncovered points per unit weight ``exp(A_N(centre))``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    sys.check_points(Z.points)
    b = _blocks(sys, Z, N, delta)
    if strategy == "sweep":
        fresh = b.sweep is None
        if fresh:
            b.sweep = _kernels.greedy_path(b.stops)
        starts = b.sweep
    elif strategy == "greedy-weight":
        phi = sys.potentials if phi is None else phi
        lw = _block_weights(sys, Z, N, delta, phi, "center", "modulus")
        starts = _greedy_weight(b.stops, np.exp(lw - lw.max()))
        fresh = True
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    cover = Cover(b.centers[starts], np.full(starts.size, N), b.radii[starts],
                  starts, b.stops[starts], float(delta), strategy)
    if fresh:
        _check_cover(sys, Z, cover)
    return cover


# ---------------------------------------------------------------------------
# weights


@dataclass
class ContinuityModulus:
    delta: float
    value: float
    resolution: int


def _max_window_range(v: np.ndarray, ends: np.ndarray) -> float:
    """``max_i (max v[i:end_i] - min v[i:end_i])`` via a sparse table."""
    n = v.size
    idx = np.arange(n)
    length = np.maximum(ends - idx, 1)
    level = np.floor(np.log2(length)).astype(int)
    hi_tab, lo_tab = [v], [v]
    for j in range(1, int(level.max()) + 1):
        step = 1 << (j - 1)
        h, l = hi_tab[-1], lo_tab[-1]
        hi_tab.append(np.maximum(h[:-step], h[step:]))
        lo_tab.append(np.minimum(l[:-step], l[step:]))
    best = 0.0
    for j in np.unique(level):
        sel = np.flatnonzero(level == j)
        right = ends[sel] - (1 << j)
        right = np.maximum(right, sel)
        mx = np.maximum(hi_tab[j][sel], hi_tab[j][right])
        mn = np.minimum(lo_tab[j][sel], lo_tab[j][right])
        best = max(best, float((mx - mn).max()))
    return best


def continuity_modulus(sys: SemigroupSystem, phi: Potentials, delta: float,
                       resolution: int = 4096) -> ContinuityModulus:
    """``sup { |phi_i(x) - phi_i(y)| : d(x, y) < delta }`` over a probe grid."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if phi.is_constant:
        return ContinuityModulus(delta, 0.0, resolution)
    probe = np.sort(sys.domain.probe_points(resolution))
    if sys.domain.kind == "circle":
        # unroll one turn so windows can wrap past 0
        probe = np.concatenate([probe, probe + 1.0])
    # windows [i, end_i) hold every probe within delta of probe i
    ends = np.searchsorted(probe, probe + delta, side="left")
    # probe + delta is rounded; settle each window on the difference itself
    idx = np.arange(probe.size)
    while True:
        shrink = (ends > idx + 1) & (probe[ends - 1] - probe[idx] >= delta)
        if not shrink.any():
            break
        ends[shrink] -= 1
    while True:
        grow = ends < probe.size
        grow[grow] = probe[ends[grow]] - probe[idx[grow]] < delta
        if not grow.any():
            break
        ends[grow] += 1
    best = 0.0
    for p in phi:
        v = p(sys.domain.normalize(probe)) if sys.domain.kind == "circle" else p(probe)
        v = np.broadcast_to(np.asarray(v, dtype=float), probe.shape)
        best = max(best, _max_window_range(v, ends))
    return ContinuityModulus(delta, best, resolution)


def atom_log_weights(sys: SemigroupSystem, centers, depths, radii, delta: float,
                     phi: Potentials, variant: str = "center", sup_method: str = "modulus",
                     n_probe: int = 8) -> np.ndarray:
    """``log`` weight of each atom at ``alpha = 0``."""
    centers = np.asarray(centers, dtype=float)
    depths = np.asarray(depths)
    lw = np.empty(centers.size)
    for n in np.unique(depths):
        sel = depths == n
        lw[sel] = averaged_sums(sys, centers[sel], int(n), phi)
    if variant == "center":
        return lw
    if variant != "sup":
        raise ValueError(f"unknown variant {variant!r}")
    if sup_method == "modulus":
        eps = continuity_modulus(sys, phi, delta).value
        return lw + depths * eps
    if sup_method != "probe":
        raise ValueError(f"unknown sup_method {sup_method!r}")
    if phi.is_constant:
        return lw
    offsets = np.linspace(-1.0, 1.0, n_probe + 2)[1:-1]
    for n in np.unique(depths):
        sel = np.flatnonzero(depths == n)
        pts = centers[sel, None] + np.nan_to_num(radii[sel])[:, None] * offsets[None, :]
        pts = sys.domain.normalize(pts)
        ok = sys.domain.contains(pts)
        pts = np.where(ok, pts, centers[sel, None])
        vals = averaged_sums(sys, pts.ravel(), int(n), phi).reshape(pts.shape)
        lw[sel] = np.maximum(lw[sel], vals.max(axis=1))
    return lw


def cover_log_weights(sys: SemigroupSystem, cover: Cover, phi: Potentials,
                      variant: str = "center", sup_method: str = "modulus") -> np.ndarray:
    return atom_log_weights(sys, cover.centers, cover.depths, cover.radii, cover.delta,
                            phi, variant, sup_method)


def log_weighted_sum(sys: SemigroupSystem, cover: Cover, phi: Potentials, alpha: float,
                     variant: str = "center", sup_method: str = "modulus") -> float:
    lw = cover_log_weights(sys, cover, phi, variant, sup_method)
    return float(logsumexp(lw - alpha * cover.depths))


def weighted_sum(sys: SemigroupSystem, cover: Cover, phi: Potentials, alpha: float,
                 variant: str = "center", sup_method: str = "modulus") -> float:
    """``sum_atoms exp(-alpha n + weight)``; decreasing in ``alpha``."""
    return float(np.exp(log_weighted_sum(sys, cover, phi, alpha, variant, sup_method)))


# ---------------------------------------------------------------------------
# estimates


@dataclass
class PressureEstimate:
    kind: str
    value: float
    delta: float
    schedule: list[int]
    mesh: float
    variant: str
    strategy: str
    mode: str
    anchor: int | None
    profile: dict = field(default_factory=dict)
    log_sums: dict = field(default_factory=dict)
    atom_counts: dict = field(default_factory=dict)
    resolved: list[int] = field(default_factory=list)
    tail: list[int] = field(default_factory=list)
    extrapolation: dict = field(default_factory=dict)
    refinements_accepted: int = 0
    atom_count: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "value": self.value, "delta": self.delta,
            "schedule": list(self.schedule), "mesh": self.mesh, "variant": self.variant,
            "strategy": self.strategy, "mode": self.mode, "anchor": self.anchor,
            "profile": {str(k): v for k, v in self.profile.items()},
            "atom_counts": {str(k): v for k, v in self.atom_counts.items()},
            "resolved": list(self.resolved), "tail": list(self.tail),
            "extrapolation": self.extrapolation,
            "refinements_accepted": self.refinements_accepted,
            "atom_count": self.atom_count,
        }


@dataclass
class _ScaleData:
    n: int
    cover: Cover
    log_sum: float
    radius: float


def _check_schedule(schedule: Sequence[int]) -> list[int]:
    sched = [int(n) for n in schedule]
    if not sched or sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValueError("N-schedule must be nonempty, increasing, with N >= 1")
    return sched


def _scale_data(sys, Z, phi, delta, n, variant, strategy, sup_method) -> _ScaleData:
    cover = build_cover(sys, Z, n, delta, strategy, phi)
    lw = _block_weights(sys, Z, n, delta, phi, variant, sup_method)[cover.starts]
    radius = float(np.nanmin(cover.radii)) if np.any(np.isfinite(cover.radii)) else np.inf
    return _ScaleData(n, cover, float(logsumexp(lw)), radius)


def _tail(values: list, fraction: float) -> list:
    m = max(1, int(np.ceil(fraction * len(values))))
    return values[-m:]


def _fit(ns, log_sums) -> dict:
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(log_sums, dtype=float)
    if ns.size < 2:
        return {"fitted_limit": None, "residual": None, "window": ns.tolist()}
    slope, intercept = np.polyfit(ns, ys, 1)
    resid = ys - (slope * ns + intercept)
    return {"fitted_limit": float(slope), "residual": float(np.sqrt(np.mean(resid**2))),
            "window": [int(n) for n in ns]}


def capacity_pressure(sys: SemigroupSystem, Z: SetSample, phi: Potentials | None,
                      delta: float, N_schedule: Sequence[int], variant: str = "center",
                      strategy: str = "sweep", mode: str = "raw", anchor: int | None = None,
                      tail_fraction: float = TAIL_FRACTION,
                      resolution_factor: float = RESOLUTION_FACTOR,
                      sup_method: str = "modulus") -> tuple[PressureEstimate, PressureEstimate]:
    """Lower and upper capacity pressure estimates: min/max over the schedule tail.

    In ``raw`` mode every schedule entry contributes ``log Q(N) / N``.  In
    ``anchored`` mode only resolved entries (ball radius at least
    ``resolution_factor * mesh``) are used, the anchor defaults to the first
    of them, and entry ``N`` contributes ``(log Q(N) - log Q(N0)) / (N - N0)``.
    """
    phi = sys.potentials if phi is None else phi
    sched = _check_schedule(N_schedule)
    data = [_scale_data(sys, Z, phi, delta, n, variant, strategy, sup_method) for n in sched]
    log_sums = {d.n: d.log_sum for d in data}
    counts = {d.n: d.cover.atom_count for d in data}
    resolved = [d.n for d in data if d.radius >= resolution_factor * Z.mesh]
    if mode == "raw":
        profile = {d.n: d.log_sum / d.n for d in data}
        anchor, window = None, sched
    elif mode == "anchored":
        if anchor is None:
            if len(resolved) < 2:
                raise ValueError(
                    f"need two resolved scales, have {resolved} (mesh {Z.mesh:.3g})")
            anchor = resolved[0]
        if anchor not in log_sums:
            log_sums[anchor] = _scale_data(sys, Z, phi, delta, anchor, variant, strategy,
                                           sup_method).log_sum
        profile = {n: (log_sums[n] - log_sums[anchor]) / (n - anchor)
                   for n in resolved if n > anchor}
        if not profile:
            raise ValueError(f"no resolved scale beyond anchor {anchor}")
        window = [anchor] + list(profile)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    keys = list(profile)
    tail = _tail(keys, tail_fraction)
    vals = [profile[n] for n in tail]
    fit = _fit(window, [log_sums[n] for n in window])
    common = dict(delta=float(delta), schedule=sched, mesh=Z.mesh, variant=variant,
                  strategy=strategy, mode=mode, anchor=anchor, profile=profile,
                  log_sums=log_sums, atom_counts=counts, resolved=resolved, tail=tail,
                  extrapolation=fit)
    lo = PressureEstimate("CP_lower", float(min(vals)), **common,
                          atom_count=counts[tail[int(np.argmin(vals))]])
    hi = PressureEstimate("CP_upper", float(max(vals)), **common,
                          atom_count=counts[tail[int(np.argmax(vals))]])
    return lo, hi


def pesin_pressure(sys: SemigroupSystem, Z: SetSample, phi: Potentials | None, delta: float,
                   N: int, refinement: int = 0, variant: str = "center",
                   strategy: str = "sweep", mode: str = "raw", anchor: int | None = None,
                   sup_method: str = "modulus", tol: float = 1e-6) -> PressureEstimate:
    """Critical value of the variable-depth cover sum with depths ``N .. N + refinement``.

    The cover sum at a trial ``alpha`` is minimised exactly over chains of
    maximal-reach atoms (each atom may take any allowed depth) and over the
    uniform covers at every allowed depth; the critical ``alpha`` is located
    by bisection to ``tol``.  In anchored mode the sum is divided by the
    uniform cover sum at depth ``anchor < N`` before comparing with one.
    The result never exceeds the capacity value at any allowed depth.
    """
    phi = sys.potentials if phi is None else phi
    if N < 1 or refinement < 0:
        raise ValueError("need N >= 1 and refinement >= 0")
    depths = np.arange(N, N + refinement + 1)
    stops, lws, uniform = [], [], {}
    for n in depths:
        b = _blocks(sys, Z, int(n), delta)
        stops.append(b.stops)
        lws.append(_block_weights(sys, Z, int(n), delta, phi, variant, sup_method))
        uniform[int(n)] = _scale_data(sys, Z, phi, delta, int(n), variant, strategy,
                                      sup_method)
    stops_arr = np.stack(stops).astype(np.int64)
    lw_arr = np.stack(lws)
    dep = depths.astype(np.float64)
    offset_n, offset_log = 0.0, 0.0
    if mode == "anchored":
        if anchor is None or anchor >= N:
            raise ValueError("anchored mode needs an anchor depth below N")
        offset_n = float(anchor)
        offset_log = _scale_data(sys, Z, phi, delta, anchor, variant, strategy,
                                 sup_method).log_sum
    elif mode != "raw":
        raise ValueError(f"unknown mode {mode!r}")

    def log_sum(alpha):
        dp, _ = _kernels.mixed_cover_dp(stops_arr, lw_arr, dep, alpha)
        uni = min(d.log_sum - alpha * n for n, d in uniform.items())
        return min(dp, uni) + alpha * offset_n - offset_log

    # the uniform closed forms bound the root from above
    ceiling = min((d.log_sum - offset_log) / (n - offset_n) for n, d in uniform.items())
    hi = ceiling
    width = 1.0
    lo = hi - width
    while log_sum(lo) < 0.0:
        width *= 2.0
        lo = hi - width
    hi_val = log_sum(hi)
    if hi_val > 0.0:
        hi = hi + 1e-9
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if log_sum(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    value = min(hi, ceiling)
    dp, choice = _kernels.mixed_cover_dp(stops_arr, lw_arr, dep, value)
    uni_best = min(uniform.items(), key=lambda kv: kv[1].log_sum - value * kv[0])
    if dp < uni_best[1].log_sum - value * uni_best[0]:
        starts, rows = _kernels.trace_choice(stops_arr, choice)
        refined = int(np.sum(depths[rows] > N))
        count = int(starts.size)
    else:
        refined, count = 0, uni_best[1].cover.atom_count
    return PressureEstimate(
        "P", float(value), float(delta), [int(n) for n in depths], Z.mesh, variant, strategy,
        mode, anchor, log_sums={n: d.log_sum for n, d in uniform.items()},
        atom_counts={n: d.cover.atom_count for n, d in uniform.items()},
        tail=[int(n) for n in depths], refinements_accepted=refined, atom_count=count)


@dataclass
class ScaleEstimates:
    """``P``, lower ``CP`` and upper ``CP`` computed at matched scales."""

    P: PressureEstimate
    CP_lower: PressureEstimate
    CP_upper: PressureEstimate

    @property
    def ordered(self) -> bool:
        return self.P.value <= self.CP_lower.value + 1e-9 and \
            self.CP_lower.value <= self.CP_upper.value


def pressure_estimates(sys: SemigroupSystem, Z: SetSample, phi: Potentials | None,
                       delta: float, N_schedule: Sequence[int], variant: str = "center",
                       strategy: str = "sweep", mode: str = "anchored",
                       anchor: int | None = None, tail_fraction: float = TAIL_FRACTION,
                       resolution_factor: float = RESOLUTION_FACTOR,
                       sup_method: str = "modulus", tol: float = 1e-6) -> ScaleEstimates:
    """All three estimates; ``P`` uses the capacity tail as its depth range."""
    lo, hi = capacity_pressure(sys, Z, phi, delta, N_schedule, variant, strategy, mode,
                               anchor, tail_fraction, resolution_factor, sup_method)
    tail = lo.tail
    p = pesin_pressure(sys, Z, phi, delta, tail[0], tail[-1] - tail[0], variant, strategy,
                       mode, lo.anchor, sup_method, tol)
    p.schedule = lo.schedule
    p.profile = lo.profile
    p.resolved = lo.resolved
    p.extrapolation = lo.extrapolation
    return ScaleEstimates(p, lo, hi)


RESULT_COLUMNS = ["system", "variant", "strategy", "N", "delta", "mesh", "alpha_star",
                  "atom_count", "total_weight", "refinements_accepted"]


def result_rows(system_name: str, est: ScaleEstimates) -> list[dict]:
    """One row per schedule entry; ``alpha_star`` is the raw ``log Q(N) / N``."""
    cp = est.CP_lower
    rows = []
    for n in cp.schedule:
        rows.append({
            "system": system_name, "variant": cp.variant, "strategy": cp.strategy,
            "N": n, "delta": repr(cp.delta), "mesh": repr(cp.mesh),
            "alpha_star": repr(cp.log_sums[n] / n),
            "atom_count": cp.atom_counts[n],
            "total_weight": repr(float(np.exp(cp.log_sums[n]))),
            "refinements_accepted": est.P.refinements_accepted if n == est.P.tail[0] else 0,
        })
    return rows


def write_results_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, RESULT_COLUMNS, lineterminator="\n")
        out.writeheader()
        out.writerows(rows)
