"""The pressure curve ``t -> P(-t Phi)`` and the root of Bowen's equation.

All curve points are computed at one matched scale: the same ``delta``,
depth schedule, anchor, variant and strategy, so differences along the
curve come from ``t`` alone.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .boxdim import BoxCountProfile, box_dimension
from .cocycle import lyapunov_bounds
from .errors import SolverError
from .pressure import (RESOLUTION_FACTOR, TAIL_FRACTION, ScaleEstimates, SetSample,
                       capacity_pressure, pressure_estimates)
from .systems import Potentials, SemigroupSystem

ROOT_TOL = 1e-3


@dataclass(frozen=True)
class Scale:
    """Everything that must be held fixed for curve points to be comparable."""

    delta: float = 0.05
    N_schedule: tuple[int, ...] = tuple(range(1, 17))
    variant: str = "center"
    strategy: str = "sweep"
    mode: str = "anchored"
    anchor: int | None = None
    tail_fraction: float = TAIL_FRACTION
    resolution_factor: float = RESOLUTION_FACTOR
    sup_method: str = "modulus"
    lyapunov_points: int = 64

    def with_anchor(self, anchor: int | None) -> "Scale":
        return Scale(**{**asdict(self), "anchor": anchor})


def match_scale(sys: SemigroupSystem, Z: SetSample, scale: Scale) -> Scale:
    """Fix the anchor depth so that every potential sees the same windows."""
    if scale.mode != "anchored" or scale.anchor is not None:
        return scale
    lo, _ = capacity_pressure(sys, Z, Potentials.zero(sys.k), scale.delta, scale.N_schedule,
                              scale.variant, scale.strategy, scale.mode, None,
                              scale.tail_fraction, scale.resolution_factor, scale.sup_method)
    return scale.with_anchor(lo.anchor)


def estimates_at(sys: SemigroupSystem, Z: SetSample, phi: Potentials,
                 scale: Scale) -> ScaleEstimates:
    return pressure_estimates(sys, Z, phi, scale.delta, scale.N_schedule, scale.variant,
                              scale.strategy, scale.mode, scale.anchor, scale.tail_fraction,
                              scale.resolution_factor, scale.sup_method)


def exponent_bounds(sys: SemigroupSystem, Z: SetSample, scale: Scale) -> tuple[float, float]:
    """``(alpha_hat, beta_hat)`` from tail Lyapunov values on an even subsample of Z."""
    pts = Z.points
    if pts.size > scale.lyapunov_points:
        pts = pts[np.linspace(0, pts.size - 1, scale.lyapunov_points).astype(int)]
    return lyapunov_bounds(sys, pts, scale.N_schedule, scale.tail_fraction)


@dataclass
class PressureCurve:
    t_grid: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    alpha_hat: float
    beta_hat: float
    scale: Scale
    estimates: list = field(default_factory=list, repr=False)

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) < 0))

    def slope_violations(self, tol: float = 0.02) -> int:
        lo, hi = -self.beta_hat - tol, -self.alpha_hat + tol
        return int(np.sum((self.slopes < lo) | (self.slopes > hi)))

    def to_dict(self) -> dict:
        return {"t": self.t_grid.tolist(), "P": self.values.tolist(),
                "slopes": self.slopes.tolist(), "alpha_hat": self.alpha_hat,
                "beta_hat": self.beta_hat, "scale": asdict(self.scale)}


class _Evaluator:
    """Caches ``P(-t Phi)`` at a matched scale."""

    def __init__(self, sys, Z, phi_factors, scale):
        self.sys, self.Z, self.phi, self.scale = sys, Z, phi_factors, scale
        self.cache: dict[float, ScaleEstimates] = {}

    def estimates(self, t: float) -> ScaleEstimates:
        t = float(t)
        if t not in self.cache:
            self.cache[t] = estimates_at(self.sys, self.Z, self.phi.scaled(-t), self.scale)
        return self.cache[t]

    def __call__(self, t: float) -> float:
        return self.estimates(t).P.value

    def curve(self, alpha: float, beta: float) -> PressureCurve:
        ts = np.array(sorted(self.cache))
        vals = np.array([self.cache[t].P.value for t in ts])
        slopes = np.diff(vals) / np.diff(ts) if ts.size > 1 else np.zeros(0)
        return PressureCurve(ts, vals, slopes, alpha, beta, self.scale,
                             [self.cache[t] for t in ts])


def _prepare(sys, Z, phi_factors, scale):
    scale = match_scale(sys, Z, Scale() if scale is None else scale)
    phi = sys.log_factors() if phi_factors is None else phi_factors
    alpha, beta = exponent_bounds(sys, Z, scale)
    return scale, phi, alpha, beta


def pressure_curve(sys: SemigroupSystem, Z: SetSample, phi_factors: Potentials | None = None,
                   t_grid: Sequence[float] = (0.0, 0.5, 1.0, 1.5),
                   scale: Scale | None = None) -> PressureCurve:
    """``P(-t Phi)`` on a grid of ``t`` with finite-difference slopes.

    Refuses systems whose sampled lower exponent is not positive.
    """
    scale, phi, alpha, beta = _prepare(sys, Z, phi_factors, scale)
    if alpha <= 0:
        raise SolverError(f"sampled lower Lyapunov exponent {alpha:.4g} is not positive")
    ev = _Evaluator(sys, Z, phi, scale)
    for t in t_grid:
        ev(t)
    return ev.curve(alpha, beta)


def root_from_alpha(h: float, alpha: float) -> float:
    """Closed-form root ``h / alpha`` for a constant exponent ``alpha > 0``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return h / alpha


@dataclass
class DimensionReport:
    t_star: float
    bracket: tuple[float, float]
    h_hat: float
    alpha_hat: float
    beta_hat: float
    closed_form: float | None
    box: BoxCountProfile | None
    scale: Scale
    curve: PressureCurve
    iterations: int
    tol: float
    root_profile: dict = field(default_factory=dict)

    @property
    def in_bracket(self) -> bool:
        return self.bracket[0] - self.tol <= self.t_star <= self.bracket[1] + self.tol

    def to_dict(self) -> dict:
        return {
            "t_star": self.t_star, "bracket": list(self.bracket), "h_hat": self.h_hat,
            "alpha_hat": self.alpha_hat, "beta_hat": self.beta_hat,
            "closed_form": self.closed_form, "iterations": self.iterations, "tol": self.tol,
            "box_dimension": None if self.box is None else self.box.to_dict(),
            "scale": asdict(self.scale), "curve": self.curve.to_dict(),
            "root_profile": {repr(k): v for k, v in self.root_profile.items()},
            "entropy_extrapolation": self.curve.estimates[0].CP_lower.extrapolation
            if self.curve.estimates else None,
        }


def solve_bowen(sys: SemigroupSystem, Z: SetSample, phi_factors: Potentials | None = None,
                scale: Scale | None = None, tol: float = ROOT_TOL,
                cross_check: bool = True, max_rebracket: int = 8) -> DimensionReport:
    """Bisection for ``P(-t Phi) = 0`` from the bracket ``[h / beta, h / alpha]``.

    The bracket is widened by 10% and, if the endpoint signs still do not
    differ, doubled outward up to ``max_rebracket`` times.  Bisection stops
    when the bracket is narrower than ``tol`` or ``|P| < tol * alpha``
    (the pressure error that corresponds to ``tol`` in ``t``).
    """
    scale, phi, alpha, beta = _prepare(sys, Z, phi_factors, scale)
    if alpha <= 0:
        raise SolverError(f"sampled lower Lyapunov exponent {alpha:.4g} is not positive")
    ev = _Evaluator(sys, Z, phi, scale)
    h = ev(0.0)
    bracket = (h / beta, h / alpha)
    closed = root_from_alpha(h, alpha) if abs(alpha - beta) < 1e-9 else None
    box = box_dimension(Z) if cross_check else None
    f_tol = tol * alpha
    iterations = 0
    if abs(h) < f_tol:
        t_star = 0.0
    else:
        span = bracket[1] - bracket[0]
        margin = 0.1 * max(span, abs(bracket[1]))
        lo, hi = max(0.0, bracket[0] - margin), bracket[1] + margin
        for _ in range(max_rebracket + 1):
            if ev(lo) > 0 > ev(hi):
                break
            width = hi - lo
            lo, hi = max(0.0, lo - width), hi + width
        else:
            raise SolverError("no sign change in the expanded bracket", ev.curve(alpha, beta))
        t_star = None
        while hi - lo >= tol:
            iterations += 1
            mid = 0.5 * (lo + hi)
            val = ev(mid)
            if abs(val) < f_tol:
                t_star = mid
                break
            if val > 0:
                lo = mid
            else:
                hi = mid
        if t_star is None:
            t_star = 0.5 * (lo + hi)
    return DimensionReport(float(t_star), bracket, float(h), alpha, beta, closed, box, scale,
                           ev.curve(alpha, beta), iterations, tol)


def solve_schedule(sys: SemigroupSystem, Z: SetSample, deltas: Sequence[float],
                   phi_factors: Potentials | None = None, scale: Scale | None = None,
                   tol: float = ROOT_TOL) -> DimensionReport:
    """Solve at each ``delta``; the report is the smallest ``delta`` with the whole profile."""
    base = Scale() if scale is None else scale
    profile, report = {}, None
    for d in sorted(deltas, reverse=True):
        report = solve_bowen(sys, Z, phi_factors,
                             Scale(**{**asdict(base), "delta": float(d)}), tol,
                             cross_check=d == min(deltas))
        profile[float(d)] = report.t_star
    report.root_profile = profile
    return report
