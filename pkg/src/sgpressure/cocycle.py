"""Word sums, averaged cocycles, Lyapunov profiles and the tempered diagnostic.

For ``w = i1 ... in`` the word sum is

    S_w Phi(x) = phi_{i1}(x) + phi_{i2}(f_{i1} x) + ... + phi_{in}(f_{i(n-1)} ... f_{i1} x)

and the averaged cocycle is ``A_n(x) = k**-n * sum_{|w|=n} S_w Phi(x)``.
Grouping that sum by level gives ``A_n(x) = sum_{m<n} mean_{|u|=m} bar_phi(f_u x)``
with ``bar_phi = (phi_0 + ... + phi_{k-1}) / k``, which costs one orbit-tree
pass instead of ``k**n`` word walks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .systems import Potentials, SemigroupSystem, orbit_levels
from .words import Word, as_word, check_budget, word_from_index

# elements per vectorised chunk of an orbit-tree level
_CHUNK = 1 << 22


def birkhoff_word_sum(sys: SemigroupSystem, w, x, phi: Potentials | None = None):
    """``S_w Phi(x)`` following the first-symbol-acts-first convention."""
    phi = sys.potentials if phi is None else phi
    w = as_word(w, sys.k)
    y = sys.check_points(x)
    total = np.zeros(np.shape(y))
    for s in w.symbols:
        total = total + phi[s](y)
        y = sys.generators[s](y)
    return total if np.ndim(total) else float(total)


@dataclass
class AveragedCocycle:
    x: float
    n: int
    value: float
    contributions: np.ndarray
    method: str = "exact-tree"
    seed: int | None = None
    samples: int | None = None
    stderr: float = 0.0


def level_contributions(sys: SemigroupSystem, xs, n: int, phi: Potentials | None = None,
                        budget: int | None = None) -> np.ndarray:
    """Per-level terms of ``A_n`` for many points, shape ``(P, n)``."""
    phi = sys.potentials if phi is None else phi
    xs = sys.check_points(np.atleast_1d(np.asarray(xs, dtype=float)))
    check_budget(sys.k, max(n - 1, 0), budget)
    out = np.zeros((xs.size, n))
    if n == 0:
        return out
    consts = phi.constant_values
    if consts is not None:
        out[:] = consts.mean()
        return out
    width = sys.k ** (n - 1)
    step = max(1, _CHUNK // width)
    for a in range(0, xs.size, step):
        chunk = xs[a:a + step]
        for m, level in enumerate(orbit_levels(sys, chunk, n - 1, budget)):
            out[a:a + step, m] = phi.mean(level).mean(axis=1)
    return out


def averaged_sums(sys: SemigroupSystem, xs, n: int, phi: Potentials | None = None,
                  budget: int | None = None) -> np.ndarray:
    """``A_n`` at every point of ``xs`` (exact tree)."""
    return level_contributions(sys, xs, n, phi, budget).sum(axis=1)


def _sample_words(k: int, n: int, samples: int, seed: int, block: int = 1024) -> np.ndarray:
    # block b is drawn from a Philox stream keyed by seed with counter b, so any
    # block can be regenerated independently of the others
    rows = []
    for b in range(0, samples, block):
        gen = np.random.Generator(np.random.Philox(key=seed, counter=b // block))
        rows.append(gen.integers(0, k, size=(min(block, samples - b), n)))
    return np.concatenate(rows, axis=0) if rows else np.zeros((0, n), dtype=int)


def averaged_sum(sys: SemigroupSystem, x: float, n: int, method: str = "exact-tree",
                 phi: Potentials | None = None, seed: int | None = None,
                 samples: int | None = None, budget: int | None = None) -> AveragedCocycle:
    """``A_n(x)`` by the level expansion (``exact-tree``) or by word sampling.

    ``monte-carlo`` averages ``S_w Phi(x)`` over ``samples`` uniformly drawn
    words and reports the standard error of the mean.
    """
    phi = sys.potentials if phi is None else phi
    if n < 0:
        raise ValueError("n must be >= 0")
    if method == "exact-tree":
        contrib = level_contributions(sys, [x], n, phi, budget)[0]
        return AveragedCocycle(float(x), n, float(contrib.sum()), contrib)
    if method != "monte-carlo":
        raise ValueError(f"unknown method {method!r}")
    if seed is None or samples is None or samples < 1:
        raise ValueError("monte-carlo needs a seed and samples >= 1")
    sys.check_points(x)
    words = _sample_words(sys.k, n, samples, seed)
    y = np.full(samples, float(x))
    sums = np.zeros(samples)
    contrib = np.zeros(n)
    for j in range(n):
        step = np.zeros(samples)
        nxt = np.empty(samples)
        for i in range(sys.k):
            mask = words[:, j] == i
            if mask.any():
                step[mask] = phi[i](y[mask])
                nxt[mask] = sys.generators[i](y[mask])
        contrib[j] = step.mean()
        sums += step
        y = nxt
    stderr = float(sums.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return AveragedCocycle(float(x), n, float(sums.mean()), contrib, "monte-carlo",
                           seed, samples, stderr)


# ---------------------------------------------------------------------------
# Lyapunov exponents


@dataclass
class LyapunovEstimate:
    x: float
    schedule: list[int]
    values: np.ndarray
    lower: float
    upper: float
    classification: str | None = None
    heuristic: bool = True


def _tail(values: np.ndarray, fraction: float) -> np.ndarray:
    m = max(1, int(np.ceil(fraction * len(values))))
    return values[..., -m:]


def lyapunov_values(sys: SemigroupSystem, xs, schedule: Sequence[int],
                    budget: int | None = None) -> np.ndarray:
    """``lambda_n(x) = A_n(x) / n`` with ``Phi = log a``; shape ``(P, len(schedule))``."""
    schedule = list(schedule)
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise ValueError("schedule must be nonempty, increasing and start at n >= 1")
    contrib = level_contributions(sys, xs, schedule[-1], sys.log_factors(), budget)
    cum = np.cumsum(contrib, axis=1)
    idx = np.array(schedule) - 1
    return cum[:, idx] / np.array(schedule, dtype=float)


def lyapunov_profile(sys: SemigroupSystem, x: float, schedule: Sequence[int],
                     tail_fraction: float = 0.25, interval: tuple[float, float] | None = None,
                     budget: int | None = None) -> LyapunovEstimate:
    """Finite-scale lower/upper exponents: min/max of ``lambda_n`` over the tail.

    If ``interval = (a, b)`` is given the point is classified as ``inside``
    when ``[lower, upper]`` lies in ``[a, b]``; this is a finite-``n`` heuristic.
    """
    vals = lyapunov_values(sys, [x], schedule, budget)[0]
    tail = _tail(vals, tail_fraction)
    lo, hi = float(tail.min()), float(tail.max())
    cls = None
    if interval is not None:
        cls = "inside" if interval[0] <= lo and hi <= interval[1] else "outside"
    return LyapunovEstimate(float(x), list(schedule), vals, lo, hi, cls)


def lyapunov_bounds(sys: SemigroupSystem, xs, schedule: Sequence[int],
                    tail_fraction: float = 0.25, budget: int | None = None
                    ) -> tuple[float, float]:
    """``(alpha_hat, beta_hat)`` over a sample; ``beta_hat`` is capped by ``max log a_i``."""
    vals = lyapunov_values(sys, xs, schedule, budget)
    tail = _tail(vals, tail_fraction)
    return float(tail.min()), float(min(tail.max(), sys.max_log_factor))


def write_lyapunov_csv(path, rows: Sequence[LyapunovEstimate]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["x", "n", "A_n", "lambda_n"])
        for est in rows:
            for n, lam in zip(est.schedule, est.values):
                out.writerow([repr(est.x), n, repr(float(lam * n)), repr(float(lam))])


# ---------------------------------------------------------------------------
# tempered contraction


@dataclass
class TemperedDiagnostic:
    x: float
    eps: float
    n_max: int
    value: float
    witness_n: int
    witness_word: Word
    profile: np.ndarray = field(repr=False)
    heuristic: bool = True

    def log_line(self) -> str:
        return f"{self.witness_n},{self.witness_word},{self.value!r}"


def tempered_diagnostic(sys: SemigroupSystem, x: float, eps: float, n_max: int,
                        phi: Potentials | None = None,
                        budget: int | None = None) -> TemperedDiagnostic:
    """Exact finite-depth minimum of ``k**-n sum_w S_w Phi(x) - S_w' Phi(x) + n eps``.

    The minimum runs over ``1 <= n <= n_max``, ``1 <= |w'| <= n``.  Reports a
    number only; membership in the tempered set is never decided.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    phi = sys.potentials if phi is None else phi
    check_budget(sys.k, n_max, budget)
    sys.check_points(x)
    sums = np.zeros(1)
    best_sum, best_word = -np.inf, None
    avg = 0.0
    profile = np.zeros(n_max)
    value, witness = np.inf, (1, None)
    for n, level in enumerate(orbit_levels(sys, [x], n_max - 1, budget), start=1):
        nodes = level[0]
        # children of level n-1 nodes: word sums at level n
        child = np.stack([sums + phi[i](nodes) for i in range(sys.k)], axis=-1).reshape(-1)
        avg += phi.mean(nodes).mean()
        j = int(np.argmax(child))
        if child[j] > best_sum:
            best_sum, best_word = float(child[j]), word_from_index(j, sys.k, n)
        cand = avg - best_sum + n * eps
        profile[n - 1] = cand
        if cand < value:
            value, witness = cand, (n, best_word)
        sums = child
    return TemperedDiagnostic(float(x), eps, n_max, float(value), witness[0], witness[1],
                              profile)
