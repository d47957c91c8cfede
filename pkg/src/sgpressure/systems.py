"""Semigroup systems on one-dimensional compact spaces.

A system is a tuple of piecewise-linear generators ``f_0, ..., f_{k-1}`` on
either the circle ``[0, 1)`` (mod-1 metric) or a finite union of closed
intervals in ``[0, 1]`` (Euclidean metric), together with one potential per
generator.

Composition conventions follow the two formulas they come from:

* ``apply_word(sys, w, x)`` evaluates ``f_w = f_{i1} o f_{i2} o ... o f_{in}``,
  i.e. the *last* symbol acts first.
* orbit trees store, for ``u = i1 ... im``, the point
  ``f_{im} o ... o f_{i1}(x)`` (the *first* symbol acts first), which is the
  order used inside Birkhoff word sums.  Hence ``tree.node(u)`` equals
  ``apply_word(sys, reverse(u), x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import CommutationError, DomainError
from .words import as_word, check_budget

PIECE_TOL = 1e-6


# ---------------------------------------------------------------------------
# domains


class CircleDomain:
    """The circle ``[0, 1)`` with ``d(x, y) = min(|x - y|, 1 - |x - y|)``."""

    kind = "circle"
    hull = (0.0, 1.0)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.isfinite(x) & (x >= 0.0) & (x < 1.0)

    def normalize(self, x):
        y = np.mod(np.asarray(x, dtype=float), 1.0)
        return np.where(y >= 1.0, y - 1.0, y)

    def distance(self, x, y):
        d = np.mod(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)), 1.0)
        return np.minimum(d, 1.0 - d)

    def floor_point(self, y):
        """Largest domain point not exceeding ``y`` along the lifted line."""
        return np.asarray(y, dtype=float)

    def probe_points(self, n: int) -> np.ndarray:
        return np.arange(n) / n

    def describe(self) -> dict:
        return {"kind": "circle"}


class IntervalUnionDomain:
    """A finite union of disjoint closed intervals in ``[0, 1]``."""

    kind = "subset"

    def __init__(self, intervals, tol: float = 1e-9):
        iv = np.asarray(intervals, dtype=float).reshape(-1, 2)
        order = np.argsort(iv[:, 0])
        self.intervals = iv[order]
        self.tol = tol
        self.hull = (float(self.intervals[0, 0]), float(self.intervals[-1, 1]))

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.intervals[:, 0], x + self.tol, side="right") - 1
        return x, np.clip(idx, 0, len(self.intervals) - 1), idx

    def contains(self, x) -> np.ndarray:
        x, idx, raw = self._locate(x)
        lo = self.intervals[idx, 0]
        hi = self.intervals[idx, 1]
        return np.isfinite(x) & (raw >= 0) & (x >= lo - self.tol) & (x <= hi + self.tol)

    def normalize(self, x):
        return np.asarray(x, dtype=float)

    def distance(self, x, y):
        return np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    def floor_point(self, y):
        y, idx, raw = self._locate(y)
        hi = self.intervals[idx, 1]
        out = np.minimum(y, hi)
        return np.where(raw >= 0, out, np.nan)

    def probe_points(self, n: int) -> np.ndarray:
        lengths = self.intervals[:, 1] - self.intervals[:, 0]
        per = np.maximum(1, np.round(n * lengths / lengths.sum()).astype(int))
        # m evenly spaced points per interval, built without a Python loop
        start = np.repeat(self.intervals[:, 0], per)
        width = np.repeat(self.intervals[:, 1] - self.intervals[:, 0], per)
        m = np.repeat(per, per)
        j = np.arange(per.sum()) - np.repeat(np.cumsum(per) - per, per)
        frac = np.where(m > 1, j / np.maximum(m - 1, 1), 0.0)
        return start + width * frac

    def describe(self) -> dict:
        return {"kind": "subset", "intervals": self.intervals.tolist()}


def cantor_intervals(depth: int) -> np.ndarray:
    """The ``2**depth`` closed intervals of the level-``depth`` middle-third set."""
    lefts = np.zeros(1, dtype=np.int64)
    for _ in range(depth):
        lefts = np.concatenate([3 * lefts, 3 * lefts + 2])
    lefts.sort()
    scale = float(3**depth)
    return np.stack([lefts / scale, (lefts + 1) / scale], axis=1)


class CantorDomain(IntervalUnionDomain):
    """Middle-third Cantor set, membership decided from ``depth`` ternary digits."""

    def __init__(self, depth: int = 16, tol: float = 1e-9):
        if depth < 0:
            raise ValueError("cantor depth must be >= 0")
        self.depth = depth
        super().__init__(cantor_intervals(depth), tol=tol)

    def contains(self, x) -> np.ndarray:
        y = np.array(x, dtype=float, copy=True)
        ok = np.isfinite(y) & (y >= -self.tol) & (y <= 1.0 + self.tol)
        tol = self.tol
        for _ in range(self.depth):
            y = 3.0 * y
            tol = 3.0 * tol
            ok &= (y <= 1.0 + tol) | (y >= 2.0 - tol)
            y = np.where(y >= 1.5, y - 2.0, y)
            if tol > 0.1:
                break
        return ok

    def describe(self) -> dict:
        return {"kind": "cantor", "depth": self.depth}


# ---------------------------------------------------------------------------
# maps and potentials


@dataclass(frozen=True)
class PiecewiseLinearMap:
    """``x -> slope_j * x + offset_j`` on piece ``[lo_j, hi_j]`` (mod 1 on the circle)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    slopes: tuple[float, ...]
    offsets: tuple[float, ...]
    circle: bool = False
    label: str = ""

    def __post_init__(self):
        n = len(self.lo)
        if not (len(self.hi) == len(self.slopes) == len(self.offsets) == n) or n == 0:
            raise ValueError("piece arrays must be nonempty and of equal length")
        if any(s == 0 for s in self.slopes):
            raise ValueError("zero slope: map has critical points")
        if self.circle:
            if n != 1:
                raise ValueError("circle maps are single-piece affine maps")
            if float(self.slopes[0]) != round(self.slopes[0]):
                raise ValueError("circle maps need an integer slope to be continuous")
        object.__setattr__(self, "_lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "_hi", np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "_s", np.asarray(self.slopes, dtype=float))
        object.__setattr__(self, "_b", np.asarray(self.offsets, dtype=float))

    @classmethod
    def circle_affine(cls, slope: int, offset: float = 0.0, label: str = ""):
        return cls((0.0,), (1.0,), (float(slope),), (float(offset),), True, label)

    def piece_index(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.circle:
            return np.zeros(x.shape, dtype=np.intp)
        idx = np.searchsorted(self._lo, x + PIECE_TOL, side="right") - 1
        bad = (idx < 0) | ~np.isfinite(x)
        idx = np.clip(idx, 0, len(self._lo) - 1)
        bad |= x > self._hi[idx] + PIECE_TOL
        if np.any(bad):
            where = np.asarray(x)[bad].ravel()[:3]
            raise DomainError(f"map {self.label or '?'} undefined at {where.tolist()}")
        return idx

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.circle:
            y = np.mod(self._s[0] * x + self._b[0], 1.0)
            return np.where(y >= 1.0, y - 1.0, y)
        idx = self.piece_index(x)
        return self._s[idx] * x + self._b[idx]

    def factor(self, x):
        """Conformal factor ``a(x) = |f'(x)|``."""
        return np.abs(self._s[self.piece_index(x)])

    @property
    def max_factor(self) -> float:
        return float(np.max(np.abs(self._s)))

    @property
    def min_factor(self) -> float:
        return float(np.min(np.abs(self._s)))

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([self._lo, self._hi]))

    def describe(self) -> dict:
        return {
            "pieces": [list(p) for p in zip(self.lo, self.hi, self.slopes, self.offsets)],
            "circle": self.circle,
        }


class Potential:
    """A real continuous function on the domain, vectorised over numpy arrays.

    Constant potentials carry their value in ``constant`` so that sums over
    orbit trees can be done in closed form.
    """

    def __init__(self, func: Callable | None = None, constant: float | None = None,
                 label: str = ""):
        if (func is None) == (constant is None):
            raise ValueError("give exactly one of func or constant")
        self.func = func
        self.constant = None if constant is None else float(constant)
        self.label = label or (f"{self.constant:g}" if func is None else "func")

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.constant is not None:
            return np.full(x.shape, self.constant)
        v = np.asarray(self.func(x), dtype=float)
        return v if v.shape == x.shape else np.broadcast_to(v, x.shape).copy()

    def scaled(self, t: float) -> "Potential":
        if self.is_constant:
            return Potential(constant=t * self.constant, label=f"{t:g}*{self.label}")
        f = self.func
        return Potential(lambda x: t * f(x), label=f"{t:g}*{self.label}")

    def shifted(self, c: float) -> "Potential":
        if self.is_constant:
            return Potential(constant=self.constant + c, label=f"{self.label}+{c:g}")
        f = self.func
        return Potential(lambda x: f(x) + c, label=f"{self.label}+{c:g}")

    def plus(self, other: "Potential") -> "Potential":
        if self.is_constant and other.is_constant:
            return Potential(constant=self.constant + other.constant)
        return Potential(lambda x: self(x) + other(x),
                         label=f"{self.label}+{other.label}")

    def composed(self, g: Callable) -> "Potential":
        """``phi o g``; constants are unchanged."""
        if self.is_constant:
            return self
        f = self.func
        return Potential(lambda x: f(g(x)), label=f"{self.label}∘g")

    def __repr__(self):
        return f"Potential({self.label})"


@dataclass(frozen=True)
class Potentials:
    """The vector ``Phi = (phi_0, ..., phi_{k-1})``."""

    items: tuple[Potential, ...]

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)

    @classmethod
    def constants(cls, values: Sequence[float]) -> "Potentials":
        return cls(tuple(Potential(constant=v) for v in values))

    @classmethod
    def zero(cls, k: int) -> "Potentials":
        return cls.constants([0.0] * k)

    @property
    def is_constant(self) -> bool:
        return all(p.is_constant for p in self.items)

    @property
    def constant_values(self) -> np.ndarray | None:
        if not self.is_constant:
            return None
        return np.array([p.constant for p in self.items])

    def mean(self, x):
        """``(1/k) sum_i phi_i(x)``."""
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape)
        for p in self.items:
            total = total + p(x)
        return total / len(self.items)

    def scaled(self, t: float) -> "Potentials":
        return Potentials(tuple(p.scaled(t) for p in self.items))

    def shifted(self, c: float) -> "Potentials":
        return Potentials(tuple(p.shifted(c) for p in self.items))

    def perturbed(self, delta: Sequence[Potential]) -> "Potentials":
        return Potentials(tuple(p.plus(d) for p, d in zip(self.items, delta)))

    def composed(self, g: Callable) -> "Potentials":
        return Potentials(tuple(p.composed(g) for p in self.items))

    def sup_distance(self, other: "Potentials", probe) -> float:
        """``max_i sup_x |phi_i(x) - psi_i(x)|`` over the probe points."""
        probe = np.asarray(probe, dtype=float)
        return float(max(np.max(np.abs(p(probe) - q(probe)))
                         for p, q in zip(self.items, other.items)))

    def describe(self) -> list:
        return [p.label for p in self.items]


def log_factor_potential(f: PiecewiseLinearMap) -> Potential:
    if f.min_factor == f.max_factor:
        return Potential(constant=float(np.log(f.max_factor)), label=f"log{f.max_factor:g}")
    return Potential(lambda x: np.log(f.factor(x)), label=f"log a[{f.label}]")


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class SemigroupSystem:
    name: str
    generators: tuple[PiecewiseLinearMap, ...]
    domain: object
    potentials: Potentials
    descriptor: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.generators) < 1:
            raise ValueError("need at least one generator")
        if len(self.potentials) != len(self.generators):
            raise ValueError(
                f"{len(self.generators)} generators but {len(self.potentials)} potentials"
            )

    @property
    def k(self) -> int:
        return len(self.generators)

    def metric(self, x, y):
        return self.domain.distance(x, y)

    def log_factors(self) -> Potentials:
        """``Phi = (log a_0, ..., log a_{k-1})``."""
        return Potentials(tuple(log_factor_potential(f) for f in self.generators))

    def with_potentials(self, phi: Potentials) -> "SemigroupSystem":
        return SemigroupSystem(self.name, self.generators, self.domain, phi, self.descriptor)

    @property
    def max_log_factor(self) -> float:
        return float(np.log(max(f.max_factor for f in self.generators)))

    @property
    def min_log_factor(self) -> float:
        return float(np.log(min(f.min_factor for f in self.generators)))

    def check_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not np.all(self.domain.contains(x)):
            bad = x[~self.domain.contains(x)].ravel()[:3]
            raise DomainError(f"points {bad.tolist()} outside the domain of {self.name}")
        return x


def apply_word(sys: SemigroupSystem, w, x):
    """Evaluate ``f_w(x)`` with ``f_w = f_{i1} o ... o f_{in}``."""
    w = as_word(w, sys.k)
    y = sys.check_points(x)
    for s in reversed(w.symbols):
        y = sys.generators[s](y)
    return y if np.ndim(y) else float(y)


def orbit_levels(sys: SemigroupSystem, xs, n: int, budget: int | None = None
                 ) -> Iterator[np.ndarray]:
    """Yield the orbit-tree levels ``0..n`` for all points at once.

    Level ``m`` has shape ``(P, k**m)``; column ``index(u)`` holds
    ``f_{um} o ... o f_{u1}(x)``.
    """
    check_budget(sys.k, n, budget)
    level = np.asarray(xs, dtype=float).reshape(-1, 1)
    yield level
    for _ in range(n):
        level = np.stack([f(level) for f in sys.generators], axis=-1)
        level = level.reshape(level.shape[0], -1)
        yield level


@dataclass(frozen=True)
class OrbitTree:
    root: float
    depth: int
    k: int
    levels: tuple[np.ndarray, ...]

    def node(self, u) -> float:
        u = as_word(u, self.k)
        return float(self.levels[len(u)][u.index()])

    def level(self, m: int) -> np.ndarray:
        return self.levels[m]


def build_orbit_tree(sys: SemigroupSystem, x: float, n: int,
                     budget: int | None = None) -> OrbitTree:
    sys.check_points(x)
    levels = tuple(lvl[0] for lvl in orbit_levels(sys, [x], n, budget))
    return OrbitTree(float(x), n, sys.k, levels)


def commutation_defect(sys: SemigroupSystem, g: Callable, probe) -> float:
    probe = np.asarray(probe, dtype=float)
    worst = 0.0
    for f in sys.generators:
        worst = max(worst, float(np.max(sys.metric(g(f(probe)), f(g(probe))))))
    return worst


def conjugate_system(sys: SemigroupSystem, g: Callable, g_inv: Callable,
                     tol: float = 1e-9, n_probe: int = 10_000) -> SemigroupSystem:
    """Same generators, potentials ``phi_i o g^{-1}``.

    ``g`` must invert ``g_inv`` and commute with every generator on a probe
    grid; otherwise :class:`CommutationError` is raised.
    """
    probe = sys.domain.probe_points(n_probe)
    inv_err = float(np.max(sys.metric(g(g_inv(probe)), probe)))
    if inv_err > tol:
        raise CommutationError(f"g o g_inv differs from identity by {inv_err:.3g}")
    defect = commutation_defect(sys, g, probe)
    if defect > tol:
        raise CommutationError(f"commutation defect {defect:.3g} exceeds {tol:g}")
    return SemigroupSystem(f"{sys.name}|g", sys.generators, sys.domain,
                           sys.potentials.composed(g_inv), sys.descriptor)


def reflection(x):
    """``g(x) = 1 - x`` on the circle (also maps the Cantor set to itself)."""
    y = np.mod(1.0 - np.asarray(x, dtype=float), 1.0)
    return np.where(y >= 1.0, y - 1.0, y)


def interval_reflection(x):
    return 1.0 - np.asarray(x, dtype=float)


def mirror_for(sys: "SemigroupSystem") -> Callable:
    """The map ``x -> 1 - x`` in the form that fits the domain (mod 1 on the circle)."""
    return reflection if sys.domain.kind == "circle" else interval_reflection


# ---------------------------------------------------------------------------
# built-in catalog


def doubling_pair() -> SemigroupSystem:
    """``f0 = 2x mod 1``, ``f1 = 2x + 1/2 mod 1`` on the circle."""
    gens = (PiecewiseLinearMap.circle_affine(2, 0.0, "2x"),
            PiecewiseLinearMap.circle_affine(2, 0.5, "2x+1/2"))
    sys = SemigroupSystem("doubling_pair", gens, CircleDomain(), Potentials.zero(2),
                          {"kind": "circle_affine", "slopes": [2, 2], "offsets": [0.0, 0.5]})
    return sys.with_potentials(sys.log_factors())


def heterogeneous_pair() -> SemigroupSystem:
    """``f0 = 2x mod 1``, ``f1 = 3x mod 1`` on the circle."""
    gens = (PiecewiseLinearMap.circle_affine(2, 0.0, "2x"),
            PiecewiseLinearMap.circle_affine(3, 0.0, "3x"))
    sys = SemigroupSystem("heterogeneous_pair", gens, CircleDomain(), Potentials.zero(2),
                          {"kind": "circle_affine", "slopes": [2, 3], "offsets": [0.0, 0.0]})
    return sys.with_potentials(sys.log_factors())


def cantor_k1(cantor_depth: int = 16) -> SemigroupSystem:
    """Single map ``3x mod 1`` restricted to the middle-third Cantor set.

    The map is realised on the two level-1 pieces as ``3x`` on ``[0, 1/3]``
    and ``3x - 2`` on ``[2/3, 1]`` so that it is continuous on the set.
    """
    f = PiecewiseLinearMap((0.0, 2.0 / 3.0), (1.0 / 3.0, 1.0), (3.0, 3.0), (0.0, -2.0),
                           False, "3x mod 1")
    sys = SemigroupSystem("cantor_k1", (f,), CantorDomain(cantor_depth), Potentials.zero(1),
                          {"kind": "cantor_k1", "cantor_depth": cantor_depth})
    return sys.with_potentials(sys.log_factors())


BUILTIN_SYSTEMS = {
    "doubling_pair": doubling_pair,
    "cantor_k1": cantor_k1,
    "heterogeneous_pair": heterogeneous_pair,
}


def builtin(name: str) -> SemigroupSystem:
    try:
        return BUILTIN_SYSTEMS[name]()
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {sorted(BUILTIN_SYSTEMS)}") from None


def system_from_descriptor(desc: dict) -> SemigroupSystem:
    """Build a system from a config descriptor.

    Keys: ``kind`` (circle_affine | cantor_k1 | custom_piecewise), ``slopes``,
    ``offsets``, ``pieces`` and ``domain`` (custom only), ``cantor_depth``,
    ``potentials`` (``"log_factor"``, ``"zero"`` or a list of constants).
    """
    kind = desc.get("kind")
    if kind == "circle_affine":
        slopes, offsets = desc["slopes"], desc.get("offsets", [0.0] * len(desc["slopes"]))
        if len(slopes) != len(offsets):
            raise ValueError("slopes and offsets differ in length")
        gens = tuple(PiecewiseLinearMap.circle_affine(s, b, f"{s}x+{b:g}")
                     for s, b in zip(slopes, offsets))
        domain = CircleDomain()
        name = desc.get("name", "circle_affine")
    elif kind == "cantor_k1":
        base = cantor_k1(int(desc.get("cantor_depth", 16)))
        gens, domain, name = base.generators, base.domain, desc.get("name", "cantor_k1")
    elif kind == "custom_piecewise":
        gens = tuple(
            PiecewiseLinearMap(*[tuple(float(p[j]) for p in pieces) for j in range(4)],
                               False, f"map{i}")
            for i, pieces in enumerate(desc["pieces"])
        )
        domain = IntervalUnionDomain(desc["domain"])
        name = desc.get("name", "custom_piecewise")
    else:
        raise ValueError(f"unknown system kind {kind!r}")
    sys = SemigroupSystem(name, gens, domain, Potentials.zero(len(gens)), dict(desc))
    pot = desc.get("potentials", "log_factor")
    if pot == "log_factor":
        phi = sys.log_factors()
    elif pot == "zero":
        phi = Potentials.zero(sys.k)
    else:
        if len(pot) != sys.k:
            raise ValueError(f"{len(pot)} potentials for {sys.k} generators")
        phi = Potentials.constants([float(v) for v in pot])
    return sys.with_potentials(phi)
