"""Config-driven experiment runs and the invariant battery.

A config is a TOML file (see ``docs/config_schema.md``); it is checked
against ``schemas/config.schema.json`` before anything runs.  A run writes

``manifest.json``        config echo, resolved defaults, library versions
``results.csv``          one row per (delta, N) uniform-depth cover
``dimension_report.json`` Bowen root, bracket, curve, box-count cross-check
``lyapunov.csv``         lambda_n profiles on a subsample of Z
``boxcount.csv``         occupied-box counts per scale

Failures write ``error.json`` and return exit code 2 (config), 3 (word
budget) or 4 (solver).  Nothing depends on the clock or on platform
entropy, so results.csv is byte-identical across runs of one config.
"""

from __future__ import annotations

import copy
import json
import math
import os
import platform
import sys as _sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata, resources
from pathlib import Path

import jsonschema
import numpy as np

from . import boxdim, cocycle, pressure, solver
from .errors import BudgetExceededError, ConfigError, SolverError
from .systems import (BUILTIN_SYSTEMS, Potential, Potentials, SemigroupSystem, builtin,
                      conjugate_system, mirror_for, system_from_descriptor)
from .words import DEFAULT_BUDGET, check_budget

if _sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_SOLVER = 0, 2, 3, 4
OUT_DIR_ENV = "SGPRESSURE_OUT_DIR"

DEFAULT_N = (2, 4, 6, 8, 10)
DEFAULT_DELTA = (0.2, 0.1, 0.05)


def _schema(name: str) -> dict:
    text = resources.files("sgpressure").joinpath("schemas", name).read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# config


@dataclass
class ExperimentConfig:
    name: str
    system: dict
    sample: dict
    potentials: dict
    N_schedule: list[int]
    delta_schedule: list[float]
    t_grid: list[float]
    estimator: dict
    seeds: dict
    budgets: dict
    output: dict
    raw: dict = field(default_factory=dict, repr=False)

    def build_system(self) -> SemigroupSystem:
        desc = dict(self.system)
        if "builtin" in desc:
            return builtin(desc["builtin"])
        return system_from_descriptor(desc)

    def build_sample(self) -> pressure.SetSample:
        s = self.sample
        if s["kind"] == "grid":
            return pressure.SetSample.grid(int(s["resolution"]))
        if s["kind"] == "cantor":
            return pressure.SetSample.cantor(int(s["depth"]))
        return pressure.SetSample.explicit(s["points"], s.get("mesh"))

    def build_potentials(self, sys: SemigroupSystem) -> Potentials:
        p = self.potentials
        sel = p["selector"]
        if sel == "log_factor":
            phi = sys.log_factors()
        elif sel == "zero":
            phi = Potentials.zero(sys.k)
        else:
            phi = Potentials.constants(p["values"])
        return phi.scaled(float(p.get("scale", 1.0)))

    def scale(self, delta: float) -> solver.Scale:
        e = self.estimator
        return solver.Scale(float(delta), tuple(self.N_schedule), e["variant"], e["strategy"],
                            e["mode"], None, e["tail_fraction"], e["resolution_factor"],
                            e["sup_method"])

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("raw")
        return d


_ESTIMATOR_DEFAULTS = {"variant": "center", "strategy": "sweep", "mode": "anchored",
                       "tail_fraction": pressure.TAIL_FRACTION,
                       "resolution_factor": pressure.RESOLUTION_FACTOR,
                       "sup_method": "modulus", "root_tol": solver.ROOT_TOL}


def _field_path(err: jsonschema.ValidationError) -> str:
    path = list(err.absolute_path)
    if err.validator == "required":
        missing = err.message.split("'")[1]
        path.append(missing)
    elif err.validator == "additionalProperties" and "'" in err.message:
        path.append(err.message.split("'")[1])
    return ".".join(str(p) for p in path) or "<root>"


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a parsed config and fill in defaults; raises ``ConfigError``."""
    validator = jsonschema.Draft202012Validator(_schema("config.schema.json"))
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, _field_path(err))
    raw = copy.deepcopy(raw)
    sched = raw.get("schedule", {})
    cfg = ExperimentConfig(
        name=raw.get("name", "experiment"),
        system=raw["system"],
        sample=raw["sample"],
        potentials=raw.get("potentials", {"selector": "log_factor"}),
        N_schedule=list(sched.get("N", DEFAULT_N)),
        delta_schedule=list(sched.get("delta", DEFAULT_DELTA)),
        t_grid=list(sched.get("t", [0.0, 0.5, 1.0, 1.5])),
        estimator={**_ESTIMATOR_DEFAULTS, **raw.get("estimator", {})},
        seeds={"monte_carlo": 0, "samples": 4096, **raw.get("seeds", {})},
        budgets={"words": DEFAULT_BUDGET, **raw.get("budgets", {})},
        output={"dir": "out", **raw.get("output", {})},
        raw=raw,
    )
    # semantic checks the schema cannot express
    for key, values in (("schedule.N", cfg.N_schedule), ("schedule.t", cfg.t_grid)):
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("schedule must be strictly increasing", key)
    if any(b >= a for a, b in zip(cfg.delta_schedule, cfg.delta_schedule[1:])):
        raise ConfigError("delta schedule must be strictly decreasing", "schedule.delta")
    try:
        sys = cfg.build_system()
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc), "system") from exc
    if cfg.potentials["selector"] == "constants" and len(cfg.potentials.get("values", [])) != sys.k:
        raise ConfigError(f"need {sys.k} potential values", "potentials.values")
    try:
        Z = cfg.build_sample()
        sys.check_points(Z.points)
    except ValueError as exc:
        raise ConfigError(str(exc), "sample") from exc
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "<file>") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}", "<file>") from exc
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# runs


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("numpy", "scipy", "numba", "jsonschema", "artifact"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def _delta_task(raw: dict, delta: float) -> dict:
    """Everything computed at one delta; runs in a worker process when requested."""
    cfg = config_from_dict(raw)
    sys, Z = cfg.build_system(), cfg.build_sample()
    phi = cfg.build_potentials(sys)
    scale = solver.match_scale(sys, Z, cfg.scale(delta))
    est = solver.estimates_at(sys, Z, phi, scale)
    rows = pressure.result_rows(sys.name, est)
    try:
        report = solver.solve_bowen(sys, Z, None, scale, cfg.estimator["root_tol"],
                                    cross_check=False)
        curve = solver.pressure_curve(sys, Z, None, cfg.t_grid, scale)
        return {"delta": delta, "rows": rows, "report": report.to_dict(),
                "curve": curve.to_dict(), "estimates": {
                    "P": est.P.to_dict(), "CP_lower": est.CP_lower.to_dict(),
                    "CP_upper": est.CP_upper.to_dict()}}
    except SolverError as exc:
        curve = exc.curve.to_dict() if exc.curve is not None else None
        return {"delta": delta, "rows": rows, "error": str(exc), "curve": curve}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serialisable: {type(obj)}")


def _clean(obj):
    """Replace non-finite floats by None so the JSON is strict."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _error(out: Path, code: int, exc: Exception, field_name: str | None = None) -> int:
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "error.json", {"exit_code": code, "error": type(exc).__name__,
                                     "message": str(exc), "field": field_name})
    return code


def resolve_out_dir(cli_value: str | None, cfg: ExperimentConfig | None) -> Path:
    if cli_value:
        return Path(cli_value)
    if os.environ.get(OUT_DIR_ENV):
        return Path(os.environ[OUT_DIR_ENV])
    return Path(cfg.output["dir"] if cfg is not None else "out")


def run_experiment(cfg: ExperimentConfig, out_dir, workers: int = 1,
                   budget_words: int | None = None) -> int:
    """Run every delta of the schedule and write the artifacts; returns the exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    budget = int(budget_words or cfg.budgets["words"])
    sys, Z = cfg.build_system(), cfg.build_sample()
    try:
        check_budget(sys.k, max(cfg.N_schedule), budget)
    except BudgetExceededError as exc:
        return _error(out, EXIT_BUDGET, exc, "budgets.words")

    deltas = list(cfg.delta_schedule)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_delta_task, [cfg.raw] * len(deltas), deltas))
    else:
        parts = [_delta_task(cfg.raw, d) for d in deltas]

    rows = [r for part in parts for r in part["rows"]]
    pressure.write_results_csv(out / "results.csv", rows)

    lyap_pts = Z.points[np.linspace(0, len(Z) - 1, min(16, len(Z))).astype(int)]
    profiles = [cocycle.lyapunov_profile(sys, x, cfg.N_schedule) for x in lyap_pts]
    cocycle.write_lyapunov_csv(out / "lyapunov.csv", profiles)
    box = boxdim.box_dimension(Z)
    boxdim.write_boxcount_csv(out / "boxcount.csv", box)

    mc_x = float(lyap_pts[len(lyap_pts) // 2])
    mc = cocycle.averaged_sum(sys, mc_x, min(cfg.N_schedule), "monte-carlo",
                              seed=int(cfg.seeds["monte_carlo"]),
                              samples=int(cfg.seeds["samples"]))
    exact = cocycle.averaged_sum(sys, mc_x, min(cfg.N_schedule))
    manifest = {
        "name": cfg.name, "config": cfg.to_dict(), "versions": _versions(),
        "budget_words": budget, "workers": workers,
        "outputs": ["results.csv", "dimension_report.json", "lyapunov.csv", "boxcount.csv"],
        "monte_carlo_check": {"x": mc_x, "n": mc.n, "exact": exact.value, "estimate": mc.value,
                              "stderr": mc.stderr, "seed": mc.seed, "samples": mc.samples},
    }
    _write_json(out / "manifest.json", _clean(manifest))

    failed = [p for p in parts if "error" in p]
    final = parts[-1]
    report = {
        "system": sys.name, "sample": Z.descriptor, "status": "ok" if not failed else "failed",
        "delta_schedule": deltas,
        "reported_delta": deltas[-1],
        "per_delta": {repr(p["delta"]): p.get("report", {"error": p.get("error")})
                      for p in parts},
        "root_profile": {repr(p["delta"]): p["report"]["t_star"]
                         for p in parts if "report" in p},
        "box_dimension": box.to_dict(),
    }
    if "report" in final:
        rep = final["report"]
        report.update({k: rep[k] for k in ("t_star", "bracket", "h_hat", "alpha_hat",
                                           "beta_hat", "closed_form")})
        report["curve"] = final["curve"]
        report["estimates"] = final["estimates"]
    _write_json(out / "dimension_report.json", _clean(report))
    if "error" in final:
        return _error(out, EXIT_SOLVER, SolverError(final["error"]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# invariant battery


@dataclass
class InvariantResult:
    name: str
    passed: bool
    margin: float
    checks: int
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.name}: {self.checks} checks, worst margin {self.margin:.3g} {self.detail}"


class _Tally:
    def __init__(self, name: str):
        self.name, self.margin, self.checks, self.detail = name, math.inf, 0, ""

    def add(self, margin: float, detail: str = "") -> None:
        """``margin >= 0`` means the check holds."""
        self.checks += 1
        if margin < self.margin:
            self.margin, self.detail = margin, detail

    def result(self) -> InvariantResult:
        return InvariantResult(self.name, bool(self.margin >= 0), float(self.margin), self.checks,
                               self.detail)


def wave_potentials(k: int) -> Potentials:
    """Continuous, non-symmetric test potentials ``0.5 x (1 - x) (1 + x) + 0.1 i``.

    They vanish at both ends of ``[0, 1]`` and so are continuous on the circle.
    """
    return Potentials(tuple(
        Potential(lambda x, i=i: 0.5 * x * (1.0 - x) * (1.0 + x) + 0.1 * i,
                  label=f"wave{i}") for i in range(k)))


def _raw_alphas(sys, Z, phi, delta, schedule, variant="center", sup_method="modulus"):
    lo, _ = pressure.capacity_pressure(sys, Z, phi, delta, schedule, variant, mode="raw",
                                       sup_method=sup_method)
    return lo.profile, lo


def _nested_sample(Z: pressure.SetSample) -> pressure.SetSample:
    d = Z.descriptor
    if d.get("kind") == "grid":
        return pressure.SetSample.grid(max(1, d["resolution"] // 4))
    if d.get("kind") == "cantor":
        return pressure.SetSample.cantor(max(1, d["depth"] - 2))
    return pressure.SetSample.explicit(Z.points[::2], Z.mesh)


def battery(sys: SemigroupSystem, Z: pressure.SetSample, N_schedule=DEFAULT_N,
            delta_schedule=DEFAULT_DELTA, t_grid=None) -> list[InvariantResult]:
    """Run every finite-scale invariant at every (N, delta); returns one result per invariant."""
    N_schedule, delta_schedule = list(N_schedule), list(delta_schedule)
    t_grid = list(np.linspace(0.0, 1.2, 7)) if t_grid is None else list(t_grid)
    zero = Potentials.zero(sys.k)
    factors = sys.log_factors()
    wave = wave_potentials(sys.k)
    psi = wave.perturbed([Potential(lambda x, i=i: 0.05 * (i + 1) * x * (1.0 - x))
                          for i in range(sys.k)])
    probe = sys.domain.probe_points(4096)
    names = ["ordering", "monotonicity", "continuity", "shift", "variant_gap", "conjugacy",
             "strict_decrease", "slope_sandwich"]
    tally = {n: _Tally(n) for n in names}
    Z_small = _nested_sample(Z)
    if not Z_small.issubset(Z):
        raise ValueError("nested sample is not a subset")
    mirror = mirror_for(sys)
    conj = conjugate_system(sys, mirror, mirror)
    Z_mirror = Z.mapped(mirror)
    tail = max(1, int(np.ceil(pressure.TAIL_FRACTION * len(N_schedule))))

    for delta in delta_schedule:
        for phi, label in ((zero, "zero"), (factors, "log_factor"), (wave, "wave")):
            prof, lo = _raw_alphas(sys, Z, phi, delta, N_schedule)
            _, hi = pressure.capacity_pressure(sys, Z, phi, delta, N_schedule, mode="raw")
            for n in N_schedule:
                p = pressure.pesin_pressure(sys, Z, phi, delta, n, 2, mode="raw")
                tally["ordering"].add(prof[n] - p.value, f"P at N={n} delta={delta} {label}")
            tail_ns = N_schedule[-tail:]
            p = pressure.pesin_pressure(sys, Z, phi, delta, tail_ns[0],
                                        tail_ns[-1] - tail_ns[0], mode="raw")
            tally["ordering"].add(lo.value - p.value, f"tail P delta={delta} {label}")
            tally["ordering"].add(hi.value - lo.value, f"CP delta={delta} {label}")

            # shift: Phi + c moves every uniform-depth value by exactly c
            c = 0.37
            shifted, _ = _raw_alphas(sys, Z, phi.shifted(c), delta, N_schedule)
            for n in N_schedule:
                err = abs(shifted[n] - prof[n] - c)
                tally["shift"].add(1e-9 - err, f"N={n} delta={delta} {label}")

        for phi, label in ((zero, "zero"), (factors, "log_factor")):
            big, _ = _raw_alphas(sys, Z, phi, delta, N_schedule)
            small, _ = _raw_alphas(sys, Z_small, phi, delta, N_schedule)
            for n in N_schedule:
                tally["monotonicity"].add(big[n] - small[n] + 1e-12, f"N={n} delta={delta} {label}")
                pb = pressure.pesin_pressure(sys, Z, phi, delta, n, 2, mode="raw").value
                ps = pressure.pesin_pressure(sys, Z_small, phi, delta, n, 2, mode="raw").value
                tally["monotonicity"].add(pb - ps + 1e-6, f"P N={n} delta={delta} {label}")

        bound = wave.sup_distance(psi, probe)
        for variant, method in (("center", "modulus"), ("sup", "probe")):
            a, _ = _raw_alphas(sys, Z, wave, delta, N_schedule, variant, method)
            b, _ = _raw_alphas(sys, Z, psi, delta, N_schedule, variant, method)
            for n in N_schedule:
                tally["continuity"].add(bound + 1e-9 - abs(a[n] - b[n]),
                                        f"{variant} N={n} delta={delta}")
            for n in N_schedule[:2]:
                pa = pressure.pesin_pressure(sys, Z, wave, delta, n, 2, variant, mode="raw",
                                             sup_method=method).value
                pb = pressure.pesin_pressure(sys, Z, psi, delta, n, 2, variant, mode="raw",
                                             sup_method=method).value
                tally["continuity"].add(bound + 2e-6 - abs(pa - pb), f"P {variant} N={n}")

        eps = pressure.continuity_modulus(sys, wave, delta).value
        center, _ = _raw_alphas(sys, Z, wave, delta, N_schedule)
        for method in ("modulus", "probe"):
            sup, _ = _raw_alphas(sys, Z, wave, delta, N_schedule, "sup", method)
            for n in N_schedule:
                gap = sup[n] - center[n]
                tally["variant_gap"].add(min(gap + 1e-12, eps + 1e-9 - gap),
                                         f"{method} N={n} delta={delta}")

        for n in N_schedule:
            cover = pressure.build_cover(sys, Z, n, delta)
            mirrored = cover.mapped(mirror, Z_mirror)
            ok = _covers(conj, Z_mirror, mirrored)
            a = pressure.log_weighted_sum(sys, cover, wave, 0.0)
            b = pressure.log_weighted_sum(conj, mirrored, wave.composed(mirror), 0.0)
            err = abs(a - b) / n
            tally["conjugacy"].add((1e-9 - err) if ok else -1.0, f"N={n} delta={delta}")

    alpha_hat, _ = solver.exponent_bounds(sys, Z, solver.Scale(N_schedule=tuple(N_schedule)))
    if alpha_hat > 0:
        for delta in delta_schedule:
            scale = solver.Scale(delta=delta, N_schedule=tuple(N_schedule), mode="raw")
            curve = solver.pressure_curve(sys, Z, None, t_grid, scale)
            diffs = np.diff(curve.values)
            dt = np.diff(curve.t_grid)
            for d, h in zip(diffs, dt):
                if h > 1e-6:
                    tally["strict_decrease"].add(-d, f"delta={delta}")
            for s in curve.slopes:
                tally["slope_sandwich"].add(
                    min(s - (-curve.beta_hat - 0.02), (-curve.alpha_hat + 0.02) - s),
                    f"delta={delta}")
    return [tally[n].result() for n in names if tally[n].checks]


def _covers(sys: SemigroupSystem, Z: pressure.SetSample, cover: pressure.Cover) -> bool:
    """Every sample point lies in some atom of the (interval) cover."""
    inside = np.zeros(len(Z), dtype=bool)
    for c, r in zip(cover.centers, cover.radii):
        inside |= sys.metric(c, Z.points) < r
    return bool(inside.all())


def verify_invariants(cfg: ExperimentConfig) -> dict:
    """Battery on the configured system and sample at the default schedules.

    The run schedules can be long (N up to 16); the battery checks
    inequalities, not limits, so the short defaults are enough.
    """
    sys, Z = cfg.build_system(), cfg.build_sample()
    results = battery(sys, Z, DEFAULT_N, DEFAULT_DELTA)
    return {"system": sys.name, "passed": all(r.passed for r in results),
            "invariants": [asdict(r) for r in results]}


def list_systems() -> list[str]:
    return sorted(BUILTIN_SYSTEMS)


# ---------------------------------------------------------------------------
# output schemas

CSV_COLUMNS = {
    "results.csv": pressure.RESULT_COLUMNS,
    "lyapunov.csv": ["x", "n", "A_n", "lambda_n"],
    "boxcount.csv": ["r", "count", "valid", "in_window"],
}
JSON_SCHEMAS = {
    "manifest.json": "manifest.schema.json",
    "dimension_report.json": "dimension_report.schema.json",
}


def validate_outputs(out_dir) -> list[str]:
    """Problems found in a run directory (empty when every file matches its schema)."""
    out = Path(out_dir)
    problems = []
    for name, cols in CSV_COLUMNS.items():
        path = out / name
        if not path.exists():
            problems.append(f"{name}: missing")
            continue
        header = path.read_text().splitlines()[0].split(",")
        if header != cols:
            problems.append(f"{name}: columns {header} != {cols}")
    for name, schema in JSON_SCHEMAS.items():
        path = out / name
        if not path.exists():
            problems.append(f"{name}: missing")
            continue
        validator = jsonschema.Draft202012Validator(_schema(schema))
        for err in validator.iter_errors(json.loads(path.read_text())):
            problems.append(f"{name}: {err.message}")
    return problems
