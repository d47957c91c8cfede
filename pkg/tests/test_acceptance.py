"""End-to-end acceptance checks, each at its stated tolerance.

Every test records one PASS/FAIL line; they are collected in the
"acceptance criteria" section of the pytest summary.
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from sgpressure import SetSample, averaged_sums, bowen_distances, builtin, inclusion_check
from sgpressure.cocycle import lyapunov_values
from sgpressure.experiment import battery, load_config, run_experiment, wave_potentials
from sgpressure.systems import apply_word, system_from_descriptor

from oracles import all_words, naive_averaged_sum

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
LOG2, LOG3 = math.log(2), math.log(3)
CANTOR_DIM = LOG2 / LOG3


def _run(name: str, out: Path) -> tuple[dict, float]:
    cfg = load_config(CONFIGS / f"{name}.toml")
    start = time.perf_counter()
    code = run_experiment(cfg, out, workers=1)
    elapsed = time.perf_counter() - start
    assert code == 0, (out / "error.json").read_text()
    return json.loads((out / "dimension_report.json").read_text()), elapsed


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """First run of every bundled config; reused by the determinism check."""
    return {}


def _first_run(runs, tmp_path_factory, name):
    if name not in runs:
        out = tmp_path_factory.mktemp(name)
        report, elapsed = _run(name, out)
        runs[name] = (out, report, elapsed)
    return runs[name]


def test_doubling_pair(runs, tmp_path_factory, record):
    out, rep, elapsed = _first_run(runs, tmp_path_factory, "doubling_pair")
    sys = builtin("doubling_pair")
    Z = SetSample.grid(4096)
    lam = lyapunov_values(sys, Z.points[::64], range(1, 17))
    lam_err = float(np.abs(lam - LOG2).max())
    ok = (lam_err <= 1e-12 and abs(rep["h_hat"] - LOG2) <= 0.05
          and 0.95 <= rep["t_star"] <= 1.05
          and 0.98 <= rep["box_dimension"]["slope"] <= 1.02 and elapsed <= 60)
    assert record("1 doubling pair", ok,
                  f"lambda err {lam_err:.1e}, h {rep['h_hat']:.4f}, t* {rep['t_star']:.4f}, "
                  f"box {rep['box_dimension']['slope']:.4f}, {elapsed:.1f}s")


def test_cantor_reduction(runs, tmp_path_factory, record):
    out, rep, elapsed = _first_run(runs, tmp_path_factory, "cantor_k1")
    t_star, box = rep["t_star"], rep["box_dimension"]["slope"]
    ok = (0.60 <= t_star <= 0.66 and abs(box - CANTOR_DIM) <= 0.02
          and abs(t_star - box) <= 0.04 and elapsed <= 120)
    assert record("2 cantor reduction", ok,
                  f"t* {t_star:.4f}, box {box:.4f}, gap {abs(t_star - box):.4f}, {elapsed:.1f}s")


def _naive_bowen(sys, n, xs, ys):
    best = sys.metric(xs, ys)
    for m in range(1, n + 1):
        for w in all_words(sys.k, m):
            best = np.maximum(best, sys.metric(apply_word(sys, w, xs), apply_word(sys, w, ys)))
    return best


def test_exactness_oracles(record):
    rng = np.random.default_rng(3)
    triple = system_from_descriptor({"kind": "circle_affine", "slopes": [2, 3, 2],
                                     "offsets": [0.0, 0.0, 0.25], "name": "triple"})
    systems = [builtin(n) for n in ("doubling_pair", "heterogeneous_pair", "cantor_k1")]
    systems.append(triple)
    avg_err = 0.0
    for sys in systems:
        if sys.domain.kind == "circle":
            xs = rng.random(100)
        else:
            xs = rng.choice(SetSample.cantor(12).points, 100)
        for phi in (sys.log_factors(), wave_potentials(sys.k)):
            for n in range(0, 9):
                fast = averaged_sums(sys, xs, n, phi)
                slow = naive_averaged_sum(sys, xs, n, phi)
                avg_err = max(avg_err, float(np.abs(fast - slow).max()))
    bowen_err = 0.0
    for sys in systems[:2] + [triple]:
        xs = rng.random(200)
        ys = (xs + rng.uniform(-0.05, 0.05, 200)) % 1.0
        for n in range(0, 11):
            sel = slice(n * 18, n * 18 + 22)   # about 200 pairs spread over n
            fast = bowen_distances(sys, n, xs[sel], ys[sel])
            bowen_err = max(bowen_err,
                            float(np.abs(fast - _naive_bowen(sys, n, xs[sel], ys[sel])).max()))
    ok = avg_err <= 1e-10 and bowen_err <= 1e-12
    assert record("3 exactness oracles", ok,
                  f"averaged sum err {avg_err:.1e}, bowen distance err {bowen_err:.1e}")


SAMPLES = {"doubling_pair": lambda: SetSample.grid(4096),
           "heterogeneous_pair": lambda: SetSample.grid(4096),
           "cantor_k1": lambda: SetSample.cantor(10)}


def test_inequality_battery(record):
    failures, checks = [], 0
    for name, sample in SAMPLES.items():
        for r in battery(builtin(name), sample()):
            checks += r.checks
            if not r.passed:
                failures.append(f"{name}/{r.name} margin {r.margin:.2e}")
    assert record("4 inequality battery", not failures,
                  f"{checks} checks on 3 systems; violations: {failures or 'none'}")


def test_slope_sandwich(runs, tmp_path_factory, record):
    out, rep, _ = _first_run(runs, tmp_path_factory, "heterogeneous_pair")
    slopes = np.asarray(rep["curve"]["slopes"])
    t = np.asarray(rep["curve"]["t"])
    in_sandwich = bool(np.all((slopes >= -LOG3 - 0.02) & (slopes <= -LOG2 + 0.02)))
    h = rep["h_hat"]
    lo, hi = h / LOG3 - 1e-3, h / LOG2 + 1e-3
    in_bracket = lo <= rep["t_star"] <= hi
    ok = in_sandwich and in_bracket and t.min() == 0.0 and t.max() == pytest.approx(1.2)
    assert record("5 slope sandwich", ok,
                  f"slopes [{slopes.min():.4f}, {slopes.max():.4f}] vs "
                  f"[{-LOG3 - 0.02:.4f}, {-LOG2 + 0.02:.4f}]; t* {rep['t_star']:.4f} in "
                  f"[{lo:.4f}, {hi:.4f}]")


def test_ball_inclusion_certificates(record):
    sys = builtin("doubling_pair")
    rng = np.random.default_rng(6)
    checks = bad = 0
    for delta in (0.1, 0.05):
        for n in range(1, 11):
            cert = inclusion_check(sys, rng.random(500), n, delta, eps=0.1, eta=1.0)
            checks += cert.x.size
            bad += cert.inconsistent
    assert record("6 ball inclusion", checks == 10_000 and bad == 0,
                  f"{checks} checks, {bad} inconsistent")


def test_determinism(runs, tmp_path_factory, record):
    differing = []
    for name in ("cantor_k1", "heterogeneous_pair", "doubling_pair"):
        first, _, _ = _first_run(runs, tmp_path_factory, name)
        second = tmp_path_factory.mktemp(f"{name}_again")
        _run(name, second)
        if (first / "results.csv").read_bytes() != (second / "results.csv").read_bytes():
            differing.append(name)
    assert record("7 determinism", not differing,
                  f"results.csv identical across two runs; differing: {differing or 'none'}")
