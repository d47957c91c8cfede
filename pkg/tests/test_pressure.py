import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgpressure import (BowenBall, SetSample, bowen_ball_membership, build_cover,
                        capacity_pressure, continuity_modulus, pesin_pressure, weighted_sum)
from sgpressure.experiment import wave_potentials
from sgpressure.pressure import (RESULT_COLUMNS, log_weighted_sum, pressure_estimates,
                                 result_rows, write_results_csv)
from sgpressure.systems import (Potential, Potentials, builtin, conjugate_system, mirror_for,
                                system_from_descriptor)

from oracles import min_interval_cover

LOG2 = np.log(2.0)
GRID = SetSample.grid(1024)
GRID_FINE = SetSample.grid(4096)


def test_samples():
    g = SetSample.grid(8)
    assert g.points.tolist() == [j / 8 for j in range(8)] and g.mesh == 1 / 16
    c = SetSample.cantor(2)
    assert np.allclose(c.points, [0, 2 / 9, 6 / 9, 8 / 9]) and c.mesh == 1 / 9
    assert SetSample.grid(1024).issubset(SetSample.grid(4096))
    assert SetSample.cantor(8).issubset(SetSample.cantor(10))
    with pytest.raises(ValueError):
        SetSample.explicit([])


def test_cover_count_matches_interval_oracle(doubling):
    z = SetSample.grid(1000)
    cover = build_cover(doubling, z, 8, 0.1)
    # ball radius 0.1 / 256 is below the grid spacing: one atom per point
    assert cover.atom_count == min_interval_cover(z.points, 2 * 0.1 / 256) == 1000
    cover = build_cover(doubling, GRID_FINE, 3, 0.1)
    assert cover.atom_count == min_interval_cover(GRID_FINE.points, 2 * 0.1 / 8)
    assert np.all(cover.depths == 3)


def test_cover_small_examples(doubling):
    assert build_cover(doubling, GRID_FINE, 0, 0.1).atom_count == 5
    one = build_cover(doubling, SetSample.explicit([0.3]), 6, 0.05)
    assert one.atom_count == 1


@pytest.mark.parametrize("name,sample", [("doubling_pair", GRID), ("heterogeneous_pair", GRID),
                                         ("cantor_k1", SetSample.cantor(7))])
def test_cover_atoms_contain_blocks_by_definition(name, sample):
    sys = builtin(name)
    for strategy in ("sweep", "greedy-weight"):
        cover = build_cover(sys, sample, 3, 0.1, strategy)
        covered = np.zeros(len(sample), dtype=bool)
        for c, a, b in zip(cover.centers, cover.starts, cover.stops):
            inside = bowen_ball_membership(sys, BowenBall(float(c), 3, 0.1), sample.points[a:b])
            assert np.all(inside)
            covered[a:b] = True
        assert covered.all()


def test_greedy_weight_not_better_than_sweep_for_equal_weights(doubling):
    sweep = build_cover(doubling, GRID, 4, 0.1)
    greedy = build_cover(doubling, GRID, 4, 0.1, "greedy-weight")
    assert greedy.atom_count >= sweep.atom_count


def test_weighted_sum_examples(doubling):
    one = build_cover(doubling, SetSample.explicit([0.3]), 5, 0.05)
    phi = Potentials.constants([0.2, 0.6])
    assert weighted_sum(doubling, one, phi, 0.7) == pytest.approx(np.exp(-0.7 * 5 + 5 * 0.4))
    cover = build_cover(doubling, GRID, 6, 0.1)
    assert weighted_sum(doubling, cover, doubling.log_factors(), 0.0) == pytest.approx(
        cover.atom_count * 2.0**6)


@given(st.floats(-5, 5), st.floats(0, 3))
def test_weighted_sum_decreasing_in_alpha(alpha, step):
    sys = builtin("heterogeneous_pair")
    cover = build_cover(sys, GRID, 2, 0.1)
    phi = wave_potentials(2)
    a = log_weighted_sum(sys, cover, phi, alpha)
    b = log_weighted_sum(sys, cover, phi, alpha + step)
    assert b <= a + 1e-12


def test_capacity_zero_potential_doubling(doubling):
    sched = list(range(1, 8))
    lo, hi = capacity_pressure(doubling, GRID_FINE, Potentials.zero(2), 0.05, sched)
    for n in sched:
        count = min_interval_cover(GRID_FINE.points, 2 * 0.05 * 2.0**-n)
        assert lo.profile[n] == pytest.approx(np.log(count) / n)
    assert lo.value <= hi.value
    lo, hi = capacity_pressure(doubling, GRID_FINE, Potentials.zero(2), 0.05, sched,
                               mode="anchored")
    assert abs(lo.value - LOG2) < 0.05 and abs(hi.value - LOG2) < 0.05
    assert lo.anchor == 1 and lo.resolved == [1, 2, 3, 4, 5]


def test_capacity_t_equals_one(doubling):
    sched = [1, 2, 3, 4, 5]
    zero, _ = capacity_pressure(doubling, GRID_FINE, Potentials.zero(2), 0.05, sched)
    minus, _ = capacity_pressure(doubling, GRID_FINE, doubling.log_factors().scaled(-1), 0.05,
                                 sched)
    mags = [abs(minus.profile[n]) for n in sched]
    for n in sched:
        assert minus.profile[n] == pytest.approx(zero.profile[n] - LOG2, abs=1e-12)
    assert all(b < a for a, b in zip(mags, mags[1:]))


def test_capacity_single_map_cantor(cantor):
    z = SetSample.cantor(10)
    lo, hi = capacity_pressure(cantor, z, Potentials.zero(1), 0.1, list(range(1, 9)),
                               mode="anchored")
    assert lo.value == pytest.approx(LOG2, abs=1e-12) == hi.value
    for n in lo.resolved:
        assert lo.atom_counts[n] == 2 * lo.atom_counts[n - 1] if n > 1 else True


def test_anchored_needs_resolved_scales(doubling):
    with pytest.raises(ValueError):
        capacity_pressure(doubling, SetSample.grid(64), Potentials.zero(2), 0.05, [6, 7],
                          mode="anchored")


def test_pesin_homogeneous_no_refinement(doubling):
    for n in (2, 4, 6):
        cp, _ = capacity_pressure(doubling, GRID_FINE, doubling.log_factors(), 0.05, [n])
        p = pesin_pressure(doubling, GRID_FINE, doubling.log_factors(), 0.05, n)
        assert p.value == pytest.approx(cp.value, abs=1e-6)
        assert p.value <= cp.value
        assert p.refinements_accepted == 0


def test_pesin_union_of_grids(hetero):
    z1 = SetSample.explicit(np.arange(200) / 1000, 0.0005)
    z2 = SetSample.explicit(0.5 + np.arange(300) / 1000, 0.0005)
    phi = wave_potentials(2)
    both = pesin_pressure(hetero, z1.union(z2), phi, 0.1, 3, 2).value
    parts = [pesin_pressure(hetero, z, phi, 0.1, 3, 2).value for z in (z1, z2)]
    assert both >= max(parts) - 1e-6


def test_pesin_shift(hetero):
    phi = wave_potentials(2)
    a = pesin_pressure(hetero, GRID, phi, 0.1, 3, 2).value
    b = pesin_pressure(hetero, GRID, phi.shifted(0.25), 0.1, 3, 2).value
    assert b - a == pytest.approx(0.25, abs=2e-6)


def test_pesin_uses_refinement_when_it_helps():
    # the right half expands faster: deep atoms there are expensive, shallow ones cheap
    sys = system_from_descriptor({"kind": "custom_piecewise", "domain": [[0.0, 1.0]],
                                  "pieces": [[[0.0, 0.5, 2.0, 0.0], [0.5, 1.0, 2.0, -1.0]]]})
    phi = Potentials((Potential(lambda x: 3.0 * np.asarray(x)),))
    p = pesin_pressure(sys, GRID, phi, 0.1, 2, 3)
    cp, _ = capacity_pressure(sys, GRID, phi, 0.1, [2, 3, 4, 5])
    assert p.value <= cp.value + 1e-12


def test_continuity_modulus_examples(doubling):
    assert continuity_modulus(doubling, Potentials.zero(2), 0.1).value == 0.0
    sys = system_from_descriptor({"kind": "custom_piecewise", "domain": [[0.0, 1.0]],
                                  "pieces": [[[0.0, 0.5, 2.0, 0.0], [0.5, 1.0, 2.0, -1.0]]]})
    ident = Potentials((Potential(lambda x: np.asarray(x)),))
    vals = [continuity_modulus(sys, ident, d, 4096).value for d in (0.2, 0.1, 0.05, 0.01)]
    for d, v in zip((0.2, 0.1, 0.05, 0.01), vals):
        assert d - 2 / 4096 <= v < d
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # on the circle x -> x jumps at 0, so its modulus is close to 1
    circ = continuity_modulus(doubling, Potentials((ident[0], ident[0])), 0.05).value
    assert circ > 0.9


@given(st.sampled_from([0.2, 0.1, 0.05]), st.integers(1, 6))
def test_variant_gap(delta, n):
    sys = builtin("heterogeneous_pair")
    phi = wave_potentials(2)
    eps = continuity_modulus(sys, phi, delta).value
    center, _ = capacity_pressure(sys, GRID, phi, delta, [n])
    for method in ("modulus", "probe"):
        sup, _ = capacity_pressure(sys, GRID, phi, delta, [n], "sup", sup_method=method)
        assert -1e-12 <= sup.value - center.value <= eps + 1e-9


@given(st.sampled_from(["doubling_pair", "heterogeneous_pair"]),
       st.sampled_from([0.2, 0.1, 0.05]), st.integers(1, 8))
def test_monotone_in_nested_samples(name, delta, n):
    sys = builtin(name)
    for phi in (Potentials.zero(2), sys.log_factors()):
        small, _ = capacity_pressure(sys, GRID, phi, delta, [n])
        big, _ = capacity_pressure(sys, GRID_FINE, phi, delta, [n])
        assert small.value <= big.value + 1e-9
        ps = pesin_pressure(sys, GRID, phi, delta, n, 2).value
        pb = pesin_pressure(sys, GRID_FINE, phi, delta, n, 2).value
        assert ps <= pb + 1e-6


@given(st.sampled_from([0.2, 0.1, 0.05]), st.integers(1, 6),
       st.lists(st.floats(-0.3, 0.3), min_size=2, max_size=2))
def test_continuity_in_potentials(delta, n, shifts):
    sys = builtin("heterogeneous_pair")
    phi = wave_potentials(2)
    psi = phi.perturbed([Potential(lambda x, s=s: s * np.cos(7 * np.asarray(x))) for s in shifts])
    bound = phi.sup_distance(psi, sys.domain.probe_points(4096))
    a, _ = capacity_pressure(sys, GRID, phi, delta, [n])
    b, _ = capacity_pressure(sys, GRID, psi, delta, [n])
    assert abs(a.value - b.value) <= bound + 1e-9


@given(st.sampled_from([0.2, 0.1, 0.05]), st.integers(1, 6), st.floats(-2, 2))
def test_shift_identity_uniform_depth(delta, n, c):
    sys = builtin("doubling_pair")
    phi = wave_potentials(2)
    a, _ = capacity_pressure(sys, GRID, phi, delta, [n])
    b, _ = capacity_pressure(sys, GRID, phi.shifted(c), delta, [n])
    assert b.value - a.value == pytest.approx(c, abs=1e-12)


@given(st.sampled_from(["doubling_pair", "cantor_k1"]), st.sampled_from([0.2, 0.1, 0.05]),
       st.integers(1, 6))
def test_conjugacy_with_mirrored_covers(name, delta, n):
    sys = builtin(name)
    z = GRID if name == "doubling_pair" else SetSample.cantor(7)
    g = mirror_for(sys)
    conj = conjugate_system(sys, g, g)
    phi = wave_potentials(sys.k)
    cover = build_cover(sys, z, n, delta)
    zm = z.mapped(g)
    mirrored = cover.mapped(g, zm)
    inside = np.zeros(len(zm), dtype=bool)
    for c, r in zip(mirrored.centers, mirrored.radii):
        inside |= conj.metric(c, zm.points) < r
    assert inside.all()
    a = log_weighted_sum(sys, cover, phi, 0.0) / n
    b = log_weighted_sum(conj, mirrored, phi.composed(g), 0.0) / n
    assert a == pytest.approx(b, abs=1e-9)


@given(st.sampled_from(["doubling_pair", "heterogeneous_pair"]),
       st.sampled_from([0.2, 0.1, 0.05]), st.integers(1, 5), st.integers(0, 3))
def test_ordering(name, delta, n, refinement):
    sys = builtin(name)
    phi = wave_potentials(2)
    sched = list(range(n, n + refinement + 1))
    lo, hi = capacity_pressure(sys, GRID, phi, delta, sched, tail_fraction=1.0)
    p = pesin_pressure(sys, GRID, phi, delta, n, refinement)
    assert p.value <= lo.value <= hi.value


def test_matched_estimates_and_csv(doubling, tmp_path):
    est = pressure_estimates(doubling, GRID_FINE, Potentials.zero(2), 0.1, range(1, 9))
    assert est.ordered
    rows = result_rows("doubling_pair", est)
    assert [r["N"] for r in rows] == list(range(1, 9))
    path = tmp_path / "r.csv"
    write_results_csv(path, rows)
    assert path.read_text().splitlines()[0].split(",") == RESULT_COLUMNS


def _modulus_by_shifts(probe, vals, delta):
    best = 0.0
    for s in range(1, probe.size):
        close = (probe[s:] - probe[:-s]) < delta
        if not close.any():
            break
        for v in vals:
            best = max(best, float(np.abs(v[s:] - v[:-s])[close].max()))
    return best


@given(st.lists(st.floats(0, 1), min_size=2, max_size=60, unique=True),
       st.floats(1e-3, 0.5), st.integers(0, 2**32 - 1))
def test_modulus_matches_shift_loop(points, delta, seed):
    sys = system_from_descriptor({"kind": "custom_piecewise", "domain": [[0.0, 1.0]],
                                  "pieces": [[[0.0, 0.5, 2.0, 0.0], [0.5, 1.0, 2.0, -1.0]]]})
    sys.domain.probe_points = lambda n: np.asarray(points)
    coef = np.random.default_rng(seed).normal(size=4)
    phi = Potentials((Potential(lambda x: np.polyval(coef, x)),))
    probe = np.sort(np.asarray(points))
    expected = _modulus_by_shifts(probe, [np.polyval(coef, probe)], delta)
    assert continuity_modulus(sys, phi, delta).value == expected
