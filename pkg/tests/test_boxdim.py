from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgpressure import SetSample, ball_sum_crossing, box_dimension, hausdorff_ball_sum
from sgpressure.boxdim import ball_cover, box_counts, default_schedule, write_boxcount_csv

CANTOR_DIM = math.log(2) / math.log(3)


def test_grid_slope():
    prof = box_dimension(SetSample.grid(4096))
    assert prof.slope == pytest.approx(1.0, abs=0.02)
    assert prof.valid.all()


def test_cantor_slope_and_exact_counts():
    Z = SetSample.cantor(10)
    prof = box_dimension(Z)
    assert prof.slope == pytest.approx(CANTOR_DIM, abs=0.02)
    j = np.arange(0, 10)
    np.testing.assert_array_equal(box_counts(Z, 3.0 ** -j), 2**j)


def test_single_point_slope():
    prof = box_dimension(SetSample.explicit([0.3], mesh=1e-6))
    assert prof.slope == pytest.approx(0.0, abs=0.02)


def test_schedule_below_mesh_rejected():
    Z = SetSample.grid(64)
    with pytest.raises(ValueError):
        box_dimension(Z, [Z.mesh, Z.mesh / 2])
    with pytest.raises(ValueError):
        hausdorff_ball_sum(Z, 1.0, Z.mesh)


def test_fit_uses_only_valid_scales():
    Z = SetSample.grid(256)
    prof = box_dimension(Z, 2.0 ** -np.arange(0, 14))
    assert not prof.valid.all()
    assert prof.valid[prof.window].all()
    assert prof.slope == pytest.approx(1.0, abs=0.02)


def test_default_schedule_bases():
    assert default_schedule(SetSample.cantor(6))[1] == pytest.approx(1 / 3)
    assert default_schedule(SetSample.grid(64))[1] == pytest.approx(1 / 2)


def test_ball_sum_examples():
    grid = SetSample.grid(4096)
    assert hausdorff_ball_sum(grid, 1.0, 0.01) == pytest.approx(1.0, abs=0.05)
    assert hausdorff_ball_sum(grid, 0.0, 0.01) == pytest.approx(1 / (2 * 0.01), rel=0.05)
    Z = SetSample.cantor(10)
    sums = [hausdorff_ball_sum(Z, CANTOR_DIM, 3.0**-j) for j in range(1, 9)]
    assert all(0.5 <= s <= 2.0 for s in sums)


def test_ball_cover_covers_sample():
    Z = SetSample.cantor(8)
    centers = ball_cover(Z, 0.01)
    d = np.abs(Z.points[:, None] - centers[None, :]).min(axis=1)
    assert (d < 0.01).all()
    assert np.isin(centers, Z.points).all()


@pytest.mark.parametrize("Z, target", [(SetSample.grid(4096), 1.0),
                                       (SetSample.cantor(10), CANTOR_DIM)])
def test_crossing_matches_slope(Z, target):
    assert ball_sum_crossing(Z, 3.0**-2, 3.0**-6) == pytest.approx(target, abs=0.05)


@given(pts=st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=200),
       r=st.floats(0.01, 0.3))
def test_ball_sum_non_increasing_in_t(pts, r):
    Z = SetSample.explicit(pts, mesh=1e-3)
    sums = [hausdorff_ball_sum(Z, t, r) for t in (0.0, 0.5, 1.0, 2.0)]
    assert all(b <= a + 1e-12 for a, b in zip(sums, sums[1:]))


@given(pts=st.lists(st.floats(0, 1, exclude_max=True), min_size=2, max_size=300))
def test_counts_monotone_and_slope_bounded(pts):
    Z = SetSample.explicit(pts, mesh=1e-4)
    prof = box_dimension(Z)
    assert (np.diff(prof.counts) >= 0).all()  # scales are decreasing
    assert prof.slope <= 1.02


def test_boxcount_csv(tmp_path):
    prof = box_dimension(SetSample.cantor(6))
    write_boxcount_csv(tmp_path / "b.csv", prof)
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "r,count,valid,in_window"
    assert len(lines) == prof.scales.size + 1
