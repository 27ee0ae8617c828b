"""Elevation-window tests: grid indexing, both construction paths, goldens."""

import math
import os

import numpy as np
import pytest

from beamwalk.window import (
    BIN_SIDES,
    CLAMP_HI,
    CLAMP_LO,
    EMPTY_FILL,
    HEIGHT_OFFSET,
    CloudParseError,
    ElevationWindow,
    PointCloud,
    WindowSpec,
    build_from_pointcloud,
    cell_center,
    format_flat,
    format_grid,
    grid_index,
    grid_row_col,
    load_cloud,
    parse_cloud_text,
    sample_from_heightfield,
    window_points,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture(name):
    return os.path.join(FIXTURES, name)


def test_default_spec_shape():
    spec = WindowSpec()
    assert spec.rows == 11
    assert spec.cols == 17
    assert spec.size == 187


def test_spec_validation():
    with pytest.raises(ValueError):
        WindowSpec(spacing=0.0)
    with pytest.raises(ValueError):
        WindowSpec(x_min=1.0, x_max=0.5)
    with pytest.raises(ValueError):
        WindowSpec(x_max=1.07)  # not a multiple of the spacing


def test_grid_index_corners():
    assert grid_index(0, 0) == 0
    assert grid_index(10, 0) == 10
    assert grid_index(0, 1) == 11
    assert grid_index(10, 16) == 186


def test_grid_index_bijection_exhaustive():
    seen = set()
    for col in range(17):
        for row in range(11):
            i = grid_index(row, col)
            assert 0 <= i < 187
            assert grid_row_col(i) == (row, col)
            seen.add(i)
    assert len(seen) == 187


def test_grid_index_bounds():
    with pytest.raises(ValueError):
        grid_index(11, 0)
    with pytest.raises(ValueError):
        grid_index(0, 17)
    with pytest.raises(ValueError):
        grid_row_col(187)
    with pytest.raises(ValueError):
        grid_row_col(-1)


def test_cell_centers():
    assert cell_center(0, 0) == pytest.approx((0.1, -0.8))
    assert cell_center(10, 0) == pytest.approx((1.1, -0.8))
    assert cell_center(0, 16) == pytest.approx((0.1, 0.8))
    assert cell_center(2, 3) == pytest.approx((0.3, -0.5))


def test_window_points_heading():
    pts0 = window_points((0.0, 0.0, 0.0))
    assert pts0[0] == pytest.approx((0.1, -0.8))
    # half-turn: the first cell lands behind and to the left
    pts_pi = window_points((1.0, 2.0, math.pi))
    assert pts_pi[0] == pytest.approx((1.0 - 0.1, 2.0 + 0.8))
    # quarter-turn
    pts_q = window_points((0.0, 0.0, math.pi / 2))
    assert pts_q[0] == pytest.approx((0.8, 0.1))


def test_sample_constant_field():
    w = sample_from_heightfield(lambda x, y: -1.4, (0.3, 0.1, 0.7))
    assert w.provenance == "heightfield"
    assert all(v == -1.4 for v in w.heights)


def test_sample_shift_equivariance_on_ramp():
    ramp = lambda x, y: 0.5 * x
    base = sample_from_heightfield(ramp, (0.0, 0.0, 0.0))
    shifted = sample_from_heightfield(ramp, (0.25, 0.0, 0.0))
    for a, b in zip(base.heights, shifted.heights):
        assert b == pytest.approx(a + 0.5 * 0.25, abs=1e-12)


def test_window_length_enforced():
    with pytest.raises(ValueError):
        ElevationWindow(tuple([0.0] * 10), "heightfield")
    with pytest.raises(ValueError):
        ElevationWindow(tuple([0.0] * 187), "lidar")


def test_as_grid_layout():
    vals = list(range(187))
    w = ElevationWindow(tuple(float(v) for v in vals), "heightfield")
    g = w.as_grid()
    assert g.shape == (11, 17)
    assert g[0, 0] == 0.0
    assert g[10, 0] == 10.0
    assert g[0, 1] == 11.0


# --------------------------------------------------------------------------
# point-cloud path


def test_parse_cloud_text_basic():
    cloud = parse_cloud_text("# header\n0.1 -0.8 -1.2\n\n0.2 0.0 -1.3 # inline\n")
    assert cloud.points.shape == (2, 3)
    assert cloud.points[1, 2] == -1.3


def test_parse_cloud_text_errors_carry_line_numbers():
    with pytest.raises(CloudParseError, match="line 2"):
        parse_cloud_text("0 0 0\n0 0\n")
    with pytest.raises(CloudParseError, match="line 3"):
        parse_cloud_text("# ok\n0 0 0\n0 zero 0\n")


def test_golden_empty_cloud():
    cloud = load_cloud(fixture("cloud_empty.txt"))
    w = build_from_pointcloud(cloud)
    assert w.provenance == "pointcloud"
    with open(fixture("window_empty.golden")) as fh:
        assert format_flat(w) == fh.read()
    assert all(v == EMPTY_FILL for v in w.heights)


def test_golden_plane_cloud_clamps_to_ceiling():
    w = build_from_pointcloud(load_cloud(fixture("cloud_plane.txt")))
    with open(fixture("window_plane.golden")) as fh:
        assert format_flat(w) == fh.read()
    # -1.08 + 0.38 sits at the admissible ceiling
    assert all(abs(v - CLAMP_HI) < 1e-12 for v in w.heights)


def test_golden_spot_cloud():
    w = build_from_pointcloud(load_cloud(fixture("cloud_spots.txt")))
    with open(fixture("window_spots.golden")) as fh:
        assert format_flat(w) == fh.read()
    # hand-picked probes: feature centers and one ring cell each
    assert w.at(2, 3) == pytest.approx(-0.92)
    assert w.at(3, 4) == pytest.approx(-0.92)   # ring via the 0.20 m bin
    assert w.at(6, 8) == pytest.approx(-0.70)   # ceiling clamp
    assert w.at(9, 13) == pytest.approx(-0.82)  # max-z of two stacked returns
    assert w.at(0, 0) == EMPTY_FILL


def test_adaptive_bin_growth():
    # a return 6 cm off a cell center misses the 0.10 m bin but is caught
    # at 0.15 m
    cx, cy = cell_center(5, 8)
    cloud = PointCloud(np.array([[cx + 0.06, cy, -1.30]]))
    w = build_from_pointcloud(cloud)
    assert w.at(5, 8) == pytest.approx(-0.92)


def test_floor_clamp():
    cx, cy = cell_center(4, 4)
    w = build_from_pointcloud(PointCloud(np.array([[cx, cy, -1.9]])))
    assert w.at(4, 4) == CLAMP_LO


def test_transform_moves_cloud_into_grid_frame():
    cx, cy = cell_center(2, 3)
    # cloud recorded 1 m ahead in some world frame; transform pulls it back
    shifted = np.array([[cx + 1.0, cy, -1.2]])
    t = np.eye(4)
    t[0, 3] = -1.0
    w = build_from_pointcloud(PointCloud(shifted, transform=t))
    assert w.at(2, 3) == pytest.approx(-1.2 + HEIGHT_OFFSET)


def test_pad_crop_is_invisible():
    # a return just outside the window rectangle still supports an edge cell
    cx, cy = cell_center(10, 16)  # (1.1, 0.8)
    cloud = PointCloud(np.array([[cx + 0.09, cy + 0.09, -1.25]]))
    w = build_from_pointcloud(cloud)
    assert w.at(10, 16) == pytest.approx(-1.25 + HEIGHT_OFFSET)
    # ... while a return beyond every bin's reach contributes nothing
    far = PointCloud(np.array([[cx + 0.5, cy + 0.5, -1.0]]))
    assert build_from_pointcloud(far).at(10, 16) == EMPTY_FILL


def test_sensor_path_matches_sampling_on_constant_fields():
    # constant fields constructed from the offset side so both paths share
    # the identical float expression
    rng = np.random.default_rng(31)
    for _ in range(5):
        z = float(rng.uniform(-1.75, -1.1))
        level = z + HEIGHT_OFFSET
        if not (CLAMP_LO <= level <= CLAMP_HI):
            continue
        pts = [[x, y, z] for x, y in window_points((0.0, 0.0, 0.0))]
        built = build_from_pointcloud(PointCloud(np.array(pts)))
        sampled = sample_from_heightfield(lambda x, y: level, (0.0, 0.0, 0.0))
        assert built.heights == sampled.heights


def test_sensor_path_vs_sampling_on_two_level_field():
    # on a piecewise-constant field the folded value may exceed the center
    # sample (max over the bin vs the center), never undershoot it, and
    # always stays within the two levels
    top, abyss = -0.75, -1.4
    field = lambda x, y: top if (0.0 <= x <= 3.0 and abs(y) <= 0.1) else abyss

    pts = []
    rng = np.random.default_rng(32)
    for x, y in window_points((0.0, 0.0, 0.0)):
        for _ in range(25):
            px = x + float(rng.uniform(-0.05, 0.05))
            py = y + float(rng.uniform(-0.05, 0.05))
            pts.append([px, py, field(px, py) - HEIGHT_OFFSET])
    built = build_from_pointcloud(PointCloud(np.array(pts)))
    sampled = sample_from_heightfield(field, (0.0, 0.0, 0.0))
    for b, s in zip(built.heights, sampled.heights):
        assert b >= s - 1e-12
        assert min(abs(b - top), abs(b - abyss)) < 1e-9


def test_build_determinism():
    with open(fixture("cloud_spots.txt")) as fh:
        text = fh.read()
    a = build_from_pointcloud(parse_cloud_text(text))
    b = build_from_pointcloud(parse_cloud_text(text))
    assert format_flat(a) == format_flat(b)


def test_format_shapes():
    w = build_from_pointcloud(load_cloud(fixture("cloud_empty.txt")))
    flat = format_flat(w)
    assert flat.count("\n") == 187
    grid = format_grid(w)
    body = [ln for ln in grid.splitlines() if not ln.startswith("#")]
    assert len(body) == 11
    assert all(len(ln.split()) == 17 for ln in body)
