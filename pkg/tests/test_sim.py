import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from longnav.georoute import GeoPoint, LocalPoint
from longnav.sim import (
    ActionOutOfLimits,
    Label,
    ParseError,
    Pedestrian,
    RobotState,
    SemanticGrid,
    Sign,
    WorldState,
    cast_rays,
    format_scenario,
    integrate_unicycle,
    parse_scenario,
    sense_range,
    sense_semantics,
    step,
    wrap_angle,
)

EXAMPLE = """\
[world]
time = 0.0
geo_origin = 38.8315, -77.3075
d_opt = 1.5
[grid]
width = 4
height = 2
resolution = 0.5
origin = 0.0, 0.0
[labels]
RRSS   # top row
VVBB
[crosswalk]
1100
0000
[robot]
x = 0.25
y = 0.25
heading = 0.0
[pedestrians]
0.75, 0.75, 0.5, 0.0, 1
[signs]
1.0, 0.9, stop
"""


def open_world(n=40, res=0.5, robot=None, **kw):
    labels = np.full((n, n), Label.ROAD, dtype=np.uint8)
    return WorldState(SemanticGrid(labels, res), robot or RobotState(n * res / 2, n * res / 2, 0.0), **kw)


def euler(x, y, th, v, w, dt, n=1000):
    h = dt / n
    for _ in range(n):
        x += v * math.cos(th) * h
        y += v * math.sin(th) * h
        th += w * h
    return x, y, th


def slab_oracle(grid, x, y, angle, max_range):
    """Entry distance of the ray into each building cell's box, minimum taken."""
    dx, dy = math.cos(angle), math.sin(angle)
    best = max_range
    rows, cols = np.nonzero(grid.labels == Label.BUILDING)
    for r, c in zip(rows, cols):
        lo = (grid.origin[0] + c * grid.resolution, grid.origin[1] + r * grid.resolution)
        hi = (lo[0] + grid.resolution, lo[1] + grid.resolution)
        t0, t1 = -math.inf, math.inf
        ok = True
        for p, d, a, b in ((x, dx, lo[0], hi[0]), (y, dy, lo[1], hi[1])):
            if abs(d) < 1e-15:
                if not a <= p <= b:
                    ok = False
                continue
            ta, tb = sorted(((a - p) / d, (b - p) / d))
            t0, t1 = max(t0, ta), min(t1, tb)
        if ok and t0 <= t1 and t1 >= 0:
            best = min(best, max(t0, 0.0))
    return best


def test_example_parses():
    w = parse_scenario(EXAMPLE)
    assert w.grid.labels[1].tolist() == [Label.ROAD, Label.ROAD, Label.SIDEWALK, Label.SIDEWALK]
    assert w.grid.labels[0].tolist() == [Label.VEGETATION, Label.VEGETATION, Label.BUILDING, Label.BUILDING]
    assert w.grid.crosswalk[1].tolist() == [True, True, False, False]
    assert w.geo_origin == GeoPoint(38.8315, -77.3075)
    assert w.d_opt == 1.5
    assert w.pedestrians[0].group_id == 1
    assert w.signs[0].kind == "stop"


def test_round_trip_exact():
    w = parse_scenario(EXAMPLE)
    w2 = parse_scenario(format_scenario(w))
    assert w.equals(w2)
    assert format_scenario(w2) == format_scenario(w)


def test_missing_label_row_names_field():
    bad = EXAMPLE.replace("VVBB\n", "")
    with pytest.raises(ParseError, match="labels row"):
        parse_scenario(bad)


@pytest.mark.parametrize(
    "old,new",
    [
        ("RRSS", "RRSX"),
        ("width = 4", "width = four"),
        ("0.75, 0.75, 0.5, 0.0, 1", "0.75, 0.75, 9.0, 0.0, 1"),
        ("1.0, 0.9, stop", "1.0, 0.9, halt"),
        ("1100\n0000", "1111\n0000"),  # crosswalk over sidewalk
        ("x = 0.25", "x = 9.0"),
    ],
)
def test_parse_errors(old, new):
    with pytest.raises(ParseError):
        parse_scenario(EXAMPLE.replace(old, new))


def test_grid_lookup():
    g = parse_scenario(EXAMPLE).grid
    assert g.label_at(0.25, 0.75) == Label.ROAD
    assert g.label_at(1.75, 0.25) == Label.BUILDING
    assert g.label_at(-0.1, 0.25) == Label.OTHER
    assert g.extent == (2.0, 1.0)


def test_wrap_angle():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-math.pi, math.pi), st.floats(0.01, 0.5))
def test_unicycle_matches_fine_euler(v, w, th, dt):
    x, y, t = integrate_unicycle(0.0, 0.0, th, v, w, dt)
    xe, ye, te = euler(0.0, 0.0, th, v, w, dt)
    assert x == pytest.approx(xe, abs=1e-3) and y == pytest.approx(ye, abs=1e-3)
    assert t == pytest.approx(te, abs=1e-9)


def test_step_examples():
    w = open_world()
    nxt = step(w, (1.0, 0.0), 0.1)
    assert (nxt.robot.x - w.robot.x, nxt.robot.y - w.robot.y) == pytest.approx((0.1, 0.0))
    assert nxt.time == pytest.approx(0.1)
    spin = step(w, (0.0, 1.0), 0.5)
    assert (spin.robot.x, spin.robot.y) == (w.robot.x, w.robot.y)
    assert spin.robot.heading == pytest.approx(0.5)


@pytest.mark.parametrize("action,dt", [((1.2, 0.0), 0.1), ((0.5, -1.5), 0.1), ((0.5, 0.0), 0.0), ((0.5, 0.0), 0.6)])
def test_step_rejects_out_of_limits(action, dt):
    with pytest.raises(ActionOutOfLimits):
        step(open_world(), action, dt)


def test_step_does_not_mutate_input():
    w = open_world(pedestrians=(Pedestrian(LocalPoint(3.0, 3.0), (1.0, 0.0)),))
    before = format_scenario(w)
    step(w, (1.0, 0.3), 0.1)
    assert format_scenario(w) == before


def test_collision_reasons():
    labels = np.full((10, 10), Label.ROAD, dtype=np.uint8)
    labels[:, 6:] = Label.BUILDING
    w = WorldState(SemanticGrid(labels, 1.0), RobotState(5.5, 5.0, 0.0))
    hit = step(w, (1.0, 0.0), 0.5)
    assert hit.collided and hit.collision_reason == "building"
    out = step(WorldState(SemanticGrid(labels, 1.0), RobotState(0.1, 5.0, math.pi)), (1.0, 0.0), 0.5)
    assert out.collision_reason == "left_world"
    ped = open_world(pedestrians=(Pedestrian(LocalPoint(10.3, 10.0)),))
    assert step(ped, (1.0, 0.0), 0.2).collision_reason == "pedestrian"


@given(st.floats(-2.5 / 1.5, 2.5 / 1.5), st.floats(-2.5 / 1.5, 2.5 / 1.5), st.integers(1, 200))
def test_pedestrians_stay_in_bounds(vx, vy, n):
    w = open_world(n=10, res=1.0, robot=RobotState(0.5, 0.5), pedestrians=(Pedestrian(LocalPoint(5.0, 5.0), (vx, vy)),))
    for _ in range(n):
        w = step(w, (0.0, 0.0), 0.5)
        p = w.pedestrians[0]
        assert 0.0 <= p.position[0] <= 10.0 and 0.0 <= p.position[1] <= 10.0
        assert math.hypot(*p.velocity) == pytest.approx(math.hypot(vx, vy))


def test_range_wall_ahead():
    labels = np.full((40, 40), Label.ROAD, dtype=np.uint8)
    labels[:, 30:] = Label.BUILDING
    w = WorldState(SemanticGrid(labels, 0.5), RobotState(10.0, 10.0, 0.0))
    scan = sense_range(w, n_beams=180, max_range=50.0)
    front = int(np.argmin(np.abs(scan.angles)))
    assert scan.ranges[front] == pytest.approx(5.0)
    assert np.all(scan.ranges > 0) and np.all(scan.ranges <= 50.0)


def test_range_no_obstacles_is_max():
    scan = sense_range(open_world(), 64, 50.0)
    assert np.all(scan.ranges == 50.0)
    assert len(scan.obstacle_points()) == 0


def test_range_sees_pedestrian():
    w = open_world(pedestrians=(Pedestrian(LocalPoint(13.0, 10.0)),))
    scan = sense_range(w, 180, 50.0)
    assert scan.ranges[int(np.argmin(np.abs(scan.angles)))] == pytest.approx(2.7)


def test_range_requires_beams():
    with pytest.raises(ValueError):
        sense_range(open_world(), 8)


def test_rays_match_slab_oracle(rng):
    labels = np.where(rng.random((30, 30)) < 0.08, Label.BUILDING, Label.ROAD).astype(np.uint8)
    grid = SemanticGrid(labels, 0.5, LocalPoint(-3.0, 2.0))
    for _ in range(40):
        x, y = rng.uniform(-3.0, 12.0), rng.uniform(2.0, 17.0)
        angles = rng.uniform(-math.pi, math.pi, 8)
        got = cast_rays(grid, x, y, angles, 20.0)
        for a, r in zip(angles, got):
            assert r == pytest.approx(slab_oracle(grid, x, y, a, 20.0), abs=1e-9)


def test_semantic_crop_centred_and_padded():
    w = parse_scenario(EXAMPLE)
    crop = sense_semantics(w, 2.0)
    assert crop.labels.shape == (4, 4)
    assert crop.label_at(0.25, 0.75) == Label.ROAD
    assert crop.label_at(0.75, 0.25) == Label.VEGETATION
    assert crop.label_at(1.75, 0.25) == Label.OTHER  # outside the crop window
    assert crop.label_at(-0.5, -0.5) == Label.OTHER  # inside the crop, off the world
    with pytest.raises(ValueError):
        sense_semantics(w, 5.0)


def test_signs_and_robot_validation():
    with pytest.raises(ValueError):
        Sign(LocalPoint(0, 0), "merge")
    with pytest.raises(ValueError):
        RobotState(0, 0, 0, v=1.5)
