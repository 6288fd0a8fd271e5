"""Synthetic range and semantic sensing against the ground-truth world."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..georoute import LocalPoint
from .world import PED_RADIUS, Label, SemanticGrid, WorldState

DEFAULT_MAX_RANGE = 50.0
DEFAULT_BEAMS = 180
MIN_RANGE = 1e-6


@dataclass(frozen=True, eq=False)
class RangeScan:
    """Beam angles are relative to the robot heading."""

    angles: np.ndarray
    ranges: np.ndarray
    max_range: float

    def obstacle_points(self) -> np.ndarray:
        """(K, 2) robot-frame endpoints of beams that hit something."""
        hit = self.ranges < self.max_range
        a, r = self.angles[hit], self.ranges[hit]
        return np.column_stack([r * np.cos(a), r * np.sin(a)])


def beam_angles(n_beams: int) -> np.ndarray:
    return -math.pi + 2 * math.pi * np.arange(n_beams) / n_beams


def _boundary_crossings(p0: float, d: np.ndarray, lo: float, res: float, n: int) -> np.ndarray:
    """Ray parameters t at which each ray crosses successive cell boundaries
    along one axis; rays parallel to the axis get inf."""
    base = math.floor((p0 - lo) / res)
    k = np.arange(1, n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = lo + (base + k[None, :]) * res
        neg = lo + (base - k[None, :] + 1) * res
        b = np.where(d[:, None] > 0, pos, neg)
        t = (b - p0) / d[:, None]
    t[~(np.abs(d) > 1e-15)] = np.inf
    return t


def cast_rays(grid: SemanticGrid, x: float, y: float, angles: np.ndarray, max_range: float) -> np.ndarray:
    """Distance to the first building cell along each world-frame angle.

    Walks every cell boundary crossing of each ray (exact grid traversal,
    vectorized over rays). Cells outside the grid never block.
    """
    angles = np.asarray(angles, dtype=float)
    dx, dy = np.cos(angles), np.sin(angles)
    res = grid.resolution
    n = int(math.ceil(max_range / res)) + 2
    tx = _boundary_crossings(x, dx, grid.origin[0], res, n)
    ty = _boundary_crossings(y, dy, grid.origin[1], res, n)
    ts = np.concatenate([np.zeros((len(angles), 1)), tx, ty], axis=1)
    ts.sort(axis=1)
    ts = np.minimum(ts, max_range)
    mid = 0.5 * (ts[:, :-1] + ts[:, 1:])
    col, row = grid.to_cell(x + mid * dx[:, None], y + mid * dy[:, None])
    inside = grid.inside(col, row)
    blocked = np.zeros(mid.shape, dtype=bool)
    blocked[inside] = grid.labels[row[inside], col[inside]] == Label.BUILDING
    blocked &= ts[:, 1:] > ts[:, :-1]
    first = np.argmax(blocked, axis=1)
    any_hit = blocked[np.arange(len(angles)), first]
    out = np.full(len(angles), float(max_range))
    out[any_hit] = ts[np.arange(len(angles)), first][any_hit]
    return out


def _ray_disc(x, y, dx, dy, cx, cy, radius):
    """Entry distance of rays into a disc; inf when missed."""
    ox, oy = x - cx, y - cy
    b = ox * dx + oy * dy
    c = ox * ox + oy * oy - radius * radius
    disc = b * b - c
    t = np.full(np.shape(dx), np.inf)
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t0, t1 = -b - sq, -b + sq
    t = np.where(ok & (t0 >= 0), t0, t)
    t = np.where(ok & (t0 < 0) & (t1 >= 0), 0.0, t)  # origin inside the disc
    return t


def sense_range(world: WorldState, n_beams: int = DEFAULT_BEAMS, max_range: float = DEFAULT_MAX_RANGE) -> RangeScan:
    if n_beams < 16:
        raise ValueError("n_beams must be >= 16")
    if max_range <= 0:
        raise ValueError("max_range must be positive")
    r = world.robot
    rel = beam_angles(n_beams)
    world_angles = rel + r.heading
    ranges = cast_rays(world.grid, r.x, r.y, world_angles, max_range)
    if world.pedestrians:
        dx, dy = np.cos(world_angles), np.sin(world_angles)
        for ped in world.pedestrians:
            t = _ray_disc(r.x, r.y, dx, dy, ped.position[0], ped.position[1], PED_RADIUS)
            ranges = np.minimum(ranges, t)
    ranges = np.clip(ranges, MIN_RANGE, max_range)
    return RangeScan(rel, ranges, float(max_range))


def sense_semantics(world: WorldState, window_m: float) -> SemanticGrid:
    """World-aligned square crop of the label grid centred on the robot."""
    g = world.grid
    if window_m > max(g.extent):
        raise ValueError(f"window {window_m} m exceeds grid extent {g.extent}")
    n = max(1, int(round(window_m / g.resolution)))
    rc, rr = g.to_cell(world.robot.x, world.robot.y)
    c0, r0 = int(rc) - n // 2, int(rr) - n // 2
    labels = np.full((n, n), Label.OTHER, dtype=np.uint8)
    cross = np.zeros((n, n), dtype=bool)
    elev = np.zeros((n, n), dtype=float)
    sc0, sc1 = max(c0, 0), min(c0 + n, g.width)
    sr0, sr1 = max(r0, 0), min(r0 + n, g.height)
    if sc0 < sc1 and sr0 < sr1:
        dst = (slice(sr0 - r0, sr1 - r0), slice(sc0 - c0, sc1 - c0))
        src = (slice(sr0, sr1), slice(sc0, sc1))
        labels[dst] = g.labels[src]
        cross[dst] = g.crosswalk[src]
        elev[dst] = g.elevation[src]
    origin = LocalPoint(g.origin[0] + c0 * g.resolution, g.origin[1] + r0 * g.resolution)
    return SemanticGrid(labels, g.resolution, origin, cross, elev)
