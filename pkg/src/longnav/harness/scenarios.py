"""Synthetic scenario authoring: corridors, static mazes and ambiguous
sidewalk/lawn boundaries, plus the ground-truth optimum used by the
distance-to-target metric."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..georoute import GeoPoint, LocalPoint, local_to_geo, save_route
from ..sim import Label, RobotState, SemanticGrid, WorldState, save_scenario
from ..sim.world import WHEELED_TRAVERSABLE

DEFAULT_GEO_ORIGIN = GeoPoint(38.8315, -77.3075)
RES = 0.5


@dataclass
class Scenario:
    name: str
    world: WorldState
    route_local: list[LocalPoint]

    @property
    def route(self) -> list[GeoPoint]:
        return [local_to_geo(self.world.geo_origin, p) for p in self.route_local]

    def save(self, directory: str | Path) -> tuple[Path, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        scn, rte = d / f"{self.name}.scn", d / f"{self.name}.route"
        save_scenario(self.world, scn)
        save_route(rte, self.route)
        return scn, rte


def optimal_path(
    grid: SemanticGrid, start: Sequence[float], goal: Sequence[float], allowed: Iterable[Label] = WHEELED_TRAVERSABLE
) -> tuple[float, float]:
    """Uniform-cost search over allowed cells (8-connected).

    Returns ``(d_opt, length)``: the closest any reachable cell centre gets to
    ``goal`` and the cost of the shortest allowed path to that cell.
    """
    ok = np.isin(grid.labels, [int(a) for a in allowed])
    sc, sr = (int(v) for v in grid.to_cell(*start))
    if not grid.inside(sc, sr):
        raise ValueError("start lies outside the grid")
    ok[sr, sc] = True  # the robot's own cell is always usable
    gx, gy = goal
    H, W = ok.shape
    dist = np.full((H, W), np.inf)
    dist[sr, sc] = 0.0
    heap = [(0.0, sr, sc)]
    best = (math.inf, math.inf)
    moves = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    while heap:
        d, r, c = heapq.heappop(heap)
        if d > dist[r, c]:
            continue
        cx, cy = grid.cell_center(c, r)
        near = math.hypot(float(cx) - gx, float(cy) - gy)
        if (near, d) < best:
            best = (near, d)
        for dr, dc in moves:
            rr, cc = r + dr, c + dc
            if 0 <= rr < H and 0 <= cc < W and ok[rr, cc]:
                nd = d + grid.resolution * (math.sqrt(2) if dr and dc else 1.0)
                if nd < dist[rr, cc]:
                    dist[rr, cc] = nd
                    heapq.heappush(heap, (nd, rr, cc))
    # goal inside a reachable cell counts as reached
    gc, gr = (int(v) for v in grid.to_cell(gx, gy))
    if grid.inside(gc, gr) and np.isfinite(dist[gr, gc]):
        return 0.0, float(dist[gr, gc])
    return best


def _finish(name: str, labels: np.ndarray, robot: RobotState, route: list[LocalPoint], crosswalk=None) -> Scenario:
    grid = SemanticGrid(labels, RES, LocalPoint(0.0, 0.0), crosswalk)
    world = WorldState(grid, robot, geo_origin=DEFAULT_GEO_ORIGIN)
    d_opt, _ = optimal_path(grid, (robot.x, robot.y), route[-1])
    world = replace(world, d_opt=d_opt)
    return Scenario(name, world, route)


def straight_corridor(length: float = 100.0, width: float = 6.0, name: str = "corridor") -> Scenario:
    """Road corridor between building walls, route straight down the middle."""
    w_cells = int(round((length + 20.0) / RES))
    h_cells = int(round((width + 6.0) / RES))
    labels = np.full((h_cells, w_cells), Label.BUILDING, dtype=np.uint8)
    lo = int(round(3.0 / RES))
    labels[lo : lo + int(round(width / RES)), 1:-1] = Label.ROAD
    cy = 3.0 + width / 2
    robot = RobotState(5.0, cy, 0.0)
    return _finish(name, labels, robot, [LocalPoint(5.0, cy), LocalPoint(5.0 + length, cy)])


def walled_corridor(length: float = 60.0, wall_at: float = 20.0, name: str = "walled") -> Scenario:
    """Corridor fully blocked by a wall across it."""
    sc = straight_corridor(length, name=name)
    labels = sc.world.grid.labels.copy()
    col = int(round((5.0 + wall_at) / RES))
    labels[:, col : col + 2] = Label.BUILDING
    return _finish(name, labels, sc.world.robot, sc.route_local)


def static_maze(seed: int, size: float = 40.0, n_blocks: int = 10, name: str | None = None) -> Scenario:
    """Walled square yard with random building blocks and a diagonal route."""
    rng = np.random.default_rng(seed)
    n = int(round(size / RES))
    labels = np.full((n, n), Label.ROAD, dtype=np.uint8)
    labels[:2, :] = labels[-2:, :] = labels[:, :2] = labels[:, -2:] = Label.BUILDING
    start = LocalPoint(4.0, 4.0)
    goal = LocalPoint(size - 4.0, size - 4.0)
    for _ in range(n_blocks):
        for _try in range(50):
            bw, bh = rng.integers(4, 17, size=2)
            c0, r0 = rng.integers(2, n - 2 - bw), rng.integers(2, n - 2 - bh)
            x0, y0 = c0 * RES, r0 * RES
            x1, y1 = x0 + bw * RES, y0 + bh * RES
            # keep clear disks around start and goal
            if all(math.hypot(min(max(p[0], x0), x1) - p[0], min(max(p[1], y0), y1) - p[1]) > 3.0 for p in (start, goal)):
                labels[r0 : r0 + bh, c0 : c0 + bw] = Label.BUILDING
                break
    # a sidewalk band for texture; walkable either way
    band = int(rng.integers(10, n - 10))
    strip = labels[band : band + 4, 2:-2]
    strip[strip == Label.ROAD] = Label.SIDEWALK
    robot = RobotState(start.east, start.north, math.pi / 4)
    return _finish(name or f"maze_{seed}", labels, robot, [start, goal])


def _polyline_distance_field(pts: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Distance from every (xs, ys) sample to the polyline ``pts``."""
    q = np.stack([xs.ravel(), ys.ravel()], axis=1)
    best = np.full(len(q), np.inf)
    for a, b in zip(pts[:-1], pts[1:]):
        ab = b - a
        t = np.clip(((q - a) @ ab) / max(ab @ ab, 1e-12), 0.0, 1.0)
        d = np.hypot(*(a + t[:, None] * ab - q).T)
        best = np.minimum(best, d)
    return best.reshape(xs.shape)


def ambiguous_boundary(seed: int, name: str | None = None) -> Scenario:
    """Bending sidewalk through a same-height lawn.

    Nothing here is geometrically distinguishable: the lawn has no curb or
    obstacle, so only the labels tell sidewalk from vegetation. The route
    follows the sidewalk centreline, so straight lines between subgoals cut
    across the lawn at every bend.
    """
    rng = np.random.default_rng(1000 + seed)
    width = float(rng.uniform(2.5, 3.5))
    heading = 0.0
    pts = [np.array([0.0, 0.0])]
    n_seg = int(rng.integers(3, 5))
    for i in range(n_seg):
        seg = float(rng.uniform(20.0, 30.0))
        turn = math.radians(float(rng.uniform(28.0, 45.0))) * (1 if (i + seed) % 2 == 0 else -1)
        if i:
            heading += turn
        pts.append(pts[-1] + seg * np.array([math.cos(heading), math.sin(heading)]))
    return polyline_path(name or f"boundary_{seed}", np.array(pts), width)


def polyline_path(
    name: str,
    pts: np.ndarray,
    width: float,
    inside: Label = Label.SIDEWALK,
    outside: Label = Label.VEGETATION,
    margin: float = 20.0,
) -> Scenario:
    """Band of ``inside`` cells around the polyline ``pts``; the route is its vertices."""
    pts = np.asarray(pts, dtype=float)
    lo = pts.min(axis=0) - margin
    pts = pts - lo
    hi = pts.max(axis=0) + margin
    w_cells, h_cells = (int(math.ceil(v / RES)) for v in hi)
    xs, ys = np.meshgrid((np.arange(w_cells) + 0.5) * RES, (np.arange(h_cells) + 0.5) * RES)
    labels = np.full((h_cells, w_cells), outside, dtype=np.uint8)
    labels[_polyline_distance_field(pts, xs, ys) <= width / 2] = inside
    d0 = pts[1] - pts[0]
    robot = RobotState(float(pts[0, 0]), float(pts[0, 1]), math.atan2(d0[1], d0[0]))
    route = [LocalPoint(float(x), float(y)) for x, y in pts]
    return _finish(name, labels, robot, route)


def long_route(length: float = 400.0, n_seg: int = 4, turn_deg: float = 25.0, width: float = 5.0) -> Scenario:
    """Zig-zag road of total ``length`` through open lawn."""
    seg = length / n_seg
    pts, heading = [np.zeros(2)], 0.0
    for i in range(n_seg):
        if i:
            heading += math.radians(turn_deg) * (1 if i % 2 else -1)
        pts.append(pts[-1] + seg * np.array([math.cos(heading), math.sin(heading)]))
    return polyline_path(f"route_{int(length)}m", np.array(pts), width, inside=Label.ROAD)


def ambiguous_suite(n: int = 10) -> list[Scenario]:
    return [ambiguous_boundary(i) for i in range(n)]


def maze_suite(n: int = 5) -> list[Scenario]:
    return [static_maze(i) for i in range(n)]
