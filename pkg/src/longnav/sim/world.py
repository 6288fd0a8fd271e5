"""World state, semantic terrain grid and the deterministic stepping rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from ..georoute import GeoPoint, LocalPoint

V_MAX = 1.0  # m/s, platform limit
W_MAX = 1.0  # rad/s
PED_SPEED_MAX = 2.5
PED_RADIUS = 0.3
DT_MAX = 0.5


class Label(IntEnum):
    ROAD = 0
    SIDEWALK = 1
    VEGETATION = 2
    BUILDING = 3
    OTHER = 4

    @property
    def char(self) -> str:
        return "RSVBO"[self]

    @classmethod
    def from_char(cls, c: str) -> "Label":
        return cls("RSVBO".index(c))

    @classmethod
    def parse(cls, name: str) -> "Label":
        name = name.strip()
        if len(name) == 1:
            return cls.from_char(name.upper())
        return cls[name.upper()]


WHEELED_TRAVERSABLE = frozenset({Label.ROAD, Label.SIDEWALK})


class ActionOutOfLimits(ValueError):
    pass


def wrap_angle(a: float) -> float:
    """Normalize to (-pi, pi]."""
    a = math.fmod(a, 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    elif a > math.pi:
        a -= 2 * math.pi
    return a


@dataclass(eq=False)
class SemanticGrid:
    """Row-major label raster; ``labels[row, col]`` covers the cell whose lower
    left corner is ``origin + (col, row) * resolution``."""

    labels: np.ndarray
    resolution: float
    origin: LocalPoint = LocalPoint(0.0, 0.0)
    crosswalk: np.ndarray | None = None
    elevation: np.ndarray | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.labels.ndim != 2:
            raise ValueError("labels must be a 2D array")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.labels.max(initial=0) > Label.OTHER:
            raise ValueError("unknown label code in grid")
        self.origin = LocalPoint(float(self.origin[0]), float(self.origin[1]))
        if self.crosswalk is None:
            self.crosswalk = np.zeros(self.labels.shape, dtype=bool)
        self.crosswalk = np.asarray(self.crosswalk, dtype=bool)
        if self.elevation is None:
            self.elevation = np.zeros(self.labels.shape, dtype=float)
        self.elevation = np.asarray(self.elevation, dtype=float)
        if self.crosswalk.shape != self.labels.shape or self.elevation.shape != self.labels.shape:
            raise ValueError("crosswalk/elevation shape must match labels")
        if np.any(self.crosswalk & (self.labels != Label.ROAD)):
            raise ValueError("crosswalk cells must be labeled road")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def extent(self) -> tuple[float, float]:
        return self.width * self.resolution, self.height * self.resolution

    def to_cell(self, x, y):
        """World coordinates to (col, row); works elementwise on arrays."""
        col = np.floor((np.asarray(x) - self.origin[0]) / self.resolution).astype(int)
        row = np.floor((np.asarray(y) - self.origin[1]) / self.resolution).astype(int)
        return col, row

    def cell_center(self, col, row):
        return (
            self.origin[0] + (np.asarray(col) + 0.5) * self.resolution,
            self.origin[1] + (np.asarray(row) + 0.5) * self.resolution,
        )

    def inside(self, col, row):
        col, row = np.asarray(col), np.asarray(row)
        return (col >= 0) & (col < self.width) & (row >= 0) & (row < self.height)

    def label_at(self, x, y, outside: int = Label.OTHER):
        col, row = self.to_cell(x, y)
        ok = self.inside(col, row)
        out = np.full(np.shape(col), outside, dtype=np.uint8)
        out[ok] = self.labels[row[ok], col[ok]]
        return out if out.ndim else Label(int(out))

    def equals(self, other: "SemanticGrid") -> bool:
        return (
            self.resolution == other.resolution
            and tuple(self.origin) == tuple(other.origin)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.crosswalk, other.crosswalk)
            and np.array_equal(self.elevation, other.elevation)
        )


@dataclass(frozen=True)
class RobotState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    v: float = 0.0
    w: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))
        if abs(self.v) > V_MAX + 1e-12:
            raise ValueError(f"|v|={self.v} exceeds platform max {V_MAX}")

    @property
    def pose(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.heading)


@dataclass(frozen=True)
class Pedestrian:
    position: LocalPoint
    velocity: tuple[float, float] = (0.0, 0.0)
    group_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "position", LocalPoint(*map(float, self.position)))
        object.__setattr__(self, "velocity", tuple(map(float, self.velocity)))
        if math.hypot(*self.velocity) > PED_SPEED_MAX + 1e-12:
            raise ValueError(f"pedestrian speed exceeds {PED_SPEED_MAX} m/s")


SIGN_KINDS = ("stop", "yield", "none")


@dataclass(frozen=True)
class Sign:
    position: LocalPoint
    kind: str = "stop"

    def __post_init__(self):
        object.__setattr__(self, "position", LocalPoint(*map(float, self.position)))
        if self.kind not in SIGN_KINDS:
            raise ValueError(f"unknown sign kind {self.kind!r}")


@dataclass(eq=False)
class WorldState:
    grid: SemanticGrid
    robot: RobotState
    pedestrians: tuple[Pedestrian, ...] = ()
    signs: tuple[Sign, ...] = ()
    time: float = 0.0
    geo_origin: GeoPoint | None = None
    d_opt: float = 0.0
    collided: bool = False
    collision_reason: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.pedestrians = tuple(self.pedestrians)
        self.signs = tuple(self.signs)

    def equals(self, other: "WorldState") -> bool:
        return (
            self.grid.equals(other.grid)
            and self.robot == other.robot
            and self.pedestrians == other.pedestrians
            and self.signs == other.signs
            and self.time == other.time
            and self.geo_origin == other.geo_origin
            and self.d_opt == other.d_opt
            and self.collided == other.collided
        )


def integrate_unicycle(x: float, y: float, th: float, v: float, w: float, dt: float):
    """Closed-form constant-(v, w) motion over ``dt``."""
    if abs(w) > 1e-6:
        th2 = th + w * dt
        x += v / w * (math.sin(th2) - math.sin(th))
        y -= v / w * (math.cos(th2) - math.cos(th))
    else:
        th2 = th
        x += v * dt * math.cos(th)
        y += v * dt * math.sin(th)
    return x, y, th2


def _reflect(p: float, vel: float, lo: float, hi: float) -> tuple[float, float]:
    span = hi - lo
    if span <= 0:
        return lo, 0.0
    # fold onto [lo, hi] as many times as needed
    q = (p - lo) % (2 * span)
    n_folds = math.floor((p - lo) / span)
    if q > span:
        q = 2 * span - q
    if n_folds % 2:
        vel = -vel
    return lo + q, vel


def collision_check(world: WorldState, x: float, y: float) -> str:
    grid = world.grid
    col, row = grid.to_cell(x, y)
    if not grid.inside(col, row):
        return "left_world"
    if grid.labels[row, col] == Label.BUILDING:
        return "building"
    for ped in world.pedestrians:
        if math.hypot(ped.position[0] - x, ped.position[1] - y) < PED_RADIUS:
            return "pedestrian"
    return ""


def step(world: WorldState, action: tuple[float, float], dt: float) -> WorldState:
    """Advance the world by ``dt`` under robot command ``action = (v, w)``."""
    v, w = float(action[0]), float(action[1])
    if not 0.0 < dt <= DT_MAX:
        raise ActionOutOfLimits(f"dt={dt} outside (0, {DT_MAX}]")
    if abs(v) > V_MAX + 1e-12 or abs(w) > W_MAX + 1e-12:
        raise ActionOutOfLimits(f"action (v={v}, w={w}) outside platform limits")
    r = world.robot
    x, y, th = integrate_unicycle(r.x, r.y, r.heading, v, w, dt)
    robot = RobotState(x, y, th, v, w)

    x0, y0 = world.grid.origin
    x1, y1 = x0 + world.grid.extent[0], y0 + world.grid.extent[1]
    peds = []
    for ped in world.pedestrians:
        px, vx = _reflect(ped.position[0] + ped.velocity[0] * dt, ped.velocity[0], x0, x1)
        py, vy = _reflect(ped.position[1] + ped.velocity[1] * dt, ped.velocity[1], y0, y1)
        peds.append(Pedestrian(LocalPoint(px, py), (vx, vy), ped.group_id))

    nxt = replace(world, robot=robot, pedestrians=tuple(peds), time=world.time + dt)
    reason = collision_check(nxt, x, y)
    if reason:
        nxt.collided = True
        nxt.collision_reason = reason
    return nxt
